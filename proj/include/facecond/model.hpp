#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace facecond {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Face = std::array<std::uint32_t, 3>;
using FaceUv = std::array<Vec2, 3>;

// Connectivity plus optional per-face-corner UVs, shared between the assets
// and every mesh evaluated from them.
struct MeshTopology {
  std::vector<Face> faces;
  std::vector<FaceUv> uvs;  // empty, or one entry per face

  bool has_uvs() const { return !uvs.empty(); }
};

struct Mesh {
  std::vector<Vec3> vertices;
  std::shared_ptr<const MeshTopology> topology;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_faces() const { return topology ? topology->faces.size() : 0; }
  const std::vector<Face>& faces() const { return topology->faces; }
};

inline constexpr int kShapeDims = 100;
inline constexpr int kPoseDims = 6;
inline constexpr int kExpressionDims = 50;
inline constexpr int kAppearanceDims = 50;

struct FlameParams {
  std::array<double, kShapeDims> beta{};
  // [0, 3): global rotation, [3, 6): jaw rotation; both axis-angle.
  std::array<double, kPoseDims> theta{};
  std::array<double, kExpressionDims> psi{};

  Vec3 global_rotation() const { return {theta[0], theta[1], theta[2]}; }
  Vec3 jaw_rotation() const { return {theta[3], theta[4], theta[5]}; }

  friend bool operator==(const FlameParams&, const FlameParams&) = default;
};

// Statistical head model. Vertex data is stored in single precision, which is
// also the on-disk precision, so a save/load cycle is lossless. All evaluation
// happens in double precision.
struct HeadModelAssets {
  std::vector<float> template_vertices;  // V×3, meters
  std::shared_ptr<const MeshTopology> topology;
  std::vector<float> shape_basis;       // V×3×100
  std::vector<float> expression_basis;  // V×3×50
  std::vector<float> jaw_weights;       // V, in [0, 1]
  std::array<float, 3> jaw_joint{};
  std::array<std::uint32_t, 2> eye_vertex_ids{};  // left, right
  int tex_res = 0;
  std::vector<float> albedo_mean;   // T×T×3, [0, 1]
  std::vector<float> albedo_basis;  // T×T×3×50

  std::size_t num_vertices() const { return template_vertices.size() / 3; }
  std::size_t num_faces() const { return topology ? topology->faces.size() : 0; }

  Vec3 template_vertex(std::size_t v) const {
    return {template_vertices[3 * v], template_vertices[3 * v + 1], template_vertices[3 * v + 2]};
  }
  Mesh template_mesh() const;

  // Throws ValidationError naming the offending field.
  void validate() const;

  friend bool operator==(const HeadModelAssets& a, const HeadModelAssets& b);
};

// Serialized FCND byte image of the assets.
std::vector<std::uint8_t> serialize_assets(const HeadModelAssets& assets);
HeadModelAssets deserialize_assets(std::span<const std::uint8_t> bytes);

HeadModelAssets load_assets(const std::filesystem::path& path);
void save_assets(const HeadModelAssets& assets, const std::filesystem::path& path);

HeadModelAssets gen_synthetic_assets(std::uint64_t seed, int v_target, int tex_res);

/// Rodrigues' formula. A zero vector yields the exact identity.
Mat3 rotation_from_axis_angle(const Vec3& axis_angle);

// M(beta, theta, psi): blendshapes, then jaw rotation about the jaw joint
// weighted per vertex, then global rotation about the origin.
Mesh evaluate(const HeadModelAssets& assets, const FlameParams& params);

// Same as evaluate() restricted to the listed vertices.
std::vector<Vec3> evaluate_vertices(const HeadModelAssets& assets, const FlameParams& params,
                                    std::span<const std::uint32_t> vertex_ids);

/// Angle-weighted vertex normals. Faces with area below 1e-12 are skipped;
/// vertices touched only by such faces get (0, 0, 1).
std::vector<Vec3> vertex_normals(const Mesh& mesh);

}  // namespace facecond
