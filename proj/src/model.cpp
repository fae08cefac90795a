#include "facecond/model.hpp"

#include "facecond/error.hpp"

#include <Eigen/Geometry>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace facecond {

namespace {

bool all_finite(std::span<const float> values) {
  return std::all_of(values.begin(), values.end(), [](float x) { return std::isfinite(x); });
}

void require(bool ok, const char* field, const std::string& what) {
  if (!ok) throw ValidationError(fmt::format("invalid assets field `{}`: {}", field, what));
}

void check_array(std::span<const float> values, std::size_t expected, const char* field) {
  require(values.size() == expected, field,
          fmt::format("expected {} values, found {}", expected, values.size()));
  require(all_finite(values), field, "non-finite value");
}

bool is_zero(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

struct Articulation {
  bool has_jaw;
  bool has_global;
  Mat3 jaw;
  Mat3 global;
  Vec3 joint;
};

Articulation articulation(const HeadModelAssets& assets, const FlameParams& params) {
  Articulation a;
  a.has_jaw = !is_zero(std::span(params.theta).subspan(3, 3));
  a.has_global = !is_zero(std::span(params.theta).subspan(0, 3));
  a.jaw = rotation_from_axis_angle(params.jaw_rotation());
  a.global = rotation_from_axis_angle(params.global_rotation());
  a.joint = Vec3(assets.jaw_joint[0], assets.jaw_joint[1], assets.jaw_joint[2]);
  return a;
}

template <std::size_t K>
std::vector<std::pair<int, double>> active_coefficients(const std::array<double, K>& coeffs) {
  std::vector<std::pair<int, double>> active;
  for (std::size_t k = 0; k < K; ++k)
    if (coeffs[k] != 0.0) active.emplace_back(static_cast<int>(k), coeffs[k]);
  return active;
}

Vec3 evaluate_vertex(const HeadModelAssets& assets, std::size_t v,
                     std::span<const std::pair<int, double>> shape,
                     std::span<const std::pair<int, double>> expression, const Articulation& art) {
  Vec3 p = assets.template_vertex(v);
  for (int d = 0; d < 3; ++d) {
    const float* shape_row = &assets.shape_basis[(3 * v + d) * kShapeDims];
    const float* expr_row = &assets.expression_basis[(3 * v + d) * kExpressionDims];
    double acc = p[d];
    for (const auto& [k, c] : shape) acc += static_cast<double>(shape_row[k]) * c;
    for (const auto& [k, c] : expression) acc += static_cast<double>(expr_row[k]) * c;
    p[d] = acc;
  }
  if (art.has_jaw) {
    const double w = assets.jaw_weights[v];
    const Vec3 rotated = art.jaw * (p - art.joint) + art.joint;
    p = p + w * (rotated - p);
  }
  if (art.has_global) p = art.global * p;
  return p;
}

}  // namespace

Mesh HeadModelAssets::template_mesh() const {
  Mesh mesh;
  mesh.topology = topology;
  mesh.vertices.resize(num_vertices());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) mesh.vertices[v] = template_vertex(v);
  return mesh;
}

void HeadModelAssets::validate() const {
  require(!template_vertices.empty() && template_vertices.size() % 3 == 0, "template_vertices",
          "expected a non-empty V×3 array");
  require(all_finite(template_vertices), "template_vertices", "non-finite value");
  const std::size_t v_count = num_vertices();

  require(topology != nullptr && !topology->faces.empty(), "faces", "no faces");
  for (const Face& f : topology->faces)
    for (std::uint32_t idx : f)
      require(idx < v_count, "faces", fmt::format("vertex index {} out of range {}", idx, v_count));

  check_array(shape_basis, v_count * 3 * kShapeDims, "shape_basis");
  check_array(expression_basis, v_count * 3 * kExpressionDims, "expression_basis");

  check_array(jaw_weights, v_count, "jaw_weights");
  for (float w : jaw_weights)
    require(w >= 0.0f && w <= 1.0f, "jaw_weights", fmt::format("value {} outside [0, 1]", w));

  require(all_finite(jaw_joint), "jaw_joint", "non-finite value");

  require(eye_vertex_ids[0] < v_count && eye_vertex_ids[1] < v_count, "eye_vertex_ids",
          "index out of range");
  require(eye_vertex_ids[0] != eye_vertex_ids[1], "eye_vertex_ids", "eye vertices must differ");

  require(topology->uvs.size() == topology->faces.size(), "uv_coords",
          "every face needs UV coordinates");
  for (const FaceUv& corners : topology->uvs)
    for (const Vec2& uv : corners)
      require(std::isfinite(uv.x()) && std::isfinite(uv.y()) && uv.x() >= 0.0 && uv.x() <= 1.0 &&
                  uv.y() >= 0.0 && uv.y() <= 1.0,
              "uv_coords", "coordinate outside [0, 1]^2");

  require(tex_res > 0 && (tex_res & (tex_res - 1)) == 0, "albedo_mean",
          fmt::format("texture side {} is not a power of two", tex_res));
  const std::size_t texels = static_cast<std::size_t>(tex_res) * tex_res;
  check_array(albedo_mean, texels * 3, "albedo_mean");
  for (float a : albedo_mean)
    require(a >= 0.0f && a <= 1.0f, "albedo_mean", fmt::format("value {} outside [0, 1]", a));
  check_array(albedo_basis, texels * 3 * kAppearanceDims, "albedo_basis");
}

bool operator==(const HeadModelAssets& a, const HeadModelAssets& b) {
  auto same_topology = [&] {
    if (a.topology == b.topology) return true;
    if (!a.topology || !b.topology) return false;
    return a.topology->faces == b.topology->faces && a.topology->uvs == b.topology->uvs;
  };
  return a.template_vertices == b.template_vertices && same_topology() &&
         a.shape_basis == b.shape_basis && a.expression_basis == b.expression_basis &&
         a.jaw_weights == b.jaw_weights && a.jaw_joint == b.jaw_joint &&
         a.eye_vertex_ids == b.eye_vertex_ids && a.tex_res == b.tex_res &&
         a.albedo_mean == b.albedo_mean && a.albedo_basis == b.albedo_basis;
}

Mat3 rotation_from_axis_angle(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis_angle / angle).toRotationMatrix();
}

Mesh evaluate(const HeadModelAssets& assets, const FlameParams& params) {
  const auto shape = active_coefficients(params.beta);
  const auto expression = active_coefficients(params.psi);
  const Articulation art = articulation(assets, params);

  Mesh mesh;
  mesh.topology = assets.topology;
  mesh.vertices.resize(assets.num_vertices());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    mesh.vertices[v] = evaluate_vertex(assets, v, shape, expression, art);
  return mesh;
}

std::vector<Vec3> evaluate_vertices(const HeadModelAssets& assets, const FlameParams& params,
                                    std::span<const std::uint32_t> vertex_ids) {
  const auto shape = active_coefficients(params.beta);
  const auto expression = active_coefficients(params.psi);
  const Articulation art = articulation(assets, params);

  std::vector<Vec3> out;
  out.reserve(vertex_ids.size());
  for (std::uint32_t v : vertex_ids) {
    if (v >= assets.num_vertices())
      throw ValidationError(fmt::format("vertex id {} out of range", v));
    out.push_back(evaluate_vertex(assets, v, shape, expression, art));
  }
  return out;
}

std::vector<Vec3> vertex_normals(const Mesh& mesh) {
  std::vector<Vec3> acc(mesh.num_vertices(), Vec3::Zero());
  for (const Face& f : mesh.faces()) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const double twice_area = cross.norm();
    if (0.5 * twice_area < 1e-12) continue;
    const Vec3 n = cross / twice_area;
    const std::array<const Vec3*, 3> p{&a, &b, &c};
    for (int k = 0; k < 3; ++k) {
      const Vec3 e1 = *p[(k + 1) % 3] - *p[k];
      const Vec3 e2 = *p[(k + 2) % 3] - *p[k];
      const double angle = std::atan2(e1.cross(e2).norm(), e1.dot(e2));
      acc[f[k]] += angle * n;
    }
  }
  for (Vec3& n : acc) {
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3(0.0, 0.0, 1.0);
  }
  return acc;
}

}  // namespace facecond
