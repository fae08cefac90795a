#pragma once

#include "facecond/camera.hpp"
#include "facecond/image.hpp"
#include "facecond/model.hpp"
#include "facecond/shading.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace facecond {

inline constexpr std::int32_t kEmptyTriangle = -1;

enum class CullMode { kBackFaces, kNone };

// Per-pixel nearest fragment of a set of screen-space triangles. Barycentrics
// are indexed by the triangle's own corner order.
struct Fragments {
  int width = 0;
  int height = 0;
  std::vector<double> depth;  // +inf where empty
  std::vector<std::int32_t> tri_id;
  std::vector<std::array<double, 3>> bary;

  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
};

// Z-buffered scan conversion with pixel centres at (col + 0.5, row + 0.5) and
// the top-left fill rule. With back-face culling, a triangle is kept only if it
// is counter-clockwise in a y-up frame (negative signed area in pixel space,
// where y grows downwards). Depth ties go to the lower triangle index. The
// result does not depend on `workers`.
Fragments rasterize_triangles(std::span<const ProjectedPoint> vertices, std::span<const Face> faces,
                              int width, int height, CullMode cull, int workers = 1);

struct RenderBuffers {
  int resolution = 0;
  std::vector<double> depth;
  std::vector<std::int32_t> tri_id;
  std::vector<std::array<double, 3>> bary;
  std::vector<Vec2> uv;  // empty when the mesh carries no UVs
  std::vector<std::uint8_t> mask;
  Image normal_img;  // P×P×3, background (0.5, 0.5, 0.5)
  Image color_img;   // P×P×3, background black

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * resolution + col;
  }
  bool covered(int row, int col) const { return mask[index(row, col)] != 0; }
};

RenderBuffers rasterize(const Mesh& mesh, const CameraParams& cam, const ImageSpec& image,
                        int workers = 1);

// Colour-coded camera-space normals, rgb = (n + 1) / 2.
Image render_normals(const RenderBuffers& buffers, const Mesh& mesh);
Image render_normals(const RenderBuffers& buffers, const Mesh& mesh,
                     std::span<const Vec3> vertex_normals);

// SH-shaded albedo lookup at interpolated UVs.
Image render_textured(const RenderBuffers& buffers, const Mesh& mesh, const TextureMap& albedo,
                      const LightingParams& light);
Image render_textured(const RenderBuffers& buffers, const Mesh& mesh,
                      std::span<const Vec3> vertex_normals, const TextureMap& albedo,
                      const LightingParams& light);

// Rasterize plus both renders, filling normal_img and color_img.
RenderBuffers render_conditions(const Mesh& mesh, const CameraParams& cam, const ImageSpec& image,
                                const TextureMap& albedo, const LightingParams& light,
                                int workers = 1);

inline constexpr int kConditionChannels = 6;
extern const std::array<std::string, kConditionChannels> kConditionChannelNames;

// Channels 0-2: normal rendering, 3-5: textured rendering. pyramid[0] is the
// full-resolution stack, each next level is a 2×2 mean of the previous one.
struct ConditioningStack {
  std::vector<Image> pyramid;

  const Image& channels() const { return pyramid.front(); }
  int resolution() const { return pyramid.front().width; }
  int levels() const { return static_cast<int>(pyramid.size()); }
  friend bool operator==(const ConditioningStack&, const ConditioningStack&) = default;
};

// Largest level count for resolution P (coarsest level 4×4).
int max_pyramid_levels(int resolution);

ConditioningStack conditioning_stack(const Image& normal_img, const Image& color_img, int levels);

Image average_pool_2x2(const Image& img);

}  // namespace facecond
