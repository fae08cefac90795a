#pragma once

#include "facecond/camera.hpp"
#include "facecond/image.hpp"
#include "facecond/model.hpp"

#include <cstdint>
#include <vector>

namespace facecond {

inline constexpr int kDefaultStolenTextureSize = 128;

// Where each UV texel of the mesh lands in the image, and whether the surface
// point behind it is seen by the camera.
struct CorrespondenceMap {
  int size = 0;              // T_s
  int image_resolution = 0;  // P of the image the map refers to
  // T_s×T_s×2 image-plane coordinates in pixels (centres at i + 0.5).
  std::vector<float> img_xy;
  std::vector<std::uint8_t> visible;  // T_s×T_s

  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * size + col; }
  std::size_t visible_count() const;
  friend bool operator==(const CorrespondenceMap&, const CorrespondenceMap&) = default;
};

struct PartialTexture {
  Image texels;  // T_s×T_s×3, zero where not visible
  std::vector<std::uint8_t> visible;

  int size() const { return texels.width; }
  std::size_t visible_count() const;
  friend bool operator==(const PartialTexture&, const PartialTexture&) = default;
};

// Relative depth tolerance for the visibility test, times the mesh depth extent.
inline constexpr double kVisibilityDepthTolerance = 1e-4;

// Rasterizes the mesh in UV space to find each texel's surface point, projects
// it, and marks it visible when it lies on a front-facing triangle inside the
// frame and no front-facing triangle covers the same image location more than
// eps_z closer. The occlusion depth is evaluated at the exact projected point.
// Texels whose bilinear footprint touches a background pixel are also left
// out, so stealing never blends in colour from outside the silhouette.
CorrespondenceMap texel_correspondences(const Mesh& mesh, const CameraParams& cam,
                                        const ImageSpec& image, int t_s = kDefaultStolenTextureSize);

// Bilinear lookup of `img` at every visible texel's image location.
PartialTexture steal_texture(const Image& img, const CorrespondenceMap& corr);

struct ConsistencyResult {
  double loss = 0.0;
  std::size_t overlap = 0;
};

// Mean squared per-channel difference over texels visible in both maps. An
// empty overlap yields {0, 0}.
ConsistencyResult consistency_loss(const PartialTexture& a, const PartialTexture& b);

}  // namespace facecond
