#pragma once

#include "facecond/camera.hpp"
#include "facecond/model.hpp"
#include "facecond/shading.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace facecond {

// Everything needed to render the conditions for one image.
struct FaceParams {
  FlameParams flame;
  AppearanceParams appearance;
  LightingParams lighting;
  CameraParams cam;
  std::int64_t style_id = 0;

  friend bool operator==(const FaceParams&, const FaceParams&) = default;
};

// beta + theta + psi + alpha + l + camera.
inline constexpr int kControlDims = kShapeDims + kPoseDims + kExpressionDims + kAppearanceDims +
                                    3 * kShBands + 3;
static_assert(kControlDims == 236);

// Concatenated controllable vector in the order beta, theta, psi, alpha, l, c.
std::array<double, kControlDims> control_vector(const FaceParams& p);

std::string params_to_json(const FaceParams& p, const ImageSpec& image);
// Returns the parameters and the image resolution recorded with them.
std::pair<FaceParams, ImageSpec> params_from_json(const std::string& text);
void write_params(const FaceParams& p, const ImageSpec& image, const std::filesystem::path& path);
std::pair<FaceParams, ImageSpec> read_params(const std::filesystem::path& path);

inline constexpr int kLightingBankSize = 16;
const std::array<LightingParams, kLightingBankSize>& lighting_bank();

// Leading principal components drawn from N(0, 1) for shape, expression and
// appearance; the rest stay exactly zero.
inline constexpr int kSampledComponents = 3;
inline constexpr double kMaxHeadYaw = 3.14159265358979323846 / 8.0;
inline constexpr double kMaxJawOpening = 3.14159265358979323846 / 12.0;

// Random-generation protocol: head yaw ~ U[-pi/8, pi/8] about y, jaw opening
// ~ U[0, pi/12] about x, lighting from the bank, camera framed on the eyes.
FaceParams sample_params(std::uint64_t seed, const HeadModelAssets& assets, const ImageSpec& image,
                         std::optional<EyeFraming> framing = std::nullopt);

// Convex combination of geometry: lambda·a + (1 - lambda)·b over beta, theta
// and psi. Everything else (appearance, lighting, camera, style) comes from a.
FaceParams blend_geometry(const FaceParams& a, const FaceParams& b, double lambda);

// For every batch entry i, blends it with a uniformly chosen partner j != i
// using lambda ~ U(0, 1).
std::vector<FaceParams> interpolate_params(const std::vector<FaceParams>& batch, std::uint64_t seed);

}  // namespace facecond
