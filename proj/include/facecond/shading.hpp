#pragma once

#include "facecond/image.hpp"
#include "facecond/model.hpp"

#include <array>

namespace facecond {

struct AppearanceParams {
  std::array<double, kAppearanceDims> alpha{};
  friend bool operator==(const AppearanceParams&, const AppearanceParams&) = default;
};

inline constexpr int kShBands = 9;

// Second-order SH lighting: coefficient k of channel ch at sh[3 * k + ch].
struct LightingParams {
  std::array<double, kShBands * 3> sh{};

  double& at(int k, int ch) { return sh[3 * k + ch]; }
  double at(int k, int ch) const { return sh[3 * k + ch]; }

  // Irradiance identically 1 in every channel.
  static LightingParams constant(double irradiance = 1.0);

  friend bool operator==(const LightingParams&, const LightingParams&) = default;
};

// T×T×3 albedo texture. Texel (row, col) is centred at
// uv = ((col + 0.5) / T, (row + 0.5) / T).
using TextureMap = Image;

TextureMap albedo_from_appearance(const HeadModelAssets& assets, const AppearanceParams& a);

// Bilinear lookup at uv with clamp-to-edge addressing.
std::array<double, 3> sample_texture(const TextureMap& tex, const Vec2& uv);

// Real spherical-harmonics constants for bands 0..2.
namespace sh {
inline constexpr double kBand0 = 0.28209479177387814;   // 1 / (2 sqrt(pi))
inline constexpr double kBand1 = 0.48860251190291992;   // sqrt(3 / (4 pi))
inline constexpr double kBand2a = 1.0925484305920792;   // sqrt(15 / (4 pi))
inline constexpr double kBand2z = 0.31539156525252005;  // sqrt(5 / (16 pi))
inline constexpr double kBand2d = 0.54627421529603959;  // sqrt(15 / (16 pi))
}  // namespace sh

// Basis order: Y00; Y1-1 (y), Y10 (z), Y11 (x); Y2-2 (xy), Y2-1 (yz),
// Y20 (3z^2 - 1), Y21 (xz), Y22 (x^2 - y^2). Throws ValidationError unless
// |n| = 1 within 1e-6.
std::array<double, kShBands> sh_basis(const Vec3& n);

// Per-channel irradiance sum_k l[k, ch] Y_k(n) times albedo, before clamping.
std::array<double, 3> shade_unclamped(const std::array<double, 3>& albedo, const Vec3& n,
                                      const LightingParams& light);

// shade_unclamped() clamped to [0, 1].
std::array<double, 3> shade(const std::array<double, 3>& albedo, const Vec3& n,
                            const LightingParams& light);

}  // namespace facecond
