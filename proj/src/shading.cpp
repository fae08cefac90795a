#include "facecond/shading.hpp"

#include "facecond/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace facecond {

LightingParams LightingParams::constant(double irradiance) {
  LightingParams l;
  for (int ch = 0; ch < 3; ++ch) l.at(0, ch) = irradiance / sh::kBand0;
  return l;
}

TextureMap albedo_from_appearance(const HeadModelAssets& assets, const AppearanceParams& a) {
  const int t = assets.tex_res;
  TextureMap tex(t, t, 3);
  std::vector<std::pair<int, double>> active;
  for (int k = 0; k < kAppearanceDims; ++k)
    if (a.alpha[k] != 0.0) active.emplace_back(k, a.alpha[k]);
  for (std::size_t i = 0; i < tex.data.size(); ++i) {
    double value = assets.albedo_mean[i];
    const float* row = &assets.albedo_basis[i * kAppearanceDims];
    for (const auto& [k, c] : active) value += static_cast<double>(row[k]) * c;
    tex.data[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
  }
  return tex;
}

void sample_bilinear(const Image& img, double x, double y, std::span<double> out) {
  const double fx = std::clamp(x - 0.5, 0.0, static_cast<double>(img.width - 1));
  const double fy = std::clamp(y - 0.5, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double wx = fx - x0;
  const double wy = fy - y0;
  for (int c = 0; c < img.channels; ++c) {
    const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
    const double bottom = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
    out[c] = (1.0 - wy) * top + wy * bottom;
  }
}

std::array<double, 3> sample_texture(const TextureMap& tex, const Vec2& uv) {
  std::array<double, 3> out{};
  sample_bilinear(tex, uv.x() * tex.width, uv.y() * tex.height, out);
  return out;
}

std::array<double, kShBands> sh_basis(const Vec3& n) {
  if (!(std::abs(n.norm() - 1.0) <= 1e-6))
    throw ValidationError(fmt::format("SH basis needs a unit normal, got length {}", n.norm()));
  const double x = n.x(), y = n.y(), z = n.z();
  return {sh::kBand0,
          sh::kBand1 * y,
          sh::kBand1 * z,
          sh::kBand1 * x,
          sh::kBand2a * x * y,
          sh::kBand2a * y * z,
          sh::kBand2z * (3.0 * z * z - 1.0),
          sh::kBand2a * x * z,
          sh::kBand2d * (x * x - y * y)};
}

std::array<double, 3> shade_unclamped(const std::array<double, 3>& albedo, const Vec3& n,
                                      const LightingParams& light) {
  const auto basis = sh_basis(n);
  std::array<double, 3> out{};
  for (int ch = 0; ch < 3; ++ch) {
    double irradiance = 0.0;
    for (int k = 0; k < kShBands; ++k) irradiance += light.at(k, ch) * basis[k];
    out[ch] = albedo[ch] * irradiance;
  }
  return out;
}

std::array<double, 3> shade(const std::array<double, 3>& albedo, const Vec3& n,
                            const LightingParams& light) {
  auto out = shade_unclamped(albedo, n, light);
  for (double& c : out) c = std::clamp(c, 0.0, 1.0);
  return out;
}

}  // namespace facecond
