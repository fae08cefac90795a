#include "facecond/params.hpp"

#include "bytes.hpp"
#include "facecond/error.hpp"
#include "facecond/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace facecond {

using nlohmann::json;

namespace {

template <std::size_t N>
json to_array(const std::array<double, N>& values) {
  return json(std::vector<double>(values.begin(), values.end()));
}

template <std::size_t N>
void from_array(const json& parent, const char* section, const char* key,
                std::array<double, N>& out) {
  if (!parent.contains(section) || !parent[section].contains(key))
    throw ValidationError(fmt::format("params: missing field `{}.{}`", section, key));
  const json& arr = parent[section][key];
  if (!arr.is_array() || arr.size() != N)
    throw ValidationError(fmt::format("params: field `{}.{}` must be an array of {} numbers",
                                      section, key, N));
  for (std::size_t i = 0; i < N; ++i) {
    if (!arr[i].is_number())
      throw ValidationError(fmt::format("params: `{}.{}[{}]` is not a number", section, key, i));
    out[i] = arr[i].get<double>();
    if (!std::isfinite(out[i]))
      throw ValidationError(fmt::format("params: `{}.{}[{}]` is not finite", section, key, i));
  }
}

double number(const json& parent, const char* section, const char* key) {
  if (!parent.contains(section) || !parent[section].contains(key) ||
      !parent[section][key].is_number())
    throw ValidationError(fmt::format("params: missing numeric field `{}.{}`", section, key));
  return parent[section][key].get<double>();
}

// Compact lighting descriptions: ambient level, key-light direction and
// strength, channel tint and a small polar (Y20) term.
struct LightRig {
  double ambient;
  double dir_x, dir_y, dir_z;
  double strength;
  double tint_r, tint_g, tint_b;
  double polar;
};

constexpr std::array<LightRig, kLightingBankSize> kLightRigs = {{
    {0.85, 0.0, 0.5, 0.87, 0.30, 1.00, 1.00, 1.00, 0.02},
    {0.80, 0.5, 0.4, 0.77, 0.35, 1.00, 0.97, 0.93, 0.03},
    {0.80, -0.5, 0.4, 0.77, 0.35, 1.00, 0.97, 0.93, 0.03},
    {0.90, 0.0, 0.8, 0.60, 0.25, 0.97, 0.98, 1.00, -0.02},
    {0.75, 0.7, 0.2, 0.68, 0.40, 1.00, 0.95, 0.90, 0.04},
    {0.75, -0.7, 0.2, 0.68, 0.40, 1.00, 0.95, 0.90, 0.04},
    {0.95, 0.0, 0.3, 0.95, 0.15, 1.00, 1.00, 1.00, 0.00},
    {0.82, 0.3, 0.6, 0.74, 0.30, 0.95, 0.97, 1.00, 0.02},
    {0.82, -0.3, 0.6, 0.74, 0.30, 0.95, 0.97, 1.00, 0.02},
    {0.78, 0.2, -0.2, 0.96, 0.35, 1.00, 0.98, 0.95, 0.03},
    {0.88, 0.6, 0.6, 0.53, 0.25, 1.00, 0.96, 0.92, -0.01},
    {0.88, -0.6, 0.6, 0.53, 0.25, 1.00, 0.96, 0.92, -0.01},
    {0.70, 0.4, 0.3, 0.87, 0.45, 1.00, 0.93, 0.88, 0.05},
    {0.70, -0.4, 0.3, 0.87, 0.45, 0.93, 0.96, 1.00, 0.05},
    {0.92, 0.0, 0.0, 1.00, 0.20, 1.00, 1.00, 0.98, 0.01},
    {0.85, 0.1, 0.9, 0.42, 0.30, 0.98, 0.98, 1.00, 0.02},
}};

LightingParams light_from_rig(const LightRig& rig) {
  const Vec3 dir = Vec3(rig.dir_x, rig.dir_y, rig.dir_z).normalized();
  const std::array<double, 3> tint{rig.tint_r, rig.tint_g, rig.tint_b};
  LightingParams l;
  for (int ch = 0; ch < 3; ++ch) {
    l.at(0, ch) = tint[ch] * rig.ambient / sh::kBand0;
    l.at(1, ch) = tint[ch] * rig.strength * dir.y() / sh::kBand1;
    l.at(2, ch) = tint[ch] * rig.strength * dir.z() / sh::kBand1;
    l.at(3, ch) = tint[ch] * rig.strength * dir.x() / sh::kBand1;
    l.at(6, ch) = tint[ch] * rig.polar / sh::kBand2z;
  }
  return l;
}

}  // namespace

std::array<double, kControlDims> control_vector(const FaceParams& p) {
  std::array<double, kControlDims> out{};
  auto it = out.begin();
  it = std::copy(p.flame.beta.begin(), p.flame.beta.end(), it);
  it = std::copy(p.flame.theta.begin(), p.flame.theta.end(), it);
  it = std::copy(p.flame.psi.begin(), p.flame.psi.end(), it);
  it = std::copy(p.appearance.alpha.begin(), p.appearance.alpha.end(), it);
  it = std::copy(p.lighting.sh.begin(), p.lighting.sh.end(), it);
  *it++ = p.cam.scale;
  *it++ = p.cam.tx;
  *it++ = p.cam.ty;
  return out;
}

std::string params_to_json(const FaceParams& p, const ImageSpec& image) {
  const json j = {
      {"format", "facecond-params"},
      {"version", 1},
      {"style_id", p.style_id},
      {"image", {{"resolution", image.resolution}}},
      {"flame",
       {{"beta", to_array(p.flame.beta)},
        {"theta", to_array(p.flame.theta)},
        {"psi", to_array(p.flame.psi)}}},
      {"appearance", {{"alpha", to_array(p.appearance.alpha)}}},
      {"lighting", {{"sh", to_array(p.lighting.sh)}, {"layout", "sh[3 * coefficient + channel]"}}},
      {"camera", {{"scale", p.cam.scale}, {"tx", p.cam.tx}, {"ty", p.cam.ty}}},
  };
  return j.dump(1) + "\n";
}

std::pair<FaceParams, ImageSpec> params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("params: malformed JSON: {}", e.what()));
  }
  if (!j.is_object() || j.value("format", std::string{}) != "facecond-params")
    throw ValidationError("params: not a facecond-params document");
  FaceParams p;
  from_array(j, "flame", "beta", p.flame.beta);
  from_array(j, "flame", "theta", p.flame.theta);
  from_array(j, "flame", "psi", p.flame.psi);
  from_array(j, "appearance", "alpha", p.appearance.alpha);
  from_array(j, "lighting", "sh", p.lighting.sh);
  p.cam.scale = number(j, "camera", "scale");
  p.cam.tx = number(j, "camera", "tx");
  p.cam.ty = number(j, "camera", "ty");
  p.cam.validate();
  if (!j.contains("style_id") || !j["style_id"].is_number_integer())
    throw ValidationError("params: missing integer field `style_id`");
  p.style_id = j["style_id"].get<std::int64_t>();
  ImageSpec image;
  image.resolution = static_cast<int>(number(j, "image", "resolution"));
  image.validate();
  return {p, image};
}

void write_params(const FaceParams& p, const ImageSpec& image, const std::filesystem::path& path) {
  const std::string text = params_to_json(p, image);
  detail::write_file(path.string(),
                     std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::pair<FaceParams, ImageSpec> read_params(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path.string());
  try {
    return params_from_json(std::string(bytes.begin(), bytes.end()));
  } catch (const ValidationError& e) {
    throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

const std::array<LightingParams, kLightingBankSize>& lighting_bank() {
  static const auto bank = [] {
    std::array<LightingParams, kLightingBankSize> b;
    for (int i = 0; i < kLightingBankSize; ++i) b[i] = light_from_rig(kLightRigs[i]);
    return b;
  }();
  return bank;
}

FaceParams sample_params(std::uint64_t seed, const HeadModelAssets& assets, const ImageSpec& image,
                         std::optional<EyeFraming> framing) {
  const CounterRng root(seed);
  FaceParams p;
  CounterRng shape_rng = root.split(1);
  CounterRng expr_rng = root.split(2);
  CounterRng app_rng = root.split(3);
  for (int k = 0; k < kSampledComponents; ++k) {
    p.flame.beta[k] = shape_rng.normal();
    p.flame.psi[k] = expr_rng.normal();
    p.appearance.alpha[k] = app_rng.normal();
  }
  CounterRng pose_rng = root.split(4);
  p.flame.theta[1] = pose_rng.uniform(-kMaxHeadYaw, kMaxHeadYaw);
  p.flame.theta[3] = pose_rng.uniform(0.0, kMaxJawOpening);

  CounterRng light_rng = root.split(5);
  p.lighting = lighting_bank()[light_rng.below(kLightingBankSize)];

  const auto eyes = evaluate_vertices(assets, p.flame, assets.eye_vertex_ids);
  p.cam = camera_from_eye_points(eyes[0], eyes[1], image,
                                 framing.value_or(EyeFraming::defaults(image)));
  return p;
}

FaceParams blend_geometry(const FaceParams& a, const FaceParams& b, double lambda) {
  FaceParams out = a;
  auto mix = [lambda](auto& dst, const auto& x, const auto& y) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = lambda * x[i] + (1.0 - lambda) * y[i];
  };
  mix(out.flame.beta, a.flame.beta, b.flame.beta);
  mix(out.flame.theta, a.flame.theta, b.flame.theta);
  mix(out.flame.psi, a.flame.psi, b.flame.psi);
  return out;
}

std::vector<FaceParams> interpolate_params(const std::vector<FaceParams>& batch,
                                           std::uint64_t seed) {
  if (batch.size() < 2)
    throw ValidationError(
        fmt::format("parameter interpolation needs a batch of at least 2, got {}", batch.size()));
  CounterRng rng(seed);
  std::vector<FaceParams> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    std::size_t j = rng.below(batch.size() - 1);
    if (j >= i) ++j;
    out.push_back(blend_geometry(batch[i], batch[j], rng.uniform()));
  }
  return out;
}

}  // namespace facecond
