#include "facecond/dataset.hpp"

#include "facecond/error.hpp"
#include "facecond/formats.hpp"
#include "facecond/parallel.hpp"
#include "facecond/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace facecond {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::array<float, 3> random_colour(CounterRng& rng, double lo, double hi) {
  return {static_cast<float>(rng.uniform(lo, hi)), static_cast<float>(rng.uniform(lo, hi)),
          static_cast<float>(rng.uniform(lo, hi))};
}

std::string record_path(const char* dir, std::int64_t id, const char* ext) {
  return fmt::format("{}/{:06d}.{}", dir, id, ext);
}

json record_to_json(const ManifestRecord& r) {
  json j = {{"record_id", r.record_id},
            {"style_id", r.style_id},
            {"params", r.params},
            {"params_sha256", r.params_sha256},
            {"conditioning", r.conditioning},
            {"conditioning_sha256", r.conditioning_sha256},
            {"target", r.target},
            {"target_sha256", r.target_sha256}};
  if (!r.correspondences.empty()) {
    j["correspondences"] = r.correspondences;
    j["correspondences_sha256"] = r.correspondences_sha256;
  }
  return j;
}

}  // namespace

Image synthesize_target(const RenderBuffers& buffers, const FaceParams& params) {
  const int p = buffers.resolution;
  CounterRng style(static_cast<std::uint64_t>(params.style_id) ^ 0x5354594C45ull);
  const auto bg_top = random_colour(style, 0.05, 0.95);
  const auto bg_bottom = random_colour(style, 0.05, 0.95);
  const double stripe_freq = style.uniform(0.5, 3.0);
  const double stripe_angle = style.uniform(0.0, 3.14159265358979);
  const double stripe_amp = style.uniform(0.0, 0.15);
  const auto hair = random_colour(style, 0.02, 0.6);
  const double hair_width = style.uniform(1.05, 1.35);
  const double hair_height = style.uniform(1.1, 1.45);
  const double hair_drop = style.uniform(-0.1, 0.5);
  const auto shirt = random_colour(style, 0.1, 0.9);
  const double shoulder_width = style.uniform(1.8, 2.6);

  // The head sits at the origin, so the camera translation is its image centre.
  const double cx = params.cam.tx;
  const double cy = params.cam.ty;
  const double radius = params.cam.scale * 0.1;

  Image out(p, p, 3);
  const double s = std::sin(stripe_angle), c = std::cos(stripe_angle);
  for (int row = 0; row < p; ++row)
    for (int col = 0; col < p; ++col) {
      const double x = col + 0.5, y = row + 0.5;
      std::array<float, 3> rgb;
      if (buffers.covered(row, col)) {
        for (int ch = 0; ch < 3; ++ch) out.at(row, col, ch) = buffers.color_img.at(row, col, ch);
        continue;
      }
      const double t = y / p;
      const double stripe =
          stripe_amp * std::sin(2.0 * 3.14159265358979 * stripe_freq * (c * x + s * y) / p * 4.0);
      for (int ch = 0; ch < 3; ++ch)
        rgb[ch] = static_cast<float>(
            std::clamp((1.0 - t) * bg_top[ch] + t * bg_bottom[ch] + stripe, 0.0, 1.0));

      const double sx = (x - cx) / (shoulder_width * radius);
      const double sy = (y - (cy + 2.1 * radius)) / radius;
      if (sx * sx + sy * sy <= 1.0) rgb = shirt;

      const double hx = (x - cx) / (hair_width * radius);
      const double hy = (y - (cy - 0.1 * radius)) / (hair_height * radius);
      if (hx * hx + hy * hy <= 1.0 && y < cy + hair_drop * radius) {
        const double strand = 0.05 * std::sin(0.9 * x + 0.3 * y);
        for (int ch = 0; ch < 3; ++ch)
          rgb[ch] = static_cast<float>(std::clamp(hair[ch] + strand, 0.0, 1.0));
      }
      for (int ch = 0; ch < 3; ++ch) out.at(row, col, ch) = rgb[ch];
    }
  return out;
}

RecordRender render_record(const HeadModelAssets& assets, const FaceParams& params,
                           const ImageSpec& image, int levels) {
  const Mesh mesh = evaluate(assets, params.flame);
  const TextureMap albedo = albedo_from_appearance(assets, params.appearance);
  RecordRender out;
  out.buffers = render_conditions(mesh, params.cam, image, albedo, params.lighting);
  out.stack = conditioning_stack(out.buffers.normal_img, out.buffers.color_img,
                                 levels > 0 ? levels : max_pyramid_levels(image.resolution));
  out.target = synthesize_target(out.buffers, params);
  return out;
}

std::uint64_t record_seed(std::uint64_t dataset_seed, std::int64_t record_id) {
  return CounterRng(dataset_seed).split(static_cast<std::uint64_t>(record_id))();
}

DatasetManifest make_dataset(const HeadModelAssets& assets, const fs::path& out_dir,
                             const DatasetOptions& options) {
  options.image.validate();
  if (options.count < 1)
    throw ValidationError(fmt::format("dataset size {} must be positive", options.count));
  const int levels =
      options.levels > 0 ? options.levels : max_pyramid_levels(options.image.resolution);
  if (levels > max_pyramid_levels(options.image.resolution))
    throw ValidationError(fmt::format("{} pyramid levels too many for resolution {}", levels,
                                      options.image.resolution));

  std::error_code ec;
  if (fs::exists(out_dir) && !fs::is_empty(out_dir)) {
    if (!options.force)
      throw ValidationError(
          fmt::format("output directory '{}' is not empty (use --force to overwrite)",
                      out_dir.string()));
    for (const char* entry : {kManifestName, "assets.fcnd", "params", "cond", "target", "corr"})
      fs::remove_all(out_dir / entry, ec);
  }
  for (const char* sub : {"params", "cond", "target"}) fs::create_directories(out_dir / sub, ec);
  if (options.correspondences) fs::create_directories(out_dir / "corr", ec);
  if (ec || !fs::is_directory(out_dir / "params"))
    throw IoError(fmt::format("cannot create output directory '{}'", out_dir.string()));

  const auto asset_bytes = serialize_assets(assets);
  write_bytes(out_dir / "assets.fcnd", asset_bytes);

  DatasetManifest manifest;
  manifest.seed = options.seed;
  manifest.asset_hash = sha256_hex(asset_bytes);
  manifest.assets = "assets.fcnd";
  manifest.resolution = options.image.resolution;
  manifest.levels = levels;
  manifest.tex_size = options.correspondences ? options.tex_size : 0;
  manifest.records.resize(options.count);

  parallel_for(static_cast<std::size_t>(options.count), options.workers, [&](std::size_t i) {
    const auto id = static_cast<std::int64_t>(i);
    FaceParams params =
        sample_params(record_seed(options.seed, id), assets, options.image, options.framing);
    params.style_id = id;
    const RecordRender render = render_record(assets, params, options.image, levels);

    ManifestRecord& rec = manifest.records[i];
    rec.record_id = id;
    rec.style_id = params.style_id;
    rec.params = record_path("params", id, "json");
    rec.conditioning = record_path("cond", id, "cstk");
    rec.target = record_path("target", id, "timg");

    const std::string params_text = params_to_json(params, options.image);
    const std::span params_bytes(reinterpret_cast<const std::uint8_t*>(params_text.data()),
                                 params_text.size());
    write_bytes(out_dir / rec.params, params_bytes);
    rec.params_sha256 = sha256_hex(params_bytes);

    const auto stack_bytes = encode_stack(render.stack);
    write_bytes(out_dir / rec.conditioning, stack_bytes);
    rec.conditioning_sha256 = sha256_hex(stack_bytes);

    const auto target_bytes = encode_image(render.target);
    write_bytes(out_dir / rec.target, target_bytes);
    rec.target_sha256 = sha256_hex(target_bytes);

    // Target and condition must agree on every face pixel.
    for (int row = 0; row < options.image.resolution; ++row)
      for (int col = 0; col < options.image.resolution; ++col)
        if (render.buffers.covered(row, col))
          for (int ch = 0; ch < 3; ++ch)
            if (render.target.at(row, col, ch) != render.stack.channels().at(row, col, 3 + ch))
              throw std::logic_error(fmt::format("record {}: target differs from condition", id));

    if (options.correspondences) {
      const Mesh mesh = evaluate(assets, params.flame);
      const auto corr = texel_correspondences(mesh, params.cam, options.image, options.tex_size);
      rec.correspondences = record_path("corr", id, "corr");
      const auto corr_bytes = encode_correspondences(corr);
      write_bytes(out_dir / rec.correspondences, corr_bytes);
      rec.correspondences_sha256 = sha256_hex(corr_bytes);
    }
  });

  const std::string text = manifest_to_jsonl(manifest);
  write_bytes(out_dir / kManifestName,
              std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  return manifest;
}

std::string manifest_to_jsonl(const DatasetManifest& m) {
  std::string out = json{{"format", "facecond-manifest"},
                         {"version", m.format_version},
                         {"seed", m.seed},
                         {"asset_hash", m.asset_hash},
                         {"assets", m.assets},
                         {"resolution", m.resolution},
                         {"levels", m.levels},
                         {"tex_size", m.tex_size},
                         {"count", m.records.size()}}
                        .dump();
  out += '\n';
  for (const ManifestRecord& r : m.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

DatasetManifest manifest_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  DatasetManifest m;
  try {
    if (!std::getline(in, line)) throw ValidationError("manifest: empty");
    const json h = json::parse(line);
    if (h.value("format", std::string{}) != "facecond-manifest")
      throw ValidationError("manifest: bad header line");
    m.format_version = h.at("version").get<int>();
    m.seed = h.at("seed").get<std::uint64_t>();
    m.asset_hash = h.at("asset_hash").get<std::string>();
    m.assets = h.at("assets").get<std::string>();
    m.resolution = h.at("resolution").get<int>();
    m.levels = h.at("levels").get<int>();
    m.tex_size = h.at("tex_size").get<int>();
    const auto count = h.at("count").get<std::size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      ManifestRecord r;
      r.record_id = j.at("record_id").get<std::int64_t>();
      r.style_id = j.at("style_id").get<std::int64_t>();
      r.params = j.at("params").get<std::string>();
      r.params_sha256 = j.at("params_sha256").get<std::string>();
      r.conditioning = j.at("conditioning").get<std::string>();
      r.conditioning_sha256 = j.at("conditioning_sha256").get<std::string>();
      r.target = j.at("target").get<std::string>();
      r.target_sha256 = j.at("target_sha256").get<std::string>();
      r.correspondences = j.value("correspondences", std::string{});
      r.correspondences_sha256 = j.value("correspondences_sha256", std::string{});
      m.records.push_back(std::move(r));
    }
    if (m.records.size() != count)
      throw ValidationError(fmt::format("manifest: header announces {} records, found {}", count,
                                        m.records.size()));
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("manifest: {}", e.what()));
  }
  return m;
}

DatasetManifest read_manifest(const fs::path& dir) {
  const auto bytes = read_bytes(dir / kManifestName);
  return manifest_from_jsonl(std::string(bytes.begin(), bytes.end()));
}

DatasetManifest validate_dataset(const fs::path& dir) {
  const DatasetManifest m = read_manifest(dir);
  auto check = [&](const std::string& rel, const std::string& hash) {
    if (!fs::exists(dir / rel)) throw ValidationError(fmt::format("dataset: missing file {}", rel));
    if (sha256_file(dir / rel) != hash)
      throw ValidationError(fmt::format("dataset: hash mismatch for {}", rel));
  };
  check(m.assets, m.asset_hash);
  std::set<std::int64_t> styles;
  std::set<std::int64_t> ids;
  for (const ManifestRecord& r : m.records) {
    if (!styles.insert(r.style_id).second)
      throw ValidationError(fmt::format("dataset: duplicate style_id {}", r.style_id));
    if (!ids.insert(r.record_id).second)
      throw ValidationError(fmt::format("dataset: duplicate record_id {}", r.record_id));
    check(r.params, r.params_sha256);
    check(r.conditioning, r.conditioning_sha256);
    check(r.target, r.target_sha256);
    if (!r.correspondences.empty()) check(r.correspondences, r.correspondences_sha256);
  }
  return m;
}

}  // namespace facecond
