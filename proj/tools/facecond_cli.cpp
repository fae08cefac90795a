// facecond: command-line front end for the head model, condition renderer,
// texture stealing and dataset factory.

#include "facecond/camera.hpp"
#include "facecond/dataset.hpp"
#include "facecond/error.hpp"
#include "facecond/formats.hpp"
#include "facecond/model.hpp"
#include "facecond/params.hpp"
#include "facecond/parallel.hpp"
#include "facecond/raster.hpp"
#include "facecond/texsteal.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace facecond;

namespace {

constexpr const char* kFormatsHelp = R"(
File formats (all multi-byte values little-endian; details in docs/formats.md):
  .fcnd  head model assets: "FCND", u32 version, then per field u32 rank,
         u32 dims, data (f32, or u32 for faces / eye_vertex_ids)
  .json  face parameters: flame.{beta[100],theta[6],psi[50]},
         appearance.alpha[50], lighting.sh[27], camera.{scale,tx,ty},
         style_id, image.resolution
  .cstk  conditioning stack: JSON header line, then f32 levels P, P/2, ...
         each (row, col, channel) with 6 channels (normals xyz, texture rgb)
  .timg  float image: JSON header line, then f32 (row, col, channel)
  .corr  texel correspondences: JSON header line, f32 (row, col, xy) image
         coordinates in pixels, then u8 visibility per texel
  .ptex  partial texture: JSON header line, f32 (row, col, rgb), u8 mask
  manifest.jsonl  dataset header line followed by one JSON record per line
Exit status: 0 success, 1 invalid input, 2 I/O failure.
)";

struct FramingFlags {
  std::optional<double> interocular;
  std::optional<double> center_x;
  std::optional<double> center_y;

  void add(CLI::App* cmd) {
    cmd->add_option("--interocular", interocular, "Eye distance in pixels (default 0.22*res)");
    cmd->add_option("--center-x", center_x, "Eye midpoint column in pixels (default 0.5*res)");
    cmd->add_option("--center-y", center_y, "Eye midpoint row in pixels (default 0.42*res)");
  }
  EyeFraming resolve(const ImageSpec& image) const {
    EyeFraming f = EyeFraming::defaults(image);
    if (interocular) f.interocular_px = *interocular;
    if (center_x) f.center_x = *center_x;
    if (center_y) f.center_y = *center_y;
    return f;
  }
};

Image read_any_image(const fs::path& path) {
  if (path.extension() == ".png") return read_png(path);
  return read_image(path);
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric head model conditioning engine"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);

  // gen-assets
  std::uint64_t seed = 7;
  int verts = 5023;
  int tex_res = 128;
  std::string out;
  auto* gen = app.add_subcommand("gen-assets", "Generate a synthetic head model asset file");
  gen->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen->add_option("--verts", verts, "Approximate vertex count (>= 100)")->capture_default_str();
  gen->add_option("--tex-res", tex_res, "Albedo texture side (power of two >= 32)")
      ->capture_default_str();
  gen->add_option("--out", out, "Output .fcnd file")->required();

  // sample-params
  std::string assets_path;
  int res = 64;
  std::int64_t style_id = 0;
  FramingFlags framing;
  auto* sample = app.add_subcommand("sample-params", "Sample face parameters");
  sample->add_option("--assets", assets_path, "Asset file")->required();
  sample->add_option("--seed", seed, "Random seed")->capture_default_str();
  sample->add_option("--res", res, "Image resolution")->capture_default_str();
  sample->add_option("--style-id", style_id, "Style id recorded in the parameters");
  sample->add_option("--out", out, "Output parameter JSON")->required();
  framing.add(sample);

  // render
  std::string params_path, png_path, corr_path, target_path;
  int levels = 0;
  int tex_size = kDefaultStolenTextureSize;
  int workers = default_workers();
  std::optional<int> res_override;
  auto* render = app.add_subcommand("render", "Render the conditioning stack for parameters");
  render->add_option("--params", params_path, "Parameter JSON")->required();
  render->add_option("--assets", assets_path, "Asset file")->required();
  render->add_option("--out", out, "Output .cstk file")->required();
  render->add_option("--png", png_path, "Optional preview PNG (normals | texture)");
  render->add_option("--levels", levels, "Pyramid levels (0 = down to 4x4)");
  render->add_option("--res", res_override, "Override the recorded image resolution");
  render->add_option("--corr", corr_path, "Also write texel correspondences (.corr)");
  render->add_option("--tex-size", tex_size, "Correspondence map side")->capture_default_str();
  render->add_option("--target", target_path, "Also write the synthetic target image (.timg)");
  render->add_option("--workers", workers, "Rasterizer threads");
  render->add_option("--seed", seed, "Accepted for uniformity; rendering is deterministic");

  // interpolate
  std::vector<std::string> batch_paths;
  std::string out_dir;
  auto* interp = app.add_subcommand("interpolate", "Randomly interpolate geometry within a batch");
  interp->add_option("--in", batch_paths, "Parameter JSON files (at least 2)")->required();
  interp->add_option("--seed", seed, "Random seed")->capture_default_str();
  interp->add_option("--out-dir", out_dir, "Directory for interpolated parameter files")
      ->required();

  // steal
  std::string image_path;
  auto* steal = app.add_subcommand("steal", "Project an image into UV space");
  steal->add_option("--image", image_path, "Image (.timg or .png)")->required();
  steal->add_option("--corr", corr_path, "Correspondence map (.corr)")->required();
  steal->add_option("--out", out, "Output partial texture (.ptex)")->required();
  steal->add_option("--png", png_path, "Optional preview PNG");
  steal->add_option("--seed", seed, "Accepted for uniformity; stealing is deterministic");

  // consistency
  std::string a_path, b_path;
  auto* consistency = app.add_subcommand("consistency", "Masked L2 between partial textures");
  consistency->add_option("--a", a_path, "First .ptex")->required();
  consistency->add_option("--b", b_path, "Second .ptex")->required();
  consistency->add_option("--seed", seed, "Accepted for uniformity");

  // dataset
  int count = 0;
  bool force = false, with_corr = false;
  std::uint64_t asset_seed = 7;
  auto* dataset = app.add_subcommand("dataset", "Generate a paired training dataset");
  dataset->add_option("--n", count, "Number of records")->required();
  dataset->add_option("--res", res, "Image resolution")->capture_default_str();
  dataset->add_option("--seed", seed, "Random seed")->capture_default_str();
  dataset->add_option("--out", out_dir, "Output directory")->required();
  dataset->add_option("--assets", assets_path, "Asset file (default: synthetic assets)");
  dataset->add_option("--asset-seed", asset_seed, "Seed for synthetic assets")
      ->capture_default_str();
  dataset->add_option("--verts", verts, "Vertex count for synthetic assets")->capture_default_str();
  dataset->add_option("--tex-res", tex_res, "Texture side for synthetic assets")
      ->capture_default_str();
  dataset->add_option("--levels", levels, "Pyramid levels (0 = down to 4x4)");
  dataset->add_flag("--force", force, "Overwrite a non-empty output directory");
  dataset->add_flag("--corr", with_corr, "Also write texel correspondence maps");
  dataset->add_option("--tex-size", tex_size, "Correspondence map side")->capture_default_str();
  dataset->add_option("--workers", workers, "Worker threads (output is independent of this)");
  framing.add(dataset);

  // preview
  std::string in_path;
  int level = 0;
  auto* preview = app.add_subcommand("preview", "Convert a .cstk/.ptex/.timg/.corr file to PNG");
  preview->add_option("--in", in_path, "Input file")->required();
  preview->add_option("--out", out, "Output PNG")->required();
  preview->add_option("--level", level, "Pyramid level for stacks");
  preview->add_option("--seed", seed, "Accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen) {
      save_assets(gen_synthetic_assets(seed, verts, tex_res), out);
    } else if (*sample) {
      const HeadModelAssets assets = load_assets(assets_path);
      const ImageSpec image{res};
      image.validate();
      FaceParams p = sample_params(seed, assets, image, framing.resolve(image));
      p.style_id = style_id;
      write_params(p, image, out);
    } else if (*render) {
      const HeadModelAssets assets = load_assets(assets_path);
      auto [params, image] = read_params(params_path);
      if (res_override) image.resolution = *res_override;
      image.validate();
      const Mesh mesh = evaluate(assets, params.flame);
      const TextureMap albedo = albedo_from_appearance(assets, params.appearance);
      RenderBuffers buffers =
          render_conditions(mesh, params.cam, image, albedo, params.lighting, workers);
      const ConditioningStack stack =
          conditioning_stack(buffers.normal_img, buffers.color_img,
                             levels > 0 ? levels : max_pyramid_levels(image.resolution));
      write_stack(stack, out);
      if (!png_path.empty()) write_png(preview_stack(stack), png_path);
      if (!target_path.empty()) write_image(synthesize_target(buffers, params), target_path);
      if (!corr_path.empty())
        write_correspondences(texel_correspondences(mesh, params.cam, image, tex_size), corr_path);
    } else if (*interp) {
      std::vector<FaceParams> batch;
      ImageSpec image;
      for (const auto& path : batch_paths) {
        auto [p, spec] = read_params(path);
        batch.push_back(p);
        image = spec;
      }
      const auto mixed = interpolate_params(batch, seed);
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) throw IoError(fmt::format("cannot create '{}'", out_dir));
      for (std::size_t i = 0; i < mixed.size(); ++i)
        write_params(mixed[i], image, fs::path(out_dir) / fmt::format("{:06d}.json", i));
    } else if (*steal) {
      const CorrespondenceMap corr = read_correspondences(corr_path);
      const PartialTexture tex = steal_texture(read_any_image(image_path), corr);
      write_partial_texture(tex, out);
      if (!png_path.empty()) write_png(preview_partial_texture(tex), png_path);
    } else if (*consistency) {
      const auto r = consistency_loss(read_partial_texture(a_path), read_partial_texture(b_path));
      fmt::print("loss {:.17g}\noverlap {}\n", r.loss, r.overlap);
    } else if (*dataset) {
      const HeadModelAssets assets = assets_path.empty()
                                         ? gen_synthetic_assets(asset_seed, verts, tex_res)
                                         : load_assets(assets_path);
      DatasetOptions opts;
      opts.count = count;
      opts.image = ImageSpec{res};
      opts.image.validate();
      opts.seed = seed;
      opts.levels = levels;
      opts.force = force;
      opts.correspondences = with_corr;
      opts.tex_size = tex_size;
      opts.framing = framing.resolve(opts.image);
      opts.workers = workers;
      const DatasetManifest m = make_dataset(assets, out_dir, opts);
      fmt::print("wrote {} records to {}\n", m.records.size(), out_dir);
    } else if (*preview) {
      const fs::path in(in_path);
      const std::string ext = in.extension().string();
      if (ext == ".cstk") {
        write_png(preview_stack(read_stack(in), level), out);
      } else if (ext == ".ptex") {
        write_png(preview_partial_texture(read_partial_texture(in)), out);
      } else if (ext == ".timg") {
        write_png(read_image(in), out);
      } else if (ext == ".corr") {
        const CorrespondenceMap corr = read_correspondences(in);
        Image mask(corr.size, corr.size, 1);
        for (std::size_t i = 0; i < corr.visible.size(); ++i) mask.data[i] = corr.visible[i];
        write_png(mask, out);
      } else {
        throw ValidationError(fmt::format("cannot preview '{}': unknown extension", in_path));
      }
    }
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
