#pragma once

#include "facecond/params.hpp"
#include "facecond/raster.hpp"
#include "facecond/texsteal.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace facecond {

struct DatasetOptions {
  int count = 0;
  ImageSpec image;
  std::uint64_t seed = 0;
  int levels = 0;  // 0: full pyramid down to 4×4
  bool force = false;
  // Also emit texel correspondence maps of size `tex_size` per record.
  bool correspondences = false;
  int tex_size = kDefaultStolenTextureSize;
  std::optional<EyeFraming> framing;
  int workers = 1;
};

struct ManifestRecord {
  std::int64_t record_id = 0;
  std::int64_t style_id = 0;
  std::string params;
  std::string params_sha256;
  std::string conditioning;
  std::string conditioning_sha256;
  std::string target;
  std::string target_sha256;
  std::string correspondences;  // empty unless requested
  std::string correspondences_sha256;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

struct DatasetManifest {
  int format_version = 1;
  std::uint64_t seed = 0;
  std::string asset_hash;
  std::string assets;  // relative path of the asset copy
  int resolution = 0;
  int levels = 0;
  int tex_size = 0;
  std::vector<ManifestRecord> records;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

inline constexpr const char* kManifestName = "manifest.jsonl";

// Everything rendered for one parameter set.
struct RecordRender {
  RenderBuffers buffers;
  ConditioningStack stack;
  Image target;
};

// Synthetic "photo": the textured rendering inside the face mask, composited
// over a background, a hair band and shoulders whose shapes and colours are
// functions of style_id only.
Image synthesize_target(const RenderBuffers& buffers, const FaceParams& params);

RecordRender render_record(const HeadModelAssets& assets, const FaceParams& params,
                           const ImageSpec& image, int levels);

// Per-record sampling seed derived from the dataset seed.
std::uint64_t record_seed(std::uint64_t dataset_seed, std::int64_t record_id);

DatasetManifest make_dataset(const HeadModelAssets& assets, const std::filesystem::path& out_dir,
                             const DatasetOptions& options);

std::string manifest_to_jsonl(const DatasetManifest& manifest);
DatasetManifest manifest_from_jsonl(const std::string& text);
DatasetManifest read_manifest(const std::filesystem::path& dataset_dir);

// Checks that every file exists and matches its hash and that style ids are
// unique and paired 1:1 with records. Throws ValidationError otherwise.
DatasetManifest validate_dataset(const std::filesystem::path& dataset_dir);

}  // namespace facecond
