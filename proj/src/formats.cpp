#include "facecond/formats.hpp"

#include "bytes.hpp"
#include "facecond/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <cmath>

namespace facecond {

using nlohmann::json;
using detail::ByteReader;
using detail::ByteWriter;

namespace {

void write_header(ByteWriter& w, const json& header) {
  w.text(header.dump());
  w.u8('\n');
}

json read_header(ByteReader& r, const std::string& expected_format) {
  std::string line;
  while (true) {
    const std::uint8_t c = r.u8("JSON header line");
    if (c == '\n') break;
    line.push_back(static_cast<char>(c));
  }
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(fmt::format("malformed JSON header: {}", e.what()));
  }
  if (!header.is_object() || header.value("format", std::string{}) != expected_format)
    throw FormatError(fmt::format("header does not describe a '{}' file", expected_format));
  if (header.value("version", 0) != 1)
    throw FormatError(fmt::format("unsupported '{}' version", expected_format));
  return header;
}

int header_int(const json& h, const char* key, int lo, int hi) {
  if (!h.contains(key) || !h[key].is_number_integer())
    throw FormatError(fmt::format("header field '{}' missing or not an integer", key));
  const auto v = h[key].get<long long>();
  if (v < lo || v > hi)
    throw FormatError(fmt::format("header field '{}' = {} outside [{}, {}]", key, v, lo, hi));
  return static_cast<int>(v);
}

void write_floats(ByteWriter& w, std::span<const float> values) {
  for (float v : values) w.f32(v);
}

void read_floats(ByteReader& r, std::span<float> out, const char* what) {
  r.need(4 * out.size(), what);
  for (float& v : out) v = r.f32(what);
}

void expect_end(const ByteReader& r) {
  if (r.remaining() != 0) throw FormatError(fmt::format("{} trailing bytes", r.remaining()));
}

constexpr int kMaxSide = 1 << 14;

}  // namespace

std::vector<std::uint8_t> encode_stack(const ConditioningStack& stack) {
  ByteWriter w;
  json sizes = json::array();
  for (const Image& level : stack.pyramid) sizes.push_back(level.width);
  json names = json::array();
  for (const auto& n : kConditionChannelNames) names.push_back(n);
  write_header(w, {{"format", "cstk"},
                   {"version", 1},
                   {"resolution", stack.resolution()},
                   {"levels", stack.levels()},
                   {"channels", kConditionChannels},
                   {"channel_names", names},
                   {"level_sizes", sizes},
                   {"layout", "level,row,col,channel"},
                   {"dtype", "f32le"}});
  for (const Image& level : stack.pyramid) write_floats(w, level.data);
  return std::move(w.buffer());
}

ConditioningStack decode_stack(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const json h = read_header(r, "cstk");
  const int p = header_int(h, "resolution", 1, kMaxSide);
  const int levels = header_int(h, "levels", 1, 32);
  if (header_int(h, "channels", 1, 64) != kConditionChannels)
    throw FormatError("conditioning stack must have 6 channels");
  std::size_t floats = 0;
  for (int k = 0, side = p; k < levels; ++k, side /= 2)
    floats += static_cast<std::size_t>(side) * side * kConditionChannels;
  r.need(4 * floats, "stack payload");
  ConditioningStack stack;
  int side = p;
  for (int k = 0; k < levels; ++k) {
    if (side < 1) throw FormatError("too many pyramid levels for the resolution");
    Image level(side, side, kConditionChannels);
    read_floats(r, level.data, "stack payload");
    stack.pyramid.push_back(std::move(level));
    side /= 2;
  }
  expect_end(r);
  return stack;
}

std::vector<std::uint8_t> encode_image(const Image& img) {
  ByteWriter w;
  write_header(w, {{"format", "timg"},
                   {"version", 1},
                   {"height", img.height},
                   {"width", img.width},
                   {"channels", img.channels},
                   {"layout", "row,col,channel"},
                   {"dtype", "f32le"}});
  write_floats(w, img.data);
  return std::move(w.buffer());
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const json h = read_header(r, "timg");
  const int height = header_int(h, "height", 1, kMaxSide);
  const int width = header_int(h, "width", 1, kMaxSide);
  const int channels = header_int(h, "channels", 1, 64);
  r.need(4 * static_cast<std::size_t>(height) * width * channels, "image payload");
  Image img(height, width, channels);
  read_floats(r, img.data, "image payload");
  expect_end(r);
  return img;
}

std::vector<std::uint8_t> encode_partial_texture(const PartialTexture& tex) {
  ByteWriter w;
  write_header(w, {{"format", "ptex"},
                   {"version", 1},
                   {"size", tex.size()},
                   {"channels", 3},
                   {"layout", "row,col,channel then row,col mask"},
                   {"dtype", "f32le"},
                   {"mask_dtype", "u8"}});
  write_floats(w, tex.texels.data);
  w.bytes(tex.visible);
  return std::move(w.buffer());
}

PartialTexture decode_partial_texture(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const json h = read_header(r, "ptex");
  const int t = header_int(h, "size", 1, kMaxSide);
  if (header_int(h, "channels", 1, 64) != 3) throw FormatError("partial texture must be RGB");
  r.need(13 * static_cast<std::size_t>(t) * t, "texel payload");
  PartialTexture tex;
  tex.texels = Image(t, t, 3);
  read_floats(r, tex.texels.data, "texel payload");
  const auto mask = r.take(static_cast<std::size_t>(t) * t, "visibility mask");
  tex.visible.assign(mask.begin(), mask.end());
  for (auto& m : tex.visible)
    if (m > 1) throw FormatError("visibility mask entries must be 0 or 1");
  expect_end(r);
  return tex;
}

std::vector<std::uint8_t> encode_correspondences(const CorrespondenceMap& corr) {
  ByteWriter w;
  write_header(w, {{"format", "corr"},
                   {"version", 1},
                   {"size", corr.size},
                   {"image_resolution", corr.image_resolution},
                   {"coords", "pixels, pixel (row, col) centred at (col + 0.5, row + 0.5)"},
                   {"layout", "row,col,xy then row,col mask"},
                   {"dtype", "f32le"},
                   {"mask_dtype", "u8"}});
  write_floats(w, corr.img_xy);
  w.bytes(corr.visible);
  return std::move(w.buffer());
}

CorrespondenceMap decode_correspondences(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const json h = read_header(r, "corr");
  CorrespondenceMap corr;
  corr.size = header_int(h, "size", 1, kMaxSide);
  corr.image_resolution = header_int(h, "image_resolution", 1, kMaxSide);
  const std::size_t texels = static_cast<std::size_t>(corr.size) * corr.size;
  r.need(9 * texels, "coordinate payload");
  corr.img_xy.resize(2 * texels);
  read_floats(r, corr.img_xy, "coordinate payload");
  const auto mask = r.take(texels, "visibility mask");
  corr.visible.assign(mask.begin(), mask.end());
  for (auto& m : corr.visible)
    if (m > 1) throw FormatError("visibility mask entries must be 0 or 1");
  expect_end(r);
  return corr;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  return detail::read_file(path.string());
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  detail::write_file(path.string(), bytes);
}

namespace {

template <typename T, typename Decode>
T read_with(const std::filesystem::path& path, Decode decode) {
  const auto bytes = read_bytes(path);
  try {
    return decode(bytes);
  } catch (const FormatError& e) {
    throw FormatError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

}  // namespace

void write_stack(const ConditioningStack& s, const std::filesystem::path& p) {
  write_bytes(p, encode_stack(s));
}
ConditioningStack read_stack(const std::filesystem::path& p) {
  return read_with<ConditioningStack>(p, decode_stack);
}
void write_image(const Image& img, const std::filesystem::path& p) {
  write_bytes(p, encode_image(img));
}
Image read_image(const std::filesystem::path& p) { return read_with<Image>(p, decode_image); }
void write_partial_texture(const PartialTexture& t, const std::filesystem::path& p) {
  write_bytes(p, encode_partial_texture(t));
}
PartialTexture read_partial_texture(const std::filesystem::path& p) {
  return read_with<PartialTexture>(p, decode_partial_texture);
}
void write_correspondences(const CorrespondenceMap& c, const std::filesystem::path& p) {
  write_bytes(p, encode_correspondences(c));
}
CorrespondenceMap read_correspondences(const std::filesystem::path& p) {
  return read_with<CorrespondenceMap>(p, decode_correspondences);
}

void write_png(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3)
    throw ValidationError(fmt::format("PNG export needs 1 or 3 channels, got {}", img.channels));
  std::vector<png_byte> pixels(img.data.size());
  std::transform(img.data.begin(), img.data.end(), pixels.begin(), [](float v) {
    return static_cast<png_byte>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data(), 0, nullptr))
    throw IoError(fmt::format("cannot write PNG '{}': {}", path.string(), image.message));
}

Image read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!std::filesystem::exists(path))
    throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw FormatError(fmt::format("cannot read PNG '{}': {}", path.string(), image.message));
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr))
    throw FormatError(fmt::format("cannot decode PNG '{}': {}", path.string(), image.message));
  Image img(static_cast<int>(image.height), static_cast<int>(image.width), 3);
  std::transform(pixels.begin(), pixels.end(), img.data.begin(),
                 [](png_byte b) { return static_cast<float>(b) / 255.0f; });
  return img;
}

Image preview_stack(const ConditioningStack& stack, int level) {
  if (level < 0 || level >= stack.levels())
    throw ValidationError(fmt::format("stack has no level {}", level));
  const Image& src = stack.pyramid[level];
  Image out(src.height, 2 * src.width, 3);
  for (int row = 0; row < src.height; ++row)
    for (int col = 0; col < src.width; ++col)
      for (int c = 0; c < 3; ++c) {
        out.at(row, col, c) = src.at(row, col, c);
        out.at(row, src.width + col, c) = src.at(row, col, 3 + c);
      }
  return out;
}

Image preview_partial_texture(const PartialTexture& tex) { return tex.texels; }

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 computation failed");
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_bytes(path)); }

}  // namespace facecond
