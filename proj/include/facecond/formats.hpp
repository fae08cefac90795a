#pragma once

#include "facecond/image.hpp"
#include "facecond/raster.hpp"
#include "facecond/texsteal.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace facecond {

// Binary tensor files: one JSON header line terminated by '\n', then raw
// little-endian payload. Layouts are documented in docs/formats.md.

std::vector<std::uint8_t> encode_stack(const ConditioningStack& stack);
ConditioningStack decode_stack(std::span<const std::uint8_t> bytes);
void write_stack(const ConditioningStack& stack, const std::filesystem::path& path);
ConditioningStack read_stack(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_image(const Image& img);
Image decode_image(std::span<const std::uint8_t> bytes);
void write_image(const Image& img, const std::filesystem::path& path);
Image read_image(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_partial_texture(const PartialTexture& tex);
PartialTexture decode_partial_texture(std::span<const std::uint8_t> bytes);
void write_partial_texture(const PartialTexture& tex, const std::filesystem::path& path);
PartialTexture read_partial_texture(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_correspondences(const CorrespondenceMap& corr);
CorrespondenceMap decode_correspondences(std::span<const std::uint8_t> bytes);
void write_correspondences(const CorrespondenceMap& corr, const std::filesystem::path& path);
CorrespondenceMap read_correspondences(const std::filesystem::path& path);

// 8-bit PNG with 1 or 3 channels; values are clamped to [0, 1] and rounded.
void write_png(const Image& img, const std::filesystem::path& path);
// Reads any PNG as RGB in [0, 1].
Image read_png(const std::filesystem::path& path);

// Side-by-side previews: normals | texture for a stack level, texels for a
// partial texture.
Image preview_stack(const ConditioningStack& stack, int level = 0);
Image preview_partial_texture(const PartialTexture& tex);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace facecond
