#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace facecond {

/// Row-major H×W×C float image. Pixel (row, col) covers the unit square whose
/// centre is at image-plane coordinate (col + 0.5, row + 0.5).
struct Image {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, int c, float fill = 0.0f)
      : height(h), width(w), channels(c),
        data(static_cast<std::size_t>(h) * w * c, fill) {}

  std::size_t index(int row, int col, int ch = 0) const {
    return (static_cast<std::size_t>(row) * width + col) * channels + ch;
  }
  float& at(int row, int col, int ch = 0) { return data[index(row, col, ch)]; }
  float at(int row, int col, int ch = 0) const { return data[index(row, col, ch)]; }

  std::span<float> pixel(int row, int col) {
    return {data.data() + index(row, col), static_cast<std::size_t>(channels)};
  }
  std::span<const float> pixel(int row, int col) const {
    return {data.data() + index(row, col), static_cast<std::size_t>(channels)};
  }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  friend bool operator==(const Image&, const Image&) = default;
};

/// Bilinear sample at continuous pixel coordinates (x, y) where pixel centres
/// sit at half-integers. Addressing is clamp-to-edge. Writes `channels` values.
void sample_bilinear(const Image& img, double x, double y, std::span<double> out);

}  // namespace facecond
