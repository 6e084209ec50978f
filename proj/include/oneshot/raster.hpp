#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "oneshot/error.hpp"

namespace oneshot {

/// Interleaved 8-bit image, row-major. Channels: 1 (gray), 3 (RGB) or 4 (RGBA).
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  Raster() = default;
  Raster(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

  bool has_alpha() const { return channels == 4; }

  friend bool operator==(const Raster&, const Raster&) = default;
};

/// Single-channel raster whose samples are exactly 0 or 255.
struct BinaryRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  static constexpr std::uint8_t kOn = 255;

  BinaryRaster() = default;
  BinaryRaster(int w, int h)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  bool on(int x, int y) const { return data[index(x, y)] == kOn; }
  void set(int x, int y, bool value = true) { data[index(x, y)] = value ? kOn : 0; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : data) n += (v == kOn);
    return n;
  }

  friend bool operator==(const BinaryRaster&, const BinaryRaster&) = default;
};

// Throws InvalidArgument when dimensions or buffer sizes are inconsistent.
void validate(const Raster& img);
void validate(const BinaryRaster& bin);

}  // namespace oneshot
