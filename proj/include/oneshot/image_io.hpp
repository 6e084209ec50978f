#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "oneshot/imaging.hpp"
#include "oneshot/raster.hpp"

namespace oneshot {

enum class ImageFormat { Unknown, Png, Jpeg };

/// Identifies a format from its leading signature bytes.
ImageFormat sniff_format(std::span<const std::uint8_t> head);
ImageFormat sniff_format(const std::filesystem::path& path);

/// Decodes a PNG or JPEG file. PNGs keep their alpha channel (4 channels);
/// everything else comes back as 3-channel RGB.
Raster load_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG. Gray, RGB and RGBA rasters are supported.
void save_png(const std::filesystem::path& path, const Raster& img);

// Debug exports: one point per row (x,y) and one color per row (y,u,v).
void write_outline_csv(std::ostream& out, const OutlineD& outline);
void write_colors_csv(std::ostream& out, std::span<const ColorD> colors);

}  // namespace oneshot
