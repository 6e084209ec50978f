#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oneshot/raster.hpp"

namespace oneshot::synthetic {

enum class Shape {
  Circle,
  Square,
  Triangle,
  Ellipse,
  Star,
  Cross,
  Crescent,
  Ring,
  Diamond,
};

std::string to_string(Shape shape);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

struct Placement {
  double scale = 1.0;  // multiplies the nominal shape size
  double dx = 0.0;     // pixels
  double dy = 0.0;
};

/// RGBA canvas: the shape filled with `color` at full opacity on a fully
/// transparent black background. Pixels are point-sampled at centers.
Raster render(Shape shape, Rgb color, const Placement& placement, int canvas = 256);

struct Category {
  std::string name;
  Shape shape;
  Rgb color;
};

Rgb hsv_to_rgb(double hue_degrees, double saturation, double value);

/// The nine shape categories, each with its own hue.
std::vector<Category> distinct_categories();

struct Options {
  int canvas = 256;
  int images_per_category = 3;
  double scale_jitter = 0.05;
  int translate_jitter = 3;
  std::uint64_t seed = 7;
};

struct Image {
  std::string category;
  std::string file_name;
  Raster raster;
};

/// Jittered renders of each category, deterministic in `options.seed`.
std::vector<Image> generate(const std::vector<Category>& categories, const Options& options);

/// Writes root/<category>/<file>.png plus root/groups.csv tagging every
/// category as `group`.
void write_dataset(const std::filesystem::path& root, const std::vector<Category>& categories,
                   const Options& options, const std::string& group = "distinct");

}  // namespace oneshot::synthetic
