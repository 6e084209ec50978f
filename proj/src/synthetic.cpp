#include "oneshot/synthetic.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include "oneshot/image_io.hpp"

namespace oneshot::synthetic {

namespace {

struct Vec2 {
  double x, y;
};

bool inside_polygon(const std::vector<Vec2>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > y) != (b.y > y) && x < (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x) in = !in;
  }
  return in;
}

std::vector<Vec2> star_polygon(double outer, double inner) {
  std::vector<Vec2> poly;
  for (int i = 0; i < 10; ++i) {
    const double r = i % 2 == 0 ? outer : inner;
    const double a = -M_PI / 2 + i * M_PI / 5;
    poly.push_back({r * std::cos(a), r * std::sin(a)});
  }
  return poly;
}

std::vector<Vec2> triangle_polygon(double r) {
  return {{0.0, -r}, {r * std::sqrt(3.0) / 2, r / 2}, {-r * std::sqrt(3.0) / 2, r / 2}};
}

// (x, y) relative to the shape center, in pixels; r is the nominal radius.
bool contains(Shape shape, double x, double y, double r) {
  const double d = std::hypot(x, y);
  switch (shape) {
    case Shape::Circle: return d <= r;
    case Shape::Square: return std::abs(x) <= 0.8 * r && std::abs(y) <= 0.8 * r;
    case Shape::Triangle: {
      static thread_local std::vector<Vec2> unit = triangle_polygon(1.0);
      return inside_polygon(unit, x / r, y / r);
    }
    case Shape::Ellipse: {
      const double ex = x / (1.2 * r);
      const double ey = y / (0.45 * r);
      return ex * ex + ey * ey <= 1.0;
    }
    case Shape::Star: {
      static thread_local std::vector<Vec2> unit = star_polygon(1.0, 0.45);
      return inside_polygon(unit, x / r, y / r);
    }
    case Shape::Cross:
      return (std::abs(x) <= 0.3 * r && std::abs(y) <= r) ||
             (std::abs(y) <= 0.3 * r && std::abs(x) <= r);
    case Shape::Crescent: return d <= r && std::hypot(x - 0.5 * r, y) > 0.9 * r;
    case Shape::Ring: return d <= r && d >= 0.55 * r;
    case Shape::Diamond: return std::abs(x) / (0.75 * r) + std::abs(y) / r <= 1.0;
  }
  return false;
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::Circle: return "circle";
    case Shape::Square: return "square";
    case Shape::Triangle: return "triangle";
    case Shape::Ellipse: return "ellipse";
    case Shape::Star: return "star";
    case Shape::Cross: return "cross";
    case Shape::Crescent: return "crescent";
    case Shape::Ring: return "ring";
    case Shape::Diamond: return "diamond";
  }
  return "unknown";
}

Raster render(Shape shape, Rgb color, const Placement& placement, int canvas) {
  if (canvas < 8) fail(ErrorKind::InvalidArgument, "synthetic canvas must be at least 8 pixels");
  Raster img(canvas, canvas, 4);
  const double r = 0.3 * canvas * placement.scale;
  const double cx = canvas / 2.0 + placement.dx;
  const double cy = canvas / 2.0 + placement.dy;
  for (int y = 0; y < canvas; ++y)
    for (int x = 0; x < canvas; ++x) {
      if (!contains(shape, x + 0.5 - cx, y + 0.5 - cy, r)) continue;
      img.at(x, y, 0) = color.r;
      img.at(x, y, 1) = color.g;
      img.at(x, y, 2) = color.b;
      img.at(x, y, 3) = 255;
    }
  return img;
}

Rgb hsv_to_rgb(double hue_degrees, double saturation, double value) {
  const double h = std::fmod(hue_degrees, 360.0) / 60.0;
  const double c = value * saturation;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  const double m = value - c;
  std::array<double, 3> rgb{};
  switch (static_cast<int>(h)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  auto u8 = [&](double v) { return static_cast<std::uint8_t>(std::lround(255.0 * (v + m))); };
  return {u8(rgb[0]), u8(rgb[1]), u8(rgb[2])};
}

std::vector<Category> distinct_categories() {
  const std::array<std::pair<const char*, Shape>, 9> shapes = {{
      {"circle", Shape::Circle},
      {"square", Shape::Square},
      {"triangle", Shape::Triangle},
      {"ellipse", Shape::Ellipse},
      {"star", Shape::Star},
      {"cross", Shape::Cross},
      {"crescent", Shape::Crescent},
      {"ring", Shape::Ring},
      {"diamond", Shape::Diamond},
  }};
  // Hues evenly spaced around the color wheel.
  std::vector<Category> out;
  for (std::size_t k = 0; k < shapes.size(); ++k)
    out.push_back({shapes[k].first, shapes[k].second,
                   hsv_to_rgb(360.0 * static_cast<double>(k) / shapes.size(), 0.75, 1.0)});
  return out;
}

std::vector<Image> generate(const std::vector<Category>& categories, const Options& options) {
  if (options.images_per_category < 1)
    fail(ErrorKind::InvalidArgument, "need at least one image per category");
  std::mt19937_64 gen(options.seed);
  std::vector<Image> images;
  for (const auto& cat : categories) {
    for (int k = 0; k < options.images_per_category; ++k) {
      Placement p;
      p.scale = 1.0 + options.scale_jitter * (2.0 * uniform01(gen) - 1.0);
      const int span = 2 * options.translate_jitter + 1;
      p.dx = std::floor(uniform01(gen) * span) - options.translate_jitter;
      p.dy = std::floor(uniform01(gen) * span) - options.translate_jitter;
      images.push_back({cat.name, cat.name + "_" + std::to_string(k + 1) + ".png",
                        render(cat.shape, cat.color, p, options.canvas)});
    }
  }
  return images;
}

void write_dataset(const std::filesystem::path& root, const std::vector<Category>& categories,
                   const Options& options, const std::string& group) {
  std::filesystem::create_directories(root);
  for (const auto& img : generate(categories, options)) {
    const auto dir = root / img.category;
    std::filesystem::create_directories(dir);
    save_png(dir / img.file_name, img.raster);
  }
  std::ofstream groups(root / "groups.csv");
  if (!groups) fail(ErrorKind::Io, "cannot write " + (root / "groups.csv").string());
  groups << "category,tag\n";
  for (const auto& cat : categories) groups << cat.name << ',' << group << '\n';
}

}  // namespace oneshot::synthetic
