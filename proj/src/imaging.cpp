#include "oneshot/imaging.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>

namespace oneshot {

namespace {

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

// Source coordinate of a destination pixel center, clamped to the valid range.
struct Tap {
  int i0, i1;
  double w1;
};

std::vector<Tap> bilinear_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / dst;
  for (int d = 0; d < dst; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    const int i0 = static_cast<int>(std::floor(s));
    const int i1 = std::min(i0 + 1, src - 1);
    taps[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
  }
  return taps;
}

void require_single_channel(const Raster& img, const char* op) {
  validate(img);
  if (img.channels != 1)
    fail(ErrorKind::InvalidArgument, std::string(op) + " expects a single-channel raster");
}

}  // namespace

void validate(const CannyParams& params) {
  if (!(params.gaussian_sigma > 0.0) || !std::isfinite(params.gaussian_sigma))
    fail(ErrorKind::InvalidArgument, "Canny sigma must be positive");
  if (!(params.low_threshold >= 0.0))
    fail(ErrorKind::InvalidArgument, "Canny low threshold must be non-negative");
  if (!(params.high_threshold >= params.low_threshold))
    fail(ErrorKind::InvalidArgument, "Canny high threshold must be at least the low threshold");
}

Raster resize(const Raster& img, int target_width, int target_height) {
  validate(img);
  if (target_width < 1 || target_height < 1)
    fail(ErrorKind::InvalidArgument, "resize target dimensions must be at least 1");
  if (target_width == img.width && target_height == img.height) return img;

  const auto xs = bilinear_taps(img.width, target_width);
  const auto ys = bilinear_taps(img.height, target_height);
  Raster out(target_width, target_height, img.channels);
  for (int y = 0; y < target_height; ++y) {
    const Tap& ty = ys[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_width; ++x) {
      const Tap& tx = xs[static_cast<std::size_t>(x)];
      for (int c = 0; c < img.channels; ++c) {
        const double top = img.at(tx.i0, ty.i0, c) * (1.0 - tx.w1) + img.at(tx.i1, ty.i0, c) * tx.w1;
        const double bottom = img.at(tx.i0, ty.i1, c) * (1.0 - tx.w1) + img.at(tx.i1, ty.i1, c) * tx.w1;
        out.at(x, y, c) = to_u8(top * (1.0 - ty.w1) + bottom * ty.w1);
      }
    }
  }
  return out;
}

Raster to_grayscale(const Raster& img) {
  validate(img);
  if (img.channels == 1) return img;
  Raster out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = to_u8(0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) + 0.114 * img.at(x, y, 2));
  return out;
}

BinaryRaster binarize(const Raster& img, int threshold) {
  require_single_channel(img, "binarize");
  BinaryRaster out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = img.data[i] > threshold ? BinaryRaster::kOn : 0;
  return out;
}

BinaryRaster binarize(const BinaryRaster& img, int threshold) {
  BinaryRaster out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    out.data[i] = img.data[i] > threshold ? BinaryRaster::kOn : 0;
  return out;
}

OutlineD extract_outline(const BinaryRaster& bin) {
  const std::size_t n = bin.count();
  if (n == 0) fail(ErrorKind::EmptyOutline, "no edge pixels found");
  OutlineD o;
  o.points.resize(static_cast<Eigen::Index>(n), 2);
  Eigen::Index k = 0;
  int min_y = std::numeric_limits<int>::max();
  int max_y = std::numeric_limits<int>::min();
  for (int y = 0; y < bin.height; ++y) {
    for (int x = 0; x < bin.width; ++x) {
      if (!bin.on(x, y)) continue;
      o.points(k, 0) = x;
      o.points(k, 1) = y;
      ++k;
      min_y = std::min(min_y, y);
      max_y = std::max(max_y, y);
    }
  }
  o.source_height = max_y - min_y + 1;
  return o;
}

BinaryRaster interior_mask(const BinaryRaster& bin) {
  const int w = bin.width;
  const int h = bin.height;
  std::vector<std::uint8_t> outside(bin.data.size(), 0);
  std::deque<std::pair<int, int>> queue;
  auto seed = [&](int x, int y) {
    const std::size_t i = bin.index(x, y);
    if (!outside[i] && !bin.on(x, y)) {
      outside[i] = 1;
      queue.emplace_back(x, y);
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  while (!queue.empty()) {
    const auto [x, y] = queue.front();
    queue.pop_front();
    if (x > 0) seed(x - 1, y);
    if (x + 1 < w) seed(x + 1, y);
    if (y > 0) seed(x, y - 1);
    if (y + 1 < h) seed(x, y + 1);
  }

  BinaryRaster mask(w, h);
  bool any = false;
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    if (!outside[i] && bin.data[i] != BinaryRaster::kOn) {
      mask.data[i] = BinaryRaster::kOn;
      any = true;
    }
  }
  if (!any) fail(ErrorKind::EmptyMask, "outline encloses no interior pixels");
  return mask;
}

BinaryRaster dilate(const BinaryRaster& bin, int radius) {
  if (radius < 0) fail(ErrorKind::InvalidArgument, "dilation radius must be non-negative");
  BinaryRaster out(bin.width, bin.height);
  for (int y = 0; y < bin.height; ++y) {
    for (int x = 0; x < bin.width; ++x) {
      if (!bin.on(x, y)) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(bin.height - 1, y + radius); ++yy)
        for (int xx = std::max(0, x - radius); xx <= std::min(bin.width - 1, x + radius); ++xx)
          out.set(xx, yy);
    }
  }
  return out;
}

ColorD average_color(const Raster& img, const BinaryRaster& mask) {
  validate(img);
  if (mask.width != img.width || mask.height != img.height)
    fail(ErrorKind::InvalidArgument, "mask and image dimensions differ");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  std::size_t n = 0;
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (!mask.on(x, y)) continue;
      if (img.has_alpha() && img.at(x, y, 3) == 0) continue;
      if (img.channels == 1) {
        sum.array() += img.at(x, y);
      } else {
        sum += Eigen::Vector3d(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
      }
      ++n;
    }
  }
  if (n == 0) fail(ErrorKind::NoSample, "mask covers no opaque pixels");
  return rgb_to_yuv(Eigen::Vector3d(sum / static_cast<double>(n)));
}

std::string to_string(HeightMode mode) {
  return mode == HeightMode::Global ? "global" : "pairwise";
}

HeightMode parse_height_mode(const std::string& text) {
  if (text == "pairwise") return HeightMode::Pairwise;
  if (text == "global") return HeightMode::Global;
  fail(ErrorKind::InvalidArgument, "height mode must be 'pairwise' or 'global', got '" + text + "'");
}

void validate(const PreprocessConfig& cfg) {
  if (cfg.canvas < 5) fail(ErrorKind::InvalidArgument, "canvas size must be at least 5");
  validate(cfg.canny);
  if (cfg.threshold < 0 || cfg.threshold > 255)
    fail(ErrorKind::InvalidArgument, "binarize threshold must be in 0..255");
  if (cfg.fallback_dilation < 0)
    fail(ErrorKind::InvalidArgument, "fallback dilation must be non-negative");
}

std::string canonical_string(const PreprocessConfig& cfg) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "canvas=%d;canny_sigma=%.17g;canny_low=%.17g;canny_high=%.17g;threshold=%d;"
                "fallback_dilation=%d;height_mode=%s",
                cfg.canvas, cfg.canny.gaussian_sigma, cfg.canny.low_threshold,
                cfg.canny.high_threshold, cfg.threshold, cfg.fallback_dilation,
                to_string(cfg.height_mode).c_str());
  return buf;
}

std::string fingerprint(const PreprocessConfig& cfg) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical_string(cfg)) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

ImageAttributes extract_attributes(const Raster& img, const PreprocessConfig& cfg) {
  validate(cfg);
  const Raster canvas = resize(img, cfg.canvas, cfg.canvas);
  const BinaryRaster edges = binarize(canny_edges(to_grayscale(canvas), cfg.canny), cfg.threshold);

  ImageAttributes attrs;
  attrs.outline = center_by_median(extract_outline(edges));
  try {
    attrs.color = average_color(canvas, interior_mask(edges));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::EmptyMask && e.kind() != ErrorKind::NoSample) throw;
    attrs.color = average_color(canvas, dilate(edges, cfg.fallback_dilation));
  }
  return attrs;
}

void normalize_heights_globally(std::vector<ImageAttributes>& attrs) {
  double tallest = 0.0;
  for (const auto& a : attrs) tallest = std::max(tallest, y_extent(a.outline));
  for (auto& a : attrs) a.outline = scale_outline_to_height(a.outline, tallest);
}

}  // namespace oneshot
