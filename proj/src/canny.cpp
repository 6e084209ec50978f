#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "oneshot/imaging.hpp"

namespace oneshot {

namespace {

using Image = Eigen::ArrayXXd;  // rows = y, cols = x

int kernel_radius(double sigma) {
  return std::max(1, static_cast<int>(std::lround(1.5 * sigma)));
}

Eigen::ArrayXd gaussian_kernel(double sigma) {
  const int r = kernel_radius(sigma);
  Eigen::ArrayXd k(2 * r + 1);
  for (int i = -r; i <= r; ++i) k(i + r) = std::exp(-(i * i) / (2.0 * sigma * sigma));
  return k / k.sum();
}

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Separable convolution with replicated borders.
Image smooth(const Image& src, const Eigen::ArrayXd& k) {
  const int r = static_cast<int>(k.size() / 2);
  const int rows = static_cast<int>(src.rows());
  const int cols = static_cast<int>(src.cols());
  Image tmp(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k(i + r) * src(y, clampi(x + i, 0, cols - 1));
      tmp(y, x) = acc;
    }
  Image out(rows, cols);
  for (int y = 0; y < rows; ++y)
    for (int x = 0; x < cols; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k(i + r) * tmp(clampi(y + i, 0, rows - 1), x);
      out(y, x) = acc;
    }
  return out;
}

}  // namespace

BinaryRaster canny_edges(const Raster& gray, const CannyParams& params) {
  validate(gray);
  if (gray.channels != 1) fail(ErrorKind::InvalidArgument, "canny_edges expects a single-channel raster");
  validate(params);
  const Eigen::ArrayXd kernel = gaussian_kernel(params.gaussian_sigma);
  if (gray.width < kernel.size() || gray.height < kernel.size())
    fail(ErrorKind::InvalidArgument, "raster is smaller than the smoothing kernel");

  const int w = gray.width;
  const int h = gray.height;
  Image src(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) src(y, x) = gray.at(x, y);
  const Image s = smooth(src, kernel);

  // Sobel gradients.
  Image gx(h, w), gy(h, w), mag(h, w);
  auto px = [&](int x, int y) { return s(clampi(y, 0, h - 1), clampi(x, 0, w - 1)); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      gx(y, x) = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                 (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      gy(y, x) = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                 (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      mag(y, x) = std::hypot(gx(y, x), gy(y, x));
    }

  // Non-maximum suppression across the quantized gradient direction. The
  // asymmetric comparison keeps exactly one pixel on a plateau of two.
  const double tan22 = std::tan(M_PI / 8.0);
  const double tan67 = std::tan(3.0 * M_PI / 8.0);
  auto m = [&](int x, int y) { return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : mag(y, x); };
  Image thin = Image::Zero(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = mag(y, x);
      if (v <= params.low_threshold) continue;
      const double ax = std::abs(gx(y, x));
      const double ay = std::abs(gy(y, x));
      double before, after;
      if (ay <= tan22 * ax) {
        before = m(x - 1, y);
        after = m(x + 1, y);
      } else if (ay >= tan67 * ax) {
        before = m(x, y - 1);
        after = m(x, y + 1);
      } else if ((gx(y, x) > 0) == (gy(y, x) > 0)) {
        before = m(x - 1, y - 1);
        after = m(x + 1, y + 1);
      } else {
        before = m(x + 1, y - 1);
        after = m(x - 1, y + 1);
      }
      if (v > before && v >= after) thin(y, x) = v;
    }

  // Hysteresis: weak pixels survive when 8-connected to a strong one.
  BinaryRaster out(w, h);
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (thin(y, x) > params.high_threshold && !out.on(x, y)) {
        out.set(x, y);
        stack.emplace_back(x, y);
      }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h || out.on(nx, ny)) continue;
        if (thin(ny, nx) > params.low_threshold) {
          out.set(nx, ny);
          stack.emplace_back(nx, ny);
        }
      }
  }
  return out;
}

}  // namespace oneshot
