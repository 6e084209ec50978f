#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <string>
#include <vector>

#include "oneshot/error.hpp"
#include "oneshot/raster.hpp"

namespace oneshot {

/// Edge-pixel point set, one (x, y) row per point. x is the column, y the row.
template <typename Scalar>
using PointSet = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

/// The shape attribute of an image.
template <typename Scalar>
struct Outline {
  PointSet<Scalar> points;
  /// Bounding-box height (max y - min y + 1) of the raw pixel coordinates.
  Scalar source_height = 0;

  Eigen::Index size() const { return points.rows(); }
  bool empty() const { return points.rows() == 0; }
};

/// The color attribute: (Y', U, V).
template <typename Scalar>
using ColorVector = Eigen::Matrix<Scalar, 3, 1>;

using OutlineD = Outline<double>;
using ColorD = ColorVector<double>;

struct CannyParams {
  double gaussian_sigma = 1.4;
  double low_threshold = 50.0;
  double high_threshold = 150.0;
};

void validate(const CannyParams& params);

// ---------------------------------------------------------------------------
// Raster operations

/// Bilinear resize with pixel-center alignment. Channel count is preserved.
Raster resize(const Raster& img, int target_width, int target_height);

/// Luma of each pixel, round(0.299 R + 0.587 G + 0.114 B). Alpha is ignored.
Raster to_grayscale(const Raster& img);

/// Canny edge detector: Gaussian smoothing, Sobel gradients, non-maximum
/// suppression and double-threshold hysteresis on the gradient magnitude.
BinaryRaster canny_edges(const Raster& gray, const CannyParams& params);

/// sample > threshold maps to 255, everything else to 0.
BinaryRaster binarize(const Raster& img, int threshold);
BinaryRaster binarize(const BinaryRaster& img, int threshold);

/// Coordinates of every 255 sample in row-major scan order.
OutlineD extract_outline(const BinaryRaster& bin);

/// Pixels enclosed by the outline: not 4-connected to the border through
/// background, and not outline pixels themselves.
BinaryRaster interior_mask(const BinaryRaster& bin);

/// Outline pixels grown by `radius` in the Chebyshev metric.
BinaryRaster dilate(const BinaryRaster& bin, int radius);

/// Mean RGB over the mask, skipping fully transparent pixels, as YUV.
ColorD average_color(const Raster& img, const BinaryRaster& mask);

// ---------------------------------------------------------------------------
// Point-set and color math

template <typename Scalar>
Scalar median(std::vector<Scalar> values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "median of empty list");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const Scalar upper = values[mid];
  if (n % 2 == 1) return upper;
  const Scalar lower = *std::max_element(values.begin(), values.begin() + mid);
  return (lower + upper) / Scalar(2);
}

/// Shifts each coordinate column by its median.
template <typename Scalar>
Outline<Scalar> center_by_median(const Outline<Scalar>& o) {
  if (o.empty()) fail(ErrorKind::EmptyOutline, "cannot center an empty outline");
  Outline<Scalar> out = o;
  for (int axis = 0; axis < 2; ++axis) {
    const auto col = o.points.col(axis);
    const Scalar m = median(std::vector<Scalar>(col.begin(), col.end()));
    out.points.col(axis).array() -= m;
  }
  return out;
}

template <typename Scalar>
Scalar y_extent(const Outline<Scalar>& o) {
  if (o.empty()) fail(ErrorKind::EmptyOutline, "empty outline has no extent");
  return o.points.col(1).maxCoeff() - o.points.col(1).minCoeff();
}

template <typename Scalar>
Scalar x_extent(const Outline<Scalar>& o) {
  if (o.empty()) fail(ErrorKind::EmptyOutline, "empty outline has no extent");
  return o.points.col(0).maxCoeff() - o.points.col(0).minCoeff();
}

/// Uniformly scales both axes so the y-extent becomes `target_height`.
template <typename Scalar>
Outline<Scalar> scale_outline_to_height(const Outline<Scalar>& o, Scalar target_height) {
  if (!(target_height > Scalar(0)))
    fail(ErrorKind::InvalidArgument, "target height must be positive");
  const Scalar extent = y_extent(o);
  if (!(extent > Scalar(0)))
    fail(ErrorKind::DegenerateOutline, "outline has zero vertical extent");
  Outline<Scalar> out = o;
  if (extent != target_height) out.points *= target_height / extent;
  return out;
}

/// Scales the shorter of two outlines up to the taller one's y-extent.
template <typename Scalar>
void normalize_pair_heights(Outline<Scalar>& a, Outline<Scalar>& b) {
  const Scalar ha = y_extent(a);
  const Scalar hb = y_extent(b);
  if (ha < hb) {
    a = scale_outline_to_height(a, hb);
  } else if (hb < ha) {
    b = scale_outline_to_height(b, ha);
  } else if (!(ha > Scalar(0))) {
    fail(ErrorKind::DegenerateOutline, "outline has zero vertical extent");
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> rgb_to_yuv_matrix() {
  Eigen::Matrix<Scalar, 3, 3> m;
  m << Scalar(0.299), Scalar(0.587), Scalar(0.114),
       Scalar(-0.14713), Scalar(-0.28886), Scalar(0.436),
       Scalar(0.615), Scalar(-0.51499), Scalar(-0.10001);
  return m;
}

template <typename Derived>
ColorVector<typename Derived::Scalar> rgb_to_yuv(const Eigen::MatrixBase<Derived>& rgb) {
  using Scalar = typename Derived::Scalar;
  EIGEN_STATIC_ASSERT_VECTOR_SPECIFIC_SIZE(Derived, 3);
  return rgb_to_yuv_matrix<Scalar>() * rgb;
}

// ---------------------------------------------------------------------------
// Full attribute extraction

enum class HeightMode { Pairwise, Global };

std::string to_string(HeightMode mode);
HeightMode parse_height_mode(const std::string& text);

struct PreprocessConfig {
  int canvas = 256;
  CannyParams canny;
  int threshold = 127;
  int fallback_dilation = 3;
  HeightMode height_mode = HeightMode::Pairwise;
};

void validate(const PreprocessConfig& cfg);

/// Canonical text form of every field that affects extracted attributes.
std::string canonical_string(const PreprocessConfig& cfg);

/// Stable 64-bit FNV-1a digest of `canonical_string(cfg)`, as 16 hex digits.
std::string fingerprint(const PreprocessConfig& cfg);

struct ImageAttributes {
  OutlineD outline;  // centered, not yet height-normalized
  ColorD color;
};

/// Runs the whole pre-processing chain on a decoded image.
ImageAttributes extract_attributes(const Raster& img, const PreprocessConfig& cfg);

/// Scales every outline to the largest y-extent in the collection.
void normalize_heights_globally(std::vector<ImageAttributes>& attrs);

}  // namespace oneshot
