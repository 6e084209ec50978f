#pragma once

#include <Eigen/Core>
#include <cmath>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "oneshot/error.hpp"
#include "oneshot/imaging.hpp"

namespace oneshot {

/// Shape distance (delta) and color distance (epsilon) between two images.
struct FeaturePair {
  double delta = 0.0;
  double epsilon = 0.0;
  bool scaled = false;
};

/// Per-feature ranges observed on the training pairs.
struct ScalerParams {
  double delta_min = 0.0;
  double delta_max = 0.0;
  double epsilon_min = 0.0;
  double epsilon_max = 0.0;

  friend bool operator==(const ScalerParams&, const ScalerParams&) = default;
};

void validate(const ScalerParams& s);

/// Mean over points of A of the distance to the nearest point of B.
template <typename Scalar>
Scalar directed_avg_distance(const PointSet<Scalar>& a, const PointSet<Scalar>& b) {
  if (a.rows() == 0 || b.rows() == 0)
    fail(ErrorKind::InvalidArgument, "directed distance needs non-empty point sets");
  Scalar total(0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Scalar ax = a(i, 0);
    const Scalar ay = a(i, 1);
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const Scalar dx = b(j, 0) - ax;
      const Scalar dy = b(j, 1) - ay;
      const Scalar d2 = dx * dx + dy * dy;
      if (d2 < best) best = d2;
    }
    total += std::sqrt(best);
  }
  return total / Scalar(a.rows());
}

template <typename Scalar>
Scalar directed_avg_distance(const Outline<Scalar>& a, const Outline<Scalar>& b) {
  return directed_avg_distance(a.points, b.points);
}

/// Modified Hausdorff Distance: the larger of the two directed averages.
template <typename Scalar>
Scalar modified_hausdorff(const PointSet<Scalar>& a, const PointSet<Scalar>& b) {
  const Scalar ab = directed_avg_distance(a, b);
  const Scalar ba = directed_avg_distance(b, a);
  return ab > ba ? ab : ba;
}

template <typename Scalar>
Scalar modified_hausdorff(const Outline<Scalar>& a, const Outline<Scalar>& b) {
  return modified_hausdorff(a.points, b.points);
}

/// Euclidean distance between two YUV vectors.
template <typename Scalar>
Scalar delta_e(const ColorVector<Scalar>& c1, const ColorVector<Scalar>& c2) {
  return (c2 - c1).norm();
}

/// Height-normalizes the pair, then measures shape and color distance.
FeaturePair measure_pair(const ImageAttributes& a, const ImageAttributes& b);

ScalerParams fit_scaler(std::span<const FeaturePair> pairs);

/// Min-max scaling into [0, 1] with clamping. A degenerate range maps to 0.
FeaturePair apply_scaler(const FeaturePair& p, const ScalerParams& s);

double scale_value(double x, double lo, double hi);

}  // namespace oneshot
