#include "oneshot/similarity.hpp"

#include <algorithm>

namespace oneshot {

void validate(const ScalerParams& s) {
  const bool finite = std::isfinite(s.delta_min) && std::isfinite(s.delta_max) &&
                      std::isfinite(s.epsilon_min) && std::isfinite(s.epsilon_max);
  if (!finite || s.delta_max < s.delta_min || s.epsilon_max < s.epsilon_min)
    fail(ErrorKind::InvalidArgument, "scaler ranges must be finite with max >= min");
}

FeaturePair measure_pair(const ImageAttributes& a, const ImageAttributes& b) {
  OutlineD oa = a.outline;
  OutlineD ob = b.outline;
  normalize_pair_heights(oa, ob);
  return {modified_hausdorff(oa, ob), delta_e(a.color, b.color), false};
}

ScalerParams fit_scaler(std::span<const FeaturePair> pairs) {
  if (pairs.empty()) fail(ErrorKind::InvalidArgument, "cannot fit a scaler on zero pairs");
  ScalerParams s{pairs[0].delta, pairs[0].delta, pairs[0].epsilon, pairs[0].epsilon};
  for (const auto& p : pairs) {
    s.delta_min = std::min(s.delta_min, p.delta);
    s.delta_max = std::max(s.delta_max, p.delta);
    s.epsilon_min = std::min(s.epsilon_min, p.epsilon);
    s.epsilon_max = std::max(s.epsilon_max, p.epsilon);
  }
  return s;
}

double scale_value(double x, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

FeaturePair apply_scaler(const FeaturePair& p, const ScalerParams& s) {
  if (p.scaled) fail(ErrorKind::InvalidArgument, "feature pair is already scaled");
  return {scale_value(p.delta, s.delta_min, s.delta_max),
          scale_value(p.epsilon, s.epsilon_min, s.epsilon_max), true};
}

}  // namespace oneshot
