#include "oneshot/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oneshot {

namespace {

constexpr double kLogClamp = 1e-15;
constexpr int kDivergenceWindow = 10;

double clamp_probability(double h) {
  return std::clamp(h, kLogClamp, 1.0 - kLogClamp);
}

Eigen::VectorXd probabilities(const Theta& theta, const TrainingSet& ts) {
  const Eigen::VectorXd z = ts.design() * theta;
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate))
    fail(ErrorKind::InvalidArgument, "learning rate must be positive");
  if (cfg.max_iterations < 1) fail(ErrorKind::InvalidArgument, "max iterations must be at least 1");
  if (!(cfg.convergence_tol > 0.0))
    fail(ErrorKind::InvalidArgument, "convergence tolerance must be positive");
  if (!(cfg.l2_lambda >= 0.0) || !std::isfinite(cfg.l2_lambda))
    fail(ErrorKind::InvalidArgument, "l2 lambda must be non-negative");
}

TrainingSet::TrainingSet(std::span<const FeaturePair> features, std::span<const int> labels) {
  if (features.size() != labels.size())
    fail(ErrorKind::InvalidArgument, "features and labels differ in length");
  const auto m = static_cast<Eigen::Index>(features.size());
  design_.resize(m, 3);
  labels_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& p = features[static_cast<std::size_t>(i)];
    if (!p.scaled) fail(ErrorKind::InvalidArgument, "training features must be scaled");
    design_.row(i) << 1.0, p.delta, p.epsilon;
    labels_(i) = labels[static_cast<std::size_t>(i)];
  }
  check();
}

TrainingSet::TrainingSet(Eigen::MatrixX2d features, Eigen::VectorXd labels) {
  if (features.rows() != labels.size())
    fail(ErrorKind::InvalidArgument, "features and labels differ in length");
  design_.resize(features.rows(), 3);
  design_.col(0).setOnes();
  design_.rightCols<2>() = features;
  labels_ = std::move(labels);
  check();
}

void TrainingSet::check() const {
  if (labels_.size() < 1) fail(ErrorKind::InvalidArgument, "training set is empty");
  if (!design_.allFinite()) fail(ErrorKind::InvalidArgument, "training features must be finite");
  for (Eigen::Index i = 0; i < labels_.size(); ++i)
    if (labels_(i) != 0.0 && labels_(i) != 1.0)
      fail(ErrorKind::InvalidArgument, "labels must be 0 or 1");
}

bool TrainingSet::has_both_labels() const {
  const double positives = labels_.sum();
  return positives > 0.0 && positives < static_cast<double>(labels_.size());
}

double sigmoid(double z) {
  double h;
  if (z >= 0.0) {
    h = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    h = e / (1.0 + e);
  }
  // Keep the result strictly inside (0, 1) once exp saturates.
  return std::clamp(h, std::numeric_limits<double>::denorm_min(), std::nextafter(1.0, 0.0));
}

double linear_score(const Theta& theta, const FeaturePair& p) {
  return theta(theta_index::kIntercept) + theta(theta_index::kDelta) * p.delta +
         theta(theta_index::kEpsilon) * p.epsilon;
}

double predict_probability(const Theta& theta, const FeaturePair& p) {
  return sigmoid(linear_score(theta, p));
}

double cost(const Theta& theta, const TrainingSet& ts, double l2_lambda) {
  const double m = static_cast<double>(ts.size());
  const Eigen::VectorXd h = probabilities(theta, ts).unaryExpr(&clamp_probability);
  const Eigen::VectorXd& y = ts.labels();
  const double log_likelihood =
      (y.array() * h.array().log() + (1.0 - y.array()) * (1.0 - h.array()).log()).sum();
  double j = -log_likelihood / m;
  if (l2_lambda > 0.0) j += l2_lambda / (2.0 * m) * theta.tail<2>().squaredNorm();
  return j;
}

Theta gradient(const Theta& theta, const TrainingSet& ts, double l2_lambda) {
  const double m = static_cast<double>(ts.size());
  const Eigen::VectorXd residual = probabilities(theta, ts) - ts.labels();
  Theta g = ts.design().transpose() * residual / m;
  if (l2_lambda > 0.0) g.tail<2>() += l2_lambda / m * theta.tail<2>();
  return g;
}

TrainResult train(const TrainingSet& ts, const TrainConfig& cfg) {
  validate(cfg);
  if (!ts.has_both_labels())
    fail(ErrorKind::DegenerateLabels, "training set needs both positive and negative labels");

  TrainResult result;
  Theta theta = Theta::Zero();
  double previous = cost(theta, ts, cfg.l2_lambda);
  result.cost_history.push_back(previous);
  Theta best = theta;
  double best_cost = previous;
  int rising = 0;

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Theta g = gradient(theta, ts, cfg.l2_lambda);
    if (!cfg.use_intercept) g(theta_index::kIntercept) = 0.0;
    theta -= cfg.learning_rate * g;
    const double current = cost(theta, ts, cfg.l2_lambda);
    result.cost_history.push_back(current);
    result.iterations = it;
    if (!std::isfinite(current) || !theta.allFinite())
      fail(ErrorKind::StepSize, "cost became non-finite; reduce the learning rate");
    rising = current > previous ? rising + 1 : 0;
    if (rising >= kDivergenceWindow)
      fail(ErrorKind::StepSize, "cost increased for 10 consecutive steps; reduce the learning rate");
    if (current <= best_cost) {
      best = theta;
      best_cost = current;
    }
    const bool converged = std::abs(current - previous) < cfg.convergence_tol;
    previous = current;
    if (converged) break;
  }
  result.theta = best;
  result.final_cost = best_cost;
  return result;
}

double accuracy(const Theta& theta, const TrainingSet& ts) {
  const Eigen::VectorXd h = probabilities(theta, ts);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < ts.size(); ++i)
    correct += (h(i) >= 0.5 ? 1.0 : 0.0) == ts.labels()(i);
  return static_cast<double>(correct) / static_cast<double>(ts.size());
}

void validate(const VerificationModel& model) {
  if (!model.theta.allFinite()) fail(ErrorKind::InvalidArgument, "model coefficients must be finite");
  validate(model.scaler);
  validate(model.train_config);
  if (model.preprocess_fingerprint.empty())
    fail(ErrorKind::InvalidArgument, "model has no preprocessing fingerprint");
}

double verify(const FeaturePair& raw, const VerificationModel& model) {
  return predict_probability(model.theta, apply_scaler(raw, model.scaler));
}

double score_category(const ImageAttributes& probe, const CategoryModel& cat,
                      const VerificationModel& model) {
  if (cat.exemplars.empty())
    fail(ErrorKind::InvalidArgument, "category '" + cat.name + "' has no exemplars");
  double total = 0.0;
  for (const auto& ex : cat.exemplars) total += verify(measure_pair(probe, ex), model);
  return total / static_cast<double>(cat.exemplars.size());
}

std::vector<RankedCategory> rank_categories(std::span<const CategoryEvidence> evidence,
                                            const VerificationModel& model) {
  if (evidence.empty()) fail(ErrorKind::InvalidArgument, "no categories to rank");
  std::vector<RankedCategory> ranked;
  ranked.reserve(evidence.size());
  for (const auto& ev : evidence) {
    if (ev.raw.empty())
      fail(ErrorKind::InvalidArgument, "category '" + ev.name + "' has no exemplars");
    double prob = 0.0;
    double delta = 0.0;
    for (const auto& p : ev.raw) {
      prob += verify(p, model);
      delta += p.delta;
    }
    const double n = static_cast<double>(ev.raw.size());
    ranked.push_back({ev.name, prob / n, delta / n});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedCategory& a, const RankedCategory& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    if (a.mean_delta != b.mean_delta) return a.mean_delta < b.mean_delta;
    return a.name < b.name;
  });
  return ranked;
}

std::vector<RankedCategory> classify(const ImageAttributes& probe,
                                     std::span<const CategoryModel> categories,
                                     const VerificationModel& model) {
  if (categories.empty()) fail(ErrorKind::InvalidArgument, "no categories to classify against");
  std::vector<CategoryEvidence> evidence;
  evidence.reserve(categories.size());
  for (const auto& cat : categories) {
    if (cat.exemplars.empty())
      fail(ErrorKind::InvalidArgument, "category '" + cat.name + "' has no exemplars");
    CategoryEvidence ev{cat.name, {}};
    for (const auto& ex : cat.exemplars) ev.raw.push_back(measure_pair(probe, ex));
    evidence.push_back(std::move(ev));
  }
  return rank_categories(evidence, model);
}

}  // namespace oneshot
