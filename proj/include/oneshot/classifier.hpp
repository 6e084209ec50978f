#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oneshot/imaging.hpp"
#include "oneshot/similarity.hpp"

namespace oneshot {

/// Logistic coefficients, ordered (intercept, w_delta, w_epsilon).
using Theta = Eigen::Vector3d;

namespace theta_index {
inline constexpr Eigen::Index kIntercept = 0;
inline constexpr Eigen::Index kDelta = 1;
inline constexpr Eigen::Index kEpsilon = 2;
}  // namespace theta_index

struct TrainConfig {
  double learning_rate = 0.1;
  int max_iterations = 10000;
  double convergence_tol = 1e-8;
  double l2_lambda = 0.0;
  bool use_intercept = true;
  std::uint64_t seed = 0;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void validate(const TrainConfig& cfg);

/// Scaled features and {0,1} labels. `design` has one row per example:
/// (1, delta, epsilon).
class TrainingSet {
 public:
  TrainingSet(std::span<const FeaturePair> features, std::span<const int> labels);
  TrainingSet(Eigen::MatrixX2d features, Eigen::VectorXd labels);

  Eigen::Index size() const { return labels_.size(); }
  const Eigen::MatrixX3d& design() const { return design_; }
  const Eigen::VectorXd& labels() const { return labels_; }

  bool has_both_labels() const;

 private:
  void check() const;

  Eigen::MatrixX3d design_;
  Eigen::VectorXd labels_;
};

/// Numerically stable logistic function.
double sigmoid(double z);

double linear_score(const Theta& theta, const FeaturePair& p);

/// h_theta(x) = sigmoid(intercept + w_delta * delta + w_epsilon * epsilon).
double predict_probability(const Theta& theta, const FeaturePair& p);

/// Mean negative log-likelihood, plus (lambda / 2m) * |w|^2 with the
/// intercept left unpenalized.
double cost(const Theta& theta, const TrainingSet& ts, double l2_lambda = 0.0);

Theta gradient(const Theta& theta, const TrainingSet& ts, double l2_lambda = 0.0);

struct TrainResult {
  Theta theta = Theta::Zero();
  int iterations = 0;
  double final_cost = 0.0;
  std::vector<double> cost_history;  // J(theta_0), J(theta_1), ...
};

/// Batch gradient descent from theta = 0.
TrainResult train(const TrainingSet& ts, const TrainConfig& cfg);

/// Training accuracy at the 0.5 decision threshold.
double accuracy(const Theta& theta, const TrainingSet& ts);

struct VerificationModel {
  Theta theta = Theta::Zero();
  ScalerParams scaler;
  TrainConfig train_config;
  std::string preprocess_fingerprint;
};

void validate(const VerificationModel& model);

struct CategoryModel {
  std::string name;
  std::vector<ImageAttributes> exemplars;
};

/// Probability that `pair` (raw, unscaled) is a same-category match.
double verify(const FeaturePair& raw, const VerificationModel& model);

double score_category(const ImageAttributes& probe, const CategoryModel& cat,
                      const VerificationModel& model);

struct RankedCategory {
  std::string name;
  double probability = 0.0;
  double mean_delta = 0.0;
};

/// Raw features of a probe against one category's exemplars.
struct CategoryEvidence {
  std::string name;
  std::vector<FeaturePair> raw;
};

/// Scores each category and sorts: probability descending, then smaller mean
/// delta, then name.
std::vector<RankedCategory> rank_categories(std::span<const CategoryEvidence> evidence,
                                            const VerificationModel& model);

std::vector<RankedCategory> classify(const ImageAttributes& probe,
                                     std::span<const CategoryModel> categories,
                                     const VerificationModel& model);

}  // namespace oneshot
