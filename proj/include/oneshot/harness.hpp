#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oneshot/classifier.hpp"
#include "oneshot/imaging.hpp"
#include "oneshot/similarity.hpp"

namespace oneshot {

enum class GroupTag { Distinct, Similar };

std::string to_string(GroupTag tag);
GroupTag parse_group_tag(const std::string& text);

struct DatasetCategory {
  std::string name;
  std::vector<std::filesystem::path> images;
};

struct Dataset {
  std::vector<DatasetCategory> categories;
  std::map<std::string, GroupTag> groups;
  std::vector<std::string> warnings;

  std::size_t image_count() const;
  const DatasetCategory* find(const std::string& name) const;
};

void validate(const Dataset& ds);

/// Reads root/<category>/<image>, sorted by name. Files that are not PNG or
/// JPEG are skipped with a warning. root/groups.csv (category,tag) is
/// optional.
Dataset ingest_dataset(const std::filesystem::path& root);

/// Attributes of every image, flattened in category-then-file order.
struct AttributeBank {
  std::vector<ImageAttributes> attrs;
  std::vector<std::size_t> category_of;     // image index -> category index
  std::vector<std::size_t> category_start;  // category index -> first image index

  std::size_t size() const { return attrs.size(); }
};

/// Decodes and pre-processes every image on `workers` threads. Output is
/// independent of the worker count.
AttributeBank extract_all(const Dataset& ds, const PreprocessConfig& cfg, int workers = 1);

/// Raw features for every unordered image pair (i < j), symmetric lookup.
class PairFeatureTable {
 public:
  PairFeatureTable(const AttributeBank& bank, int workers = 1);

  const FeaturePair& at(std::size_t i, std::size_t j) const;
  std::size_t size() const { return n_; }

 private:
  std::size_t offset(std::size_t i, std::size_t j) const;

  std::size_t n_;
  std::vector<FeaturePair> table_;
};

struct LabeledPair {
  std::size_t image_a = 0;
  std::size_t image_b = 0;
  FeaturePair features;
  int label = 0;
};

/// Positives: unordered pairs inside the target category. Negatives: every
/// target image against every other image.
std::vector<LabeledPair> build_training_pairs(const Dataset& ds, const std::string& target,
                                              const PairFeatureTable& features);

/// Every unordered pair in the dataset, labeled by category equality.
std::vector<LabeledPair> all_pairs(const Dataset& ds, const PairFeatureTable& features);

/// Ordered probe/exemplar arrangements under the three-images-per-category
/// protocol: 3P2 = 6 per category.
int count_comparisons(const Dataset& ds, int images_per_category = 3);

struct TrainedModel {
  VerificationModel model;
  TrainResult result;
  std::vector<LabeledPair> pairs;
};

TrainedModel train_verifier(const Dataset& ds, const std::string& target,
                            const PairFeatureTable& features, const TrainConfig& train_cfg,
                            const PreprocessConfig& pre_cfg);

struct EvaluationReport {
  std::vector<std::string> categories;
  Eigen::MatrixXi confusion;  // row = actual, column = predicted
  double overall_accuracy = 0.0;
  std::map<std::string, double> group_accuracy;
  int probe_count = 0;
  int comparison_count = 0;
};

/// Leave-one-out: each image is a probe against every category, with its
/// own category reduced to the remaining images.
EvaluationReport evaluate(const Dataset& ds, const PairFeatureTable& features,
                          const VerificationModel& model);

void write_report_csv(std::ostream& out, const EvaluationReport& report);
/// Raw features as delta,epsilon,label rows.
void write_pairs_csv(std::ostream& out, std::span<const LabeledPair> pairs);
std::vector<LabeledPair> read_pairs_csv(std::istream& in);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  int count_label1 = 0;
  int count_label0 = 0;
};

/// Histogram of w_delta * delta + w_epsilon * epsilon over scaled features.
std::vector<HistogramBin> export_histogram(std::span<const LabeledPair> pairs,
                                           const ScalerParams& scaler, double w_delta,
                                           double w_epsilon, int bins);
void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins);

struct SurfacePoint {
  double delta = 0.0;
  double epsilon = 0.0;
  double probability = 0.0;
};

/// Probability over a uniform grid on [0,1]^2, delta-major.
std::vector<SurfacePoint> export_surface(const Theta& theta, int grid_resolution);
void write_surface_csv(std::ostream& out, std::span<const SurfacePoint> surface);

}  // namespace oneshot
