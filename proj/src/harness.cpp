#include "oneshot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "oneshot/image_io.hpp"

namespace oneshot {

namespace fs = std::filesystem;

namespace {

// Runs fn(i) for i in [0, count) on up to `workers` threads. When several
// calls throw, the exception from the lowest index wins so failures are
// reported identically for any worker count.
template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn fn) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;
  auto run = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(run);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  return fields;
}

void read_groups(const fs::path& file, Dataset& ds) {
  std::ifstream in(file);
  if (!in) fail(ErrorKind::Ingestion, "cannot read " + file.string());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2)
      fail(ErrorKind::Ingestion, file.string() + ":" + std::to_string(line_no) +
                                     ": expected 'category,tag'");
    if (line_no == 1 && fields[0] == "category") continue;
    GroupTag tag;
    try {
      tag = parse_group_tag(fields[1]);
    } catch (const Error& e) {
      fail(ErrorKind::Ingestion, file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!ds.find(fields[0])) {
      ds.warnings.push_back("groups.csv names unknown category '" + fields[0] + "'");
      continue;
    }
    ds.groups[fields[0]] = tag;
  }
}

}  // namespace

std::string to_string(GroupTag tag) { return tag == GroupTag::Distinct ? "distinct" : "similar"; }

GroupTag parse_group_tag(const std::string& text) {
  if (text == "distinct") return GroupTag::Distinct;
  if (text == "similar") return GroupTag::Similar;
  fail(ErrorKind::InvalidArgument, "group tag must be 'distinct' or 'similar', got '" + text + "'");
}

std::size_t Dataset::image_count() const {
  std::size_t n = 0;
  for (const auto& c : categories) n += c.images.size();
  return n;
}

const DatasetCategory* Dataset::find(const std::string& name) const {
  for (const auto& c : categories)
    if (c.name == name) return &c;
  return nullptr;
}

void validate(const Dataset& ds) {
  if (ds.categories.empty()) fail(ErrorKind::Ingestion, "dataset has no categories");
  std::set<std::string> names;
  for (const auto& c : ds.categories) {
    if (!names.insert(c.name).second)
      fail(ErrorKind::Ingestion, "duplicate category '" + c.name + "'");
    if (c.images.empty()) fail(ErrorKind::Ingestion, "category '" + c.name + "' has no images");
  }
}

Dataset ingest_dataset(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    fail(ErrorKind::Ingestion, "dataset root is not a directory: " + root.string());

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) fail(ErrorKind::Ingestion, "no category directories under " + root.string());

  Dataset ds;
  for (const auto& dir : dirs) {
    DatasetCategory cat{dir.filename().string(), {}};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      if (sniff_format(f) == ImageFormat::Unknown) {
        ds.warnings.push_back("skipping non-image file " + f.string());
        continue;
      }
      cat.images.push_back(f);
    }
    if (cat.images.empty())
      fail(ErrorKind::Ingestion, "category '" + cat.name + "' has no readable images");
    ds.categories.push_back(std::move(cat));
  }
  const fs::path groups = root / "groups.csv";
  if (fs::is_regular_file(groups)) read_groups(groups, ds);
  validate(ds);
  return ds;
}

AttributeBank extract_all(const Dataset& ds, const PreprocessConfig& cfg, int workers) {
  validate(ds);
  validate(cfg);
  AttributeBank bank;
  std::vector<const fs::path*> paths;
  for (std::size_t c = 0; c < ds.categories.size(); ++c) {
    bank.category_start.push_back(paths.size());
    for (const auto& p : ds.categories[c].images) {
      paths.push_back(&p);
      bank.category_of.push_back(c);
    }
  }
  bank.attrs.resize(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) {
    try {
      bank.attrs[i] = extract_attributes(load_image(*paths[i]), cfg);
    } catch (const Error& e) {
      const std::string where = paths[i]->string();
      if (std::string_view(e.what()).find(where) != std::string_view::npos) throw;
      throw Error(e.kind(), where + ": " + e.what());
    }
  });
  if (cfg.height_mode == HeightMode::Global) normalize_heights_globally(bank.attrs);
  return bank;
}

PairFeatureTable::PairFeatureTable(const AttributeBank& bank, int workers) : n_(bank.size()) {
  table_.resize(n_ * (n_ > 0 ? n_ - 1 : 0) / 2);
  std::vector<std::pair<std::size_t, std::size_t>> index;
  index.reserve(table_.size());
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) index.emplace_back(i, j);
  parallel_for(index.size(), workers, [&](std::size_t k) {
    const auto [i, j] = index[k];
    table_[k] = measure_pair(bank.attrs[i], bank.attrs[j]);
  });
}

std::size_t PairFeatureTable::offset(std::size_t i, std::size_t j) const {
  return i * n_ - i * (i + 1) / 2 + (j - i - 1);
}

const FeaturePair& PairFeatureTable::at(std::size_t i, std::size_t j) const {
  if (i == j || i >= n_ || j >= n_) fail(ErrorKind::InvalidArgument, "invalid image pair index");
  return i < j ? table_[offset(i, j)] : table_[offset(j, i)];
}

namespace {

std::size_t category_index(const Dataset& ds, const std::string& name) {
  for (std::size_t c = 0; c < ds.categories.size(); ++c)
    if (ds.categories[c].name == name) return c;
  fail(ErrorKind::UnknownCategory, "unknown category '" + name + "'");
}

// First flat image index of each category, in dataset order.
std::vector<std::size_t> starts(const Dataset& ds) {
  std::vector<std::size_t> out;
  std::size_t n = 0;
  for (const auto& c : ds.categories) {
    out.push_back(n);
    n += c.images.size();
  }
  out.push_back(n);
  return out;
}

}  // namespace

std::vector<LabeledPair> build_training_pairs(const Dataset& ds, const std::string& target,
                                              const PairFeatureTable& features) {
  const std::size_t t = category_index(ds, target);
  const auto start = starts(ds);
  if (features.size() != start.back())
    fail(ErrorKind::InvalidArgument, "feature table does not match the dataset");
  const std::size_t t_begin = start[t];
  const std::size_t t_end = start[t + 1];
  if (t_end - t_begin < 2)
    fail(ErrorKind::Protocol, "target category '" + target + "' needs at least 2 images to form positive pairs");

  std::vector<LabeledPair> pairs;
  for (std::size_t i = t_begin; i < t_end; ++i)
    for (std::size_t j = i + 1; j < t_end; ++j) pairs.push_back({i, j, features.at(i, j), 1});
  for (std::size_t i = t_begin; i < t_end; ++i)
    for (std::size_t j = 0; j < start.back(); ++j)
      if (j < t_begin || j >= t_end) pairs.push_back({i, j, features.at(i, j), 0});
  return pairs;
}

std::vector<LabeledPair> all_pairs(const Dataset& ds, const PairFeatureTable& features) {
  const auto start = starts(ds);
  if (features.size() != start.back())
    fail(ErrorKind::InvalidArgument, "feature table does not match the dataset");
  std::vector<std::size_t> category_of;
  for (std::size_t c = 0; c < ds.categories.size(); ++c)
    category_of.insert(category_of.end(), ds.categories[c].images.size(), c);
  std::vector<LabeledPair> pairs;
  for (std::size_t i = 0; i < features.size(); ++i)
    for (std::size_t j = i + 1; j < features.size(); ++j)
      pairs.push_back({i, j, features.at(i, j), category_of[i] == category_of[j] ? 1 : 0});
  return pairs;
}

int count_comparisons(const Dataset& ds, int images_per_category) {
  if (images_per_category < 2)
    fail(ErrorKind::InvalidArgument, "protocol needs at least 2 images per category");
  if (ds.categories.empty()) fail(ErrorKind::Protocol, "dataset has no categories");
  for (const auto& c : ds.categories)
    if (static_cast<int>(c.images.size()) != images_per_category)
      fail(ErrorKind::Protocol, "category '" + c.name + "' has " + std::to_string(c.images.size()) +
                                    " images; the protocol needs exactly " +
                                    std::to_string(images_per_category));
  const int arrangements = images_per_category * (images_per_category - 1);
  return arrangements * static_cast<int>(ds.categories.size());
}

TrainedModel train_verifier(const Dataset& ds, const std::string& target,
                            const PairFeatureTable& features, const TrainConfig& train_cfg,
                            const PreprocessConfig& pre_cfg) {
  validate(train_cfg);
  TrainedModel out;
  out.pairs = build_training_pairs(ds, target, features);
  std::vector<FeaturePair> raw;
  raw.reserve(out.pairs.size());
  for (const auto& p : out.pairs) raw.push_back(p.features);
  const ScalerParams scaler = fit_scaler(raw);

  std::vector<FeaturePair> scaled;
  std::vector<int> labels;
  for (const auto& p : out.pairs) {
    scaled.push_back(apply_scaler(p.features, scaler));
    labels.push_back(p.label);
  }
  out.result = train(TrainingSet(scaled, labels), train_cfg);
  out.model = {out.result.theta, scaler, train_cfg, fingerprint(pre_cfg)};
  return out;
}

EvaluationReport evaluate(const Dataset& ds, const PairFeatureTable& features,
                          const VerificationModel& model) {
  validate(ds);
  validate(model);
  const auto start = starts(ds);
  if (features.size() != start.back())
    fail(ErrorKind::InvalidArgument, "feature table does not match the dataset");
  for (const auto& c : ds.categories)
    if (c.images.size() < 2)
      fail(ErrorKind::Protocol, "category '" + c.name + "' has a single image; leave-one-out needs at least 2");

  const std::size_t k = ds.categories.size();
  EvaluationReport report;
  for (const auto& c : ds.categories) report.categories.push_back(c.name);
  report.confusion = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));

  std::map<std::string, std::pair<int, int>> group_counts;  // tag -> (correct, total)
  for (std::size_t actual = 0; actual < k; ++actual) {
    for (std::size_t probe = start[actual]; probe < start[actual + 1]; ++probe) {
      std::vector<CategoryEvidence> evidence;
      evidence.reserve(k);
      for (std::size_t c = 0; c < k; ++c) {
        CategoryEvidence ev{ds.categories[c].name, {}};
        for (std::size_t ex = start[c]; ex < start[c + 1]; ++ex)
          if (ex != probe) ev.raw.push_back(features.at(probe, ex));
        evidence.push_back(std::move(ev));
      }
      const auto ranked = rank_categories(evidence, model);
      const std::size_t predicted = category_index(ds, ranked.front().name);
      report.confusion(static_cast<Eigen::Index>(actual), static_cast<Eigen::Index>(predicted)) += 1;
      ++report.probe_count;
      const auto tag = ds.groups.find(ds.categories[actual].name);
      if (tag != ds.groups.end()) {
        auto& [correct, total] = group_counts[to_string(tag->second)];
        correct += predicted == actual;
        ++total;
      }
    }
    const int n = static_cast<int>(ds.categories[actual].images.size());
    report.comparison_count += n * (n - 1);
  }
  report.overall_accuracy =
      static_cast<double>(report.confusion.trace()) / static_cast<double>(report.probe_count);
  for (const auto& [tag, counts] : group_counts)
    report.group_accuracy[tag] = static_cast<double>(counts.first) / counts.second;
  return report;
}

void write_report_csv(std::ostream& out, const EvaluationReport& report) {
  out << "section,row,column,value\n";
  const auto k = static_cast<Eigen::Index>(report.categories.size());
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index p = 0; p < k; ++p)
      out << "confusion," << csv_field(report.categories[static_cast<std::size_t>(a)]) << ','
          << csv_field(report.categories[static_cast<std::size_t>(p)]) << ','
          << report.confusion(a, p) << '\n';
  out << "accuracy,overall,," << fmt(report.overall_accuracy) << '\n';
  for (const auto& [tag, acc] : report.group_accuracy)
    out << "accuracy,group," << tag << ',' << fmt(acc) << '\n';
  out << "count,probes,," << report.probe_count << '\n';
  out << "count,comparisons,," << report.comparison_count << '\n';
}

void write_pairs_csv(std::ostream& out, std::span<const LabeledPair> pairs) {
  out << "delta,epsilon,label\n";
  for (const auto& p : pairs)
    out << fmt(p.features.delta) << ',' << fmt(p.features.epsilon) << ',' << p.label << '\n';
}

std::vector<LabeledPair> read_pairs_csv(std::istream& in) {
  std::vector<LabeledPair> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (line_no == 1 && !fields.empty() && fields[0] == "delta") continue;
    if (fields.size() != 3)
      fail(ErrorKind::Decode, "pairs.csv line " + std::to_string(line_no) + ": expected 3 columns");
    try {
      LabeledPair p;
      p.features = {std::stod(fields[0]), std::stod(fields[1]), false};
      p.label = std::stoi(fields[2]);
      if (p.label != 0 && p.label != 1) throw std::invalid_argument("label");
      if (!(p.features.delta >= 0.0) || !(p.features.epsilon >= 0.0))
        throw std::invalid_argument("negative distance");
      pairs.push_back(p);
    } catch (const std::exception&) {
      fail(ErrorKind::Decode, "pairs.csv line " + std::to_string(line_no) + ": malformed row");
    }
  }
  return pairs;
}

std::vector<HistogramBin> export_histogram(std::span<const LabeledPair> pairs,
                                           const ScalerParams& scaler, double w_delta,
                                           double w_epsilon, int bins) {
  if (bins < 1) fail(ErrorKind::InvalidArgument, "histogram needs at least one bin");
  if (pairs.empty()) fail(ErrorKind::InvalidArgument, "histogram needs at least one pair");
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& p : pairs) {
    const FeaturePair s = apply_scaler(p.features, scaler);
    scores.push_back(w_delta * s.delta + w_epsilon * s.epsilon);
  }
  double lo = *std::min_element(scores.begin(), scores.end());
  double hi = *std::max_element(scores.begin(), scores.end());
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[static_cast<std::size_t>(b)].low = lo + b * width;
    out[static_cast<std::size_t>(b)].high = b + 1 == bins ? hi : lo + (b + 1) * width;
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    int b = static_cast<int>(std::floor((scores[i] - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    auto& bin = out[static_cast<std::size_t>(b)];
    (pairs[i].label == 1 ? bin.count_label1 : bin.count_label0) += 1;
  }
  return out;
}

void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_low,bin_high,count_label1,count_label0\n";
  for (const auto& b : bins)
    out << fmt(b.low) << ',' << fmt(b.high) << ',' << b.count_label1 << ',' << b.count_label0 << '\n';
}

std::vector<SurfacePoint> export_surface(const Theta& theta, int grid_resolution) {
  if (grid_resolution < 2) fail(ErrorKind::InvalidArgument, "surface grid resolution must be at least 2");
  std::vector<SurfacePoint> out;
  out.reserve(static_cast<std::size_t>(grid_resolution) * grid_resolution);
  const double last = grid_resolution - 1;
  for (int i = 0; i < grid_resolution; ++i)
    for (int j = 0; j < grid_resolution; ++j) {
      const FeaturePair p{i / last, j / last, true};
      out.push_back({p.delta, p.epsilon, predict_probability(theta, p)});
    }
  return out;
}

void write_surface_csv(std::ostream& out, std::span<const SurfacePoint> surface) {
  out << "delta,epsilon,probability\n";
  for (const auto& s : surface)
    out << fmt(s.delta) << ',' << fmt(s.epsilon) << ',' << fmt(s.probability) << '\n';
}

}  // namespace oneshot
