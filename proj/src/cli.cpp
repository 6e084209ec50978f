#include "oneshot/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "oneshot/classifier.hpp"
#include "oneshot/harness.hpp"
#include "oneshot/image_io.hpp"
#include "oneshot/model_io.hpp"
#include "oneshot/synthetic.hpp"

namespace oneshot {

namespace fs = std::filesystem;

namespace {

struct CliConfig {
  PreprocessConfig pre;
  std::string height_mode = "pairwise";
  TrainConfig train;
  bool no_intercept = false;
  double hist_w_delta = 1.0;
  double hist_w_epsilon = 1.0;
  int hist_bins = 20;
  int surface_grid = 21;
  int workers = 1;
  bool verbose = false;

  std::string data_dir;
  std::string target;
  std::string out_path;
  std::string model_path;
  std::string exemplars_dir;
  std::string image_path;
  std::string config_path;

  int synth_per_category = 3;
  std::uint64_t synth_seed = 7;
};

void add_preprocess_flags(CLI::App& app, CliConfig& cfg) {
  app.add_option("--canvas", cfg.pre.canvas, "Square canvas size every image is resized to");
  app.add_option("--canny-sigma", cfg.pre.canny.gaussian_sigma, "Gaussian sigma of the Canny smoothing stage");
  app.add_option("--canny-low", cfg.pre.canny.low_threshold, "Canny low hysteresis threshold");
  app.add_option("--canny-high", cfg.pre.canny.high_threshold, "Canny high hysteresis threshold");
  app.add_option("--threshold", cfg.pre.threshold, "Binarize threshold; samples above it become 255");
  app.add_option("--height-mode", cfg.height_mode, "Outline height normalization: pairwise or global")
      ->check(CLI::IsMember({"pairwise", "global"}));
  app.add_option("--workers", cfg.workers, "Worker threads for feature extraction")
      ->check(CLI::PositiveNumber);
}

void add_train_flags(CLI::App& app, CliConfig& cfg) {
  app.add_option("--lr", cfg.train.learning_rate, "Gradient descent learning rate");
  app.add_option("--max-iters", cfg.train.max_iterations, "Maximum gradient descent iterations");
  app.add_option("--tol", cfg.train.convergence_tol, "Stop when the cost changes by less than this");
  app.add_option("--l2", cfg.train.l2_lambda, "L2 penalty on the distance weights (0 = plain MLE)");
  app.add_flag("--no-intercept", cfg.no_intercept, "Fit without an intercept term");
  app.add_option("--seed", cfg.train.seed, "Seed recorded in the model");
}

void add_histogram_flags(CLI::App& app, CliConfig& cfg) {
  app.add_option("--hist-wdelta", cfg.hist_w_delta, "Histogram weight on the scaled shape distance");
  app.add_option("--hist-weps", cfg.hist_w_epsilon, "Histogram weight on the scaled color distance");
}

void add_common_flags(CLI::App& app, CliConfig& cfg) {
  app.add_option("--config", cfg.config_path, "Read option values from a TOML/INI file; flags take precedence");
  app.add_flag("--verbose", cfg.verbose, "Echo the effective configuration to stderr");
}

void finalize(CliConfig& cfg) {
  cfg.pre.height_mode = parse_height_mode(cfg.height_mode);
  cfg.train.use_intercept = !cfg.no_intercept;
  validate(cfg.pre);
  validate(cfg.train);
  if (!std::isfinite(cfg.hist_w_delta) || !std::isfinite(cfg.hist_w_epsilon))
    fail(ErrorKind::InvalidArgument, "histogram weights must be finite");
  if (cfg.hist_bins < 1) fail(ErrorKind::InvalidArgument, "histogram needs at least one bin");
  if (cfg.surface_grid < 2) fail(ErrorKind::InvalidArgument, "surface grid must be at least 2");
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
}

void print_warnings(const Dataset& ds, std::ostream& err) {
  for (const auto& w : ds.warnings) err << "warning: " << w << '\n';
}

int cmd_train(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const Dataset ds = ingest_dataset(cfg.data_dir);
  print_warnings(ds, err);
  if (!ds.find(cfg.target)) fail(ErrorKind::UnknownCategory, "unknown category '" + cfg.target + "'");
  const AttributeBank bank = extract_all(ds, cfg.pre, cfg.workers);
  const PairFeatureTable table(bank, cfg.workers);
  const TrainedModel trained = train_verifier(ds, cfg.target, table, cfg.train, cfg.pre);
  save_model(cfg.out_path, trained.model);

  const Theta& t = trained.model.theta;
  out << "final_cost," << full(trained.result.final_cost) << '\n'
      << "iterations," << trained.result.iterations << '\n'
      << "theta," << full(t(0)) << ',' << full(t(1)) << ',' << full(t(2)) << '\n';
  return 0;
}

int cmd_classify(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const VerificationModel model = load_model(cfg.model_path, fingerprint(cfg.pre));
  const Dataset ds = ingest_dataset(cfg.exemplars_dir);
  print_warnings(ds, err);

  PreprocessConfig local = cfg.pre;
  local.height_mode = HeightMode::Pairwise;
  AttributeBank bank = extract_all(ds, local, cfg.workers);
  ImageAttributes probe;
  try {
    probe = extract_attributes(load_image(cfg.image_path), local);
  } catch (const Error& e) {
    throw Error(e.kind(), cfg.image_path + ": " + e.what());
  }
  if (cfg.pre.height_mode == HeightMode::Global) {
    bank.attrs.push_back(probe);
    normalize_heights_globally(bank.attrs);
    probe = bank.attrs.back();
    bank.attrs.pop_back();
  }

  std::vector<CategoryModel> categories;
  for (std::size_t c = 0; c < ds.categories.size(); ++c) {
    CategoryModel cat{ds.categories[c].name, {}};
    for (std::size_t i = 0; i < bank.size(); ++i)
      if (bank.category_of[i] == c) cat.exemplars.push_back(bank.attrs[i]);
    categories.push_back(std::move(cat));
  }
  const auto ranked = classify(probe, categories, model);
  for (std::size_t r = 0; r < ranked.size(); ++r)
    out << r + 1 << ',' << ranked[r].name << ',' << fixed6(ranked[r].probability) << '\n';
  return 0;
}

int cmd_evaluate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  const VerificationModel model = load_model(cfg.model_path, fingerprint(cfg.pre));
  const Dataset ds = ingest_dataset(cfg.data_dir);
  print_warnings(ds, err);
  for (const auto& c : ds.categories)
    if (c.images.size() < 2)
      fail(ErrorKind::Protocol, "category '" + c.name + "' has a single image; leave-one-out needs at least 2");

  const fs::path out_dir = cfg.out_path;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir))
    fail(ErrorKind::Io, "cannot create output directory " + out_dir.string());

  const AttributeBank bank = extract_all(ds, cfg.pre, cfg.workers);
  const PairFeatureTable table(bank, cfg.workers);
  const EvaluationReport report = evaluate(ds, table, model);
  const auto pairs = all_pairs(ds, table);

  std::ostringstream report_csv, hist_csv, surface_csv, pairs_csv;
  write_report_csv(report_csv, report);
  write_histogram_csv(hist_csv, export_histogram(pairs, model.scaler, cfg.hist_w_delta,
                                                 cfg.hist_w_epsilon, cfg.hist_bins));
  write_surface_csv(surface_csv, export_surface(model.theta, cfg.surface_grid));
  write_pairs_csv(pairs_csv, pairs);
  write_file(out_dir / "report.csv", report_csv.str());
  write_file(out_dir / "histogram.csv", hist_csv.str());
  write_file(out_dir / "surface.csv", surface_csv.str());
  write_file(out_dir / "pairs.csv", pairs_csv.str());

  out << "overall_accuracy," << fixed6(report.overall_accuracy) << '\n';
  for (const auto& [tag, acc] : report.group_accuracy)
    out << "group_accuracy," << tag << ',' << fixed6(acc) << '\n';
  out << "probes," << report.probe_count << '\n'
      << "comparisons," << report.comparison_count << '\n';
  return 0;
}

int cmd_synth(const CliConfig& cfg, std::ostream& out) {
  synthetic::Options opts;
  opts.canvas = cfg.pre.canvas;
  opts.images_per_category = cfg.synth_per_category;
  opts.seed = cfg.synth_seed;
  synthetic::write_dataset(cfg.out_path, synthetic::distinct_categories(), opts);
  out << "wrote," << cfg.out_path << '\n';
  return 0;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return 2;
    case ErrorKind::Ingestion:
    case ErrorKind::UnknownCategory: return 3;
    case ErrorKind::DegenerateLabels: return 4;
    case ErrorKind::StepSize: return 5;
    case ErrorKind::PreprocessingMismatch:
    case ErrorKind::FormatVersion: return 6;
    case ErrorKind::Protocol: return 7;
    case ErrorKind::Io:
    case ErrorKind::Decode: return 8;
    case ErrorKind::EmptyOutline:
    case ErrorKind::DegenerateOutline:
    case ErrorKind::EmptyMask:
    case ErrorKind::NoSample: return 9;
  }
  return 1;
}

std::string one_line(std::string text) {
  for (char& c : text)
    if (c == '\n' || c == '\r') c = ' ';
  return text;
}

// Config file entries as `--key=value` words for the subcommand `sub`.
std::vector<std::string> config_words(const std::string& path, const std::string& sub) {
  std::vector<std::string> words;
  for (const auto& item : CLI::ConfigTOML().from_file(path)) {
    if (!item.parents.empty() && item.parents != std::vector<std::string>{sub}) continue;
    if (item.name == "config" || item.name.empty()) continue;
    for (const auto& value : item.inputs) words.push_back("--" + item.name + "=" + value);
  }
  return words;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  CLI::App app{"One-shot object recognition from shape and color attributes", "oneshot"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* train = app.add_subcommand("train", "Fit the verification model on a labeled image directory");
  train->add_option("--data", cfg.data_dir, "Dataset root: one subdirectory per category")->required();
  train->add_option("--target", cfg.target, "Category whose images form the positive pairs")->required();
  train->add_option("--out", cfg.out_path, "Model file to write")->required();
  add_preprocess_flags(*train, cfg);
  add_train_flags(*train, cfg);
  add_histogram_flags(*train, cfg);
  add_common_flags(*train, cfg);

  auto* cls = app.add_subcommand("classify", "Rank categories for one image");
  cls->add_option("--model", cfg.model_path, "Model file written by train")->required();
  cls->add_option("--exemplars", cfg.exemplars_dir, "Exemplar root: one subdirectory per category")->required();
  cls->add_option("--image", cfg.image_path, "Image to classify")->required();
  add_preprocess_flags(*cls, cfg);
  add_train_flags(*cls, cfg);
  add_histogram_flags(*cls, cfg);
  add_common_flags(*cls, cfg);

  auto* eval = app.add_subcommand("evaluate", "Leave-one-out evaluation with CSV exports");
  eval->add_option("--data", cfg.data_dir, "Dataset root: one subdirectory per category")->required();
  eval->add_option("--model", cfg.model_path, "Model file written by train")->required();
  eval->add_option("--out", cfg.out_path, "Output directory for the CSV files")->required();
  eval->add_option("--bins", cfg.hist_bins, "Histogram bin count");
  eval->add_option("--grid", cfg.surface_grid, "Probability surface grid resolution");
  add_preprocess_flags(*eval, cfg);
  add_train_flags(*eval, cfg);
  add_histogram_flags(*eval, cfg);
  add_common_flags(*eval, cfg);

  auto* synth = app.add_subcommand("synth", "Write the nine-category synthetic shape dataset");
  synth->add_option("--out", cfg.out_path, "Dataset root to create")->required();
  synth->add_option("--per-category", cfg.synth_per_category, "Images per category");
  synth->add_option("--seed", cfg.synth_seed, "Jitter seed");
  synth->add_option("--canvas", cfg.pre.canvas, "Canvas size in pixels");
  synth->add_flag("--verbose", cfg.verbose, "Echo the effective configuration to stderr");

  std::vector<std::string> words(argv, argv + argc);
  auto parse = [&](const std::vector<std::string>& w) {
    std::vector<const char*> raw;
    for (const auto& a : w) raw.push_back(a.c_str());
    app.clear();
    cfg = CliConfig{};
    app.parse(static_cast<int>(raw.size()), raw.data());
  };

  try {
    parse(words);
    if (!cfg.config_path.empty()) {
      // Re-parse with the file's values first so explicit flags override them.
      const std::string sub = app.get_subcommands().front()->get_name();
      const auto at = std::find(words.begin() + 1, words.end(), sub);
      const auto extra = config_words(cfg.config_path, sub);
      words.insert(at + 1, extra.begin(), extra.end());
      parse(words);
    }
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    finalize(cfg);
    CLI::App* active = app.get_subcommands().front();
    if (cfg.verbose) err << active->config_to_str(true, false);
    if (active == train) return cmd_train(cfg, out, err);
    if (active == cls) return cmd_classify(cfg, out, err);
    if (active == eval) return cmd_evaluate(cfg, out, err);
    return cmd_synth(cfg, out);
  } catch (const Error& e) {
    const std::string what = one_line(e.what());
    const std::string_view kind = to_string(e.kind());
    err << "error: ";
    if (what.rfind(kind, 0) != 0) err << kind << ": ";
    err << what << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }
}

}  // namespace oneshot
