#include "oneshot/model_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace oneshot {

using nlohmann::json;

std::string model_to_json(const VerificationModel& model) {
  validate(model);
  const auto& cfg = model.train_config;
  json j;
  j["format_version"] = kModelFormatVersion;
  j["preprocess_fingerprint"] = model.preprocess_fingerprint;
  j["theta"] = {{"intercept", model.theta(theta_index::kIntercept)},
                {"w_delta", model.theta(theta_index::kDelta)},
                {"w_epsilon", model.theta(theta_index::kEpsilon)}};
  j["scaler"] = {{"delta_min", model.scaler.delta_min},
                 {"delta_max", model.scaler.delta_max},
                 {"epsilon_min", model.scaler.epsilon_min},
                 {"epsilon_max", model.scaler.epsilon_max}};
  j["train_config"] = {{"learning_rate", cfg.learning_rate},
                       {"max_iterations", cfg.max_iterations},
                       {"convergence_tol", cfg.convergence_tol},
                       {"l2_lambda", cfg.l2_lambda},
                       {"use_intercept", cfg.use_intercept},
                       {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

VerificationModel model_from_json(const std::string& text,
                                  const std::optional<std::string>& expected_fingerprint) {
  VerificationModel model;
  try {
    const json j = json::parse(text);
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      fail(ErrorKind::FormatVersion, "unsupported model format version " + std::to_string(version));
    model.preprocess_fingerprint = j.at("preprocess_fingerprint").get<std::string>();
    const auto& t = j.at("theta");
    model.theta << t.at("intercept").get<double>(), t.at("w_delta").get<double>(),
        t.at("w_epsilon").get<double>();
    const auto& s = j.at("scaler");
    model.scaler = {s.at("delta_min").get<double>(), s.at("delta_max").get<double>(),
                    s.at("epsilon_min").get<double>(), s.at("epsilon_max").get<double>()};
    const auto& c = j.at("train_config");
    model.train_config.learning_rate = c.at("learning_rate").get<double>();
    model.train_config.max_iterations = c.at("max_iterations").get<int>();
    model.train_config.convergence_tol = c.at("convergence_tol").get<double>();
    model.train_config.l2_lambda = c.at("l2_lambda").get<double>();
    model.train_config.use_intercept = c.at("use_intercept").get<bool>();
    model.train_config.seed = c.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Decode, std::string("malformed model file: ") + e.what());
  }
  validate(model);
  if (expected_fingerprint && *expected_fingerprint != model.preprocess_fingerprint)
    fail(ErrorKind::PreprocessingMismatch,
         "preprocessing mismatch: model fingerprint " + model.preprocess_fingerprint +
             " differs from current settings " + *expected_fingerprint);
  return model;
}

void save_model(const std::filesystem::path& path, const VerificationModel& model) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write model file " + path.string());
  out << text;
  if (!out) fail(ErrorKind::Io, "cannot write model file " + path.string());
}

VerificationModel load_model(const std::filesystem::path& path,
                             const std::optional<std::string>& expected_fingerprint) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str(), expected_fingerprint);
}

}  // namespace oneshot
