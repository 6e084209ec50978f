#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "oneshot/classifier.hpp"

namespace oneshot {

inline constexpr int kModelFormatVersion = 1;

/// JSON text of the model. Output is byte-stable for equal models.
std::string model_to_json(const VerificationModel& model);

/// Parses a model; rejects other format versions and, when given, a
/// fingerprint different from `expected_fingerprint`.
VerificationModel model_from_json(const std::string& text,
                                  const std::optional<std::string>& expected_fingerprint = {});

void save_model(const std::filesystem::path& path, const VerificationModel& model);
VerificationModel load_model(const std::filesystem::path& path,
                             const std::optional<std::string>& expected_fingerprint = {});

}  // namespace oneshot
