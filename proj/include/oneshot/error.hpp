#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oneshot {

enum class ErrorKind {
  InvalidArgument,
  EmptyOutline,
  DegenerateOutline,
  EmptyMask,
  NoSample,
  DegenerateLabels,
  StepSize,
  Ingestion,
  UnknownCategory,
  Protocol,
  PreprocessingMismatch,
  FormatVersion,
  Io,
  Decode,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable error class.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace oneshot
