#include "oneshot/error.hpp"
#include "oneshot/raster.hpp"

namespace oneshot {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::EmptyOutline: return "empty outline";
    case ErrorKind::DegenerateOutline: return "degenerate outline";
    case ErrorKind::EmptyMask: return "empty mask";
    case ErrorKind::NoSample: return "no color sample";
    case ErrorKind::DegenerateLabels: return "degenerate labels";
    case ErrorKind::StepSize: return "divergence";
    case ErrorKind::Ingestion: return "ingestion";
    case ErrorKind::UnknownCategory: return "unknown category";
    case ErrorKind::Protocol: return "protocol";
    case ErrorKind::PreprocessingMismatch: return "preprocessing mismatch";
    case ErrorKind::FormatVersion: return "format version";
    case ErrorKind::Io: return "io";
    case ErrorKind::Decode: return "decode";
  }
  return "error";
}

void validate(const Raster& img) {
  if (img.width < 1 || img.height < 1)
    fail(ErrorKind::InvalidArgument, "raster dimensions must be at least 1x1");
  if (img.channels != 1 && img.channels != 3 && img.channels != 4)
    fail(ErrorKind::InvalidArgument, "raster must have 1, 3 or 4 channels");
  if (img.data.size() != static_cast<std::size_t>(img.width) * img.height * img.channels)
    fail(ErrorKind::InvalidArgument, "raster buffer size does not match its dimensions");
}

void validate(const BinaryRaster& bin) {
  if (bin.width < 1 || bin.height < 1)
    fail(ErrorKind::InvalidArgument, "raster dimensions must be at least 1x1");
  if (bin.data.size() != static_cast<std::size_t>(bin.width) * bin.height)
    fail(ErrorKind::InvalidArgument, "raster buffer size does not match its dimensions");
  for (auto v : bin.data)
    if (v != 0 && v != BinaryRaster::kOn)
      fail(ErrorKind::InvalidArgument, "binary raster sample outside {0, 255}");
}

}  // namespace oneshot
