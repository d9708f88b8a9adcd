#include "kaid/error.hpp"

#include <cmath>
#include <sstream>

namespace kaid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::DegenerateRow: return "degenerate-row";
    case ErrorCode::EmptyDataset: return "empty-dataset";
    case ErrorCode::SeriesTooShort: return "series-too-short";
    case ErrorCode::InvalidRange: return "invalid-range";
    case ErrorCode::InvalidAddendCount: return "invalid-K";
    case ErrorCode::ZeroRange: return "zero-range";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::MalformedRow: return "malformed-row";
    case ErrorCode::MissingColumn: return "missing-column";
    case ErrorCode::SchemaMismatch: return "schema-mismatch";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

void require_relaxation(double mu) {
  if (!(mu > 0.0 && mu < 2.0) || !std::isfinite(mu)) {
    std::ostringstream os;
    os << "relaxation parameter mu must lie in (0, 2), got " << mu;
    fail(ErrorCode::InvalidArgument, os.str());
  }
}

}  // namespace kaid
