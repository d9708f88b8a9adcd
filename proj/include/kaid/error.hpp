#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kaid {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  DegenerateRow,
  EmptyDataset,
  SeriesTooShort,
  InvalidRange,
  InvalidAddendCount,
  ZeroRange,
  LengthMismatch,
  MalformedRow,
  MissingColumn,
  SchemaMismatch,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception thrown by every fallible operation in the library. The code
/// identifies the failure category; what() carries a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

/// Throws InvalidArgument unless mu lies in the open interval (0, 2).
void require_relaxation(double mu);

}  // namespace kaid
