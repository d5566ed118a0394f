#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace clustab {

enum class ErrorCode {
  InvalidArgument,
  MismatchedItems,
  EmptyIntersection,
  ParseError,
  NonFiniteValue,
  DimensionMismatch,
  InsufficientData,
  OutOfRange,
  InsufficientResolutions,
  EmptyCluster,
  BackendUnavailable,
  MalformedResponse,
  Io,
  Numeric,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Same code, message prefixed with `context: `.
  Error with_context(std::string_view context) const;

private:
  ErrorCode code_;
};

}  // namespace clustab
