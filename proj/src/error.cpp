#include "clustab/error.hpp"

namespace clustab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MismatchedItems: return "MismatchedItems";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InsufficientResolutions: return "InsufficientResolutions";
    case ErrorCode::EmptyCluster: return "EmptyCluster";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Numeric: return "Numeric";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

Error Error::with_context(std::string_view context) const {
  return Error(code_, std::string(context) + ": " + what());
}

}  // namespace clustab
