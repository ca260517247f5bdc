#include "bscca/error.hpp"

namespace bscca {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyInput: return "empty_input";
    case ErrorKind::kInsufficientData: return "insufficient_data";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kDimensionMismatch: return "dimension_mismatch";
    case ErrorKind::kUndefinedQuotient: return "undefined_quotient";
    case ErrorKind::kNotPositiveDefinite: return "not_positive_definite";
    case ErrorKind::kInvalidIndex: return "invalid_index";
    case ErrorKind::kEmptySample: return "empty_sample";
    case ErrorKind::kDegenerateEstimate: return "degenerate_estimate";
    case ErrorKind::kUndefinedRate: return "undefined_rate";
    case ErrorKind::kInvalidConfig: return "invalid_config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

}  // namespace bscca
