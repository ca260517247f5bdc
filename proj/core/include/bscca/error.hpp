#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bscca {

enum class ErrorKind {
  kEmptyInput,
  kInsufficientData,
  kDomain,
  kDimensionMismatch,
  kUndefinedQuotient,
  kNotPositiveDefinite,
  kInvalidIndex,
  kEmptySample,
  kDegenerateEstimate,
  kUndefinedRate,
  kInvalidConfig,
  kIo,
};

/// Stable snake_case name used in structured error records.
std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bscca
