#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mdecomp {

enum class ErrorKind {
  Parse,
  Validation,
  Lookup,
  Format,
  Dimension,
  InsufficientData,
  InsufficientCategories,
  EmptyCategory,
  MissingEmbedding,
  UndefinedDistance,
  UndefinedMetric,
  UndefinedMatrix,
  UndefinedScore,
  UndefinedCorrelation,
  Argument,
  Training,
  Divergence,
  Io,
  Internal,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. The kind decides the CLI exit code:
/// Internal maps to 1, everything else is a user-input problem and maps to 2.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  bool is_user_error() const noexcept { return kind_ != ErrorKind::Internal; }

 private:
  ErrorKind kind_;
};

}  // namespace mdecomp
