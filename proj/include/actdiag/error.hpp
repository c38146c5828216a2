#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace actdiag {

enum class ErrorKind {
  // tensor-io
  MalformedHeader,
  UnsupportedLayout,
  NonFiniteData,
  IoFailure,
  RaggedRows,
  NonNumericCell,
  // estimators
  EmptyColumn,
  NonPositiveArgument,
  TooFewSamples,
  LengthMismatch,
  InvalidConfig,
  // analysis
  AllTied,
  ZeroVariance,
  IdMismatch,
  MalformedReport,
  DegenerateData,
  // toylab
  DivergedTraining,
  LayerOutOfRange,
  WidthMismatch,
  EmptyDataset,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace actdiag
