#include "actdiag/error.hpp"

namespace actdiag {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::UnsupportedLayout: return "UnsupportedLayout";
    case ErrorKind::NonFiniteData: return "NonFiniteData";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::RaggedRows: return "RaggedRows";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::EmptyColumn: return "EmptyColumn";
    case ErrorKind::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::AllTied: return "AllTied";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::IdMismatch: return "IdMismatch";
    case ErrorKind::MalformedReport: return "MalformedReport";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::DivergedTraining: return "DivergedTraining";
    case ErrorKind::LayerOutOfRange: return "LayerOutOfRange";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
  }
  return "Unknown";
}

}  // namespace actdiag
