#include "mdecomp/error.hpp"

namespace mdecomp {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Lookup: return "lookup";
    case ErrorKind::Format: return "format";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::InsufficientCategories: return "insufficient-categories";
    case ErrorKind::EmptyCategory: return "empty-category";
    case ErrorKind::MissingEmbedding: return "missing-embedding";
    case ErrorKind::UndefinedDistance: return "undefined-distance";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::UndefinedMatrix: return "undefined-matrix";
    case ErrorKind::UndefinedScore: return "undefined-score";
    case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::Argument: return "argument";
    case ErrorKind::Training: return "training";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Io: return "io";
    case ErrorKind::Internal: return "internal";
  }
  return "internal";
}

}  // namespace mdecomp
