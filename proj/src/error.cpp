#include "qnn/error.hpp"

namespace qnn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyQuiver: return "EmptyQuiver";
    case ErrorKind::InvalidVertex: return "InvalidVertex";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::BiasNotSource: return "BiasNotSource";
    case ErrorKind::BiasRemovalCreatesSource: return "BiasRemovalCreatesSource";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NotRescaling: return "NotRescaling";
    case ErrorKind::NotRadial: return "NotRadial";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DoubleEdge: return "DoubleEdge";
    case ErrorKind::InvalidPermutation: return "InvalidPermutation";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

}  // namespace qnn
