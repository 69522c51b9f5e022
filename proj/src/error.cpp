#include "amlgnn/error.hpp"

namespace amlgnn {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadPartition: return "BadPartition";
    case ErrorKind::BadFraction: return "BadFraction";
    case ErrorKind::BadShape: return "BadShape";
    case ErrorKind::ConfigOutOfRange: return "ConfigOutOfRange";
    case ErrorKind::UnknownAggregator: return "UnknownAggregator";
    case ErrorKind::BadSchedule: return "BadSchedule";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::UnknownTxId: return "UnknownTxId";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::BadCache: return "BadCache";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::UnlabeledInMask: return "UnlabeledInMask";
    case ErrorKind::SingleClassMask: return "SingleClassMask";
    case ErrorKind::NoPositives: return "NoPositives";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::DegenerateSet: return "DegenerateSet";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotScalar: return "NotScalar";
    case ErrorKind::NonFinite: return "NonFinite";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadPartition:
    case ErrorKind::BadFraction:
    case ErrorKind::BadShape:
    case ErrorKind::ConfigOutOfRange:
    case ErrorKind::UnknownAggregator:
    case ErrorKind::BadSchedule:
    case ErrorKind::InvalidProbability:
      return ErrorCategory::Usage;
    case ErrorKind::ShapeMismatch:
    case ErrorKind::NotScalar:
    case ErrorKind::NonFinite:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace amlgnn
