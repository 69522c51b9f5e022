#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amlgnn {

// Machine-readable failure categories. The CLI maps the category to an exit
// code (usage 2, data 3, numeric 4).
enum class ErrorKind {
  // usage / configuration
  BadPartition,
  BadFraction,
  BadShape,
  ConfigOutOfRange,
  UnknownAggregator,
  BadSchedule,
  InvalidProbability,
  // data
  MalformedCsv,
  UnknownTxId,
  EmptyGraph,
  BadCache,
  EmptyMask,
  UnlabeledInMask,
  SingleClassMask,
  NoPositives,
  SingleClass,
  DegenerateSet,
  // numeric
  ShapeMismatch,
  NotScalar,
  NonFinite,
};

enum class ErrorCategory { Usage, Data, Numeric };

std::string_view to_string(ErrorKind kind);
ErrorCategory category_of(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  ErrorCategory category() const noexcept { return category_of(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace amlgnn
