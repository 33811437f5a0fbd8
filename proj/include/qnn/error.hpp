#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qnn {

enum class ErrorKind {
  EmptyQuiver,
  InvalidVertex,
  CycleDetected,
  Disconnected,
  BiasNotSource,
  BiasRemovalCreatesSource,
  DimensionMismatch,
  NonFiniteInput,
  RankMismatch,
  RankDeficient,
  NotRescaling,
  NotRadial,
  ShapeMismatch,
  DoubleEdge,
  InvalidPermutation,
  ParseError,
};

std::string_view to_string(ErrorKind kind);

// Every library failure carries a kind; what() reads "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qnn
