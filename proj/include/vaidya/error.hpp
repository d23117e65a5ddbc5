#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vaidya {

enum class ErrorKind {
  DimensionMismatch,
  NonInteriorPoint,
  SingularHessian,
  CenteringFailed,
  ZeroCutVector,
  TooFewRows,
  InvalidArgument,
  InvalidBatchSize,
  NoFeasibleIterate,
  NotSeparable,
  ParseError,
  EmptyFile,
  ConfigError,
};

std::string_view kind_name(ErrorKind kind) noexcept;

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(kind_name(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vaidya
