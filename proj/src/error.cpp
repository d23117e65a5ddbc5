#include "vaidya/error.hpp"

namespace vaidya {

std::string_view kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonInteriorPoint: return "NonInteriorPoint";
    case ErrorKind::SingularHessian: return "SingularHessian";
    case ErrorKind::CenteringFailed: return "CenteringFailed";
    case ErrorKind::ZeroCutVector: return "ZeroCutVector";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidBatchSize: return "InvalidBatchSize";
    case ErrorKind::NoFeasibleIterate: return "NoFeasibleIterate";
    case ErrorKind::NotSeparable: return "NotSeparable";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace vaidya
