#include "htm/error.hpp"

namespace htm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidRule: return "InvalidRule";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::TailUnderflow: return "TailUnderflow";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::InvalidPrefix: return "InvalidPrefix";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::SampleBelowOne: return "SampleBelowOne";
    case ErrorCode::FormMismatch: return "FormMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace htm
