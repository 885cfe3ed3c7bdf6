#include "mcse/error.hpp"

namespace mcse {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kNoUsableChannels: return "no_usable_channels";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kDegenerate: return "degenerate";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mcse
