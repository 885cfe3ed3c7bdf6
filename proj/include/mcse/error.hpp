#pragma once

#include <stdexcept>
#include <string>

namespace mcse {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormat,
  kShapeMismatch,
  kNoUsableChannels,
  kNumerical,
  kDegenerate,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so the CLI can map it to
// an exit status and the batch report can record it per utterance.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) fail(code, what);
}

}  // namespace mcse
