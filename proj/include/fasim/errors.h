#pragma once

#include <stdexcept>
#include <string>

namespace fasim {

enum class ErrorCode {
  kBlockFull,
  kEraseWithValidPages,
  kNotValid,
  kFreeBlock,
  kOutOfRange,
  kDeviceWedged,
  kUnmapped,
  kNoVictim,
  kInsufficientSpace,
  kOverlapWithActiveInstance,
  kMalformedChunks,
  kUnknownInstance,
  kUnknownStream,
  kConfigInvalid,
  kRegionOverlap,
  kEmptyWindow,
  kDivByZeroGuard,
};

const char* to_string(ErrorCode code);

// Every recoverable simulator failure carries a code so that two engines
// replaying the same command stream can be compared error-for-error.
class SimError : public std::runtime_error {
 public:
  SimError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fasim
