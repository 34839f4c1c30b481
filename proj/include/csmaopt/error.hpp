#pragma once

#include <stdexcept>
#include <string>

namespace csmaopt {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse = 2,
  kInfeasible = 3,
  kCapExceeded = 4,
  kNumerical = 5,
  kDimensionMismatch = 6,
  kRetryExhausted = 7,
  kIo = 8,
};

const char* to_string(ErrorCode code) noexcept;

// Every failure raised by the core carries one of the codes above so the C
// layer can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace csmaopt
