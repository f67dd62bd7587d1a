#pragma once

#include <stdexcept>
#include <string>

namespace boxfix {

enum class ErrorCode {
  kInvalidArgument,  // bad value passed to a library call
  kUsage,            // bad command line
  kSchema,           // input file does not match the expected layout
  kReference,        // dangling id reference inside a file
  kRange,            // numeric value outside its allowed range
  kNumeric,          // singular / non-PSD matrix and similar
  kIo,               // filesystem failure
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception. Carries a machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace boxfix
