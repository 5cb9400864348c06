#pragma once

#include <stdexcept>
#include <string>

namespace ucode {

enum class ErrorCode {
  FieldOverflow,
  UnknownMnemonic,
  Truncated,
  LengthMismatch,
  ChecksumMismatch,
  TooManyTriads,
  Syntax,
  Constraint,
  AddressRange,
  DomainMismatch,
  EmptyMap,
  Alignment,
  InvalidBoundary,
  Configuration,
  Io,
};

const char* error_code_name(ErrorCode code) noexcept;

// Every library failure is reported with this exception; the code lets
// callers (the CLI in particular) classify it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ucode
