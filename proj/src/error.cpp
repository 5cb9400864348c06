#include "ucode/error.hpp"

namespace ucode {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::FieldOverflow: return "field-overflow";
    case ErrorCode::UnknownMnemonic: return "unknown-mnemonic";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::LengthMismatch: return "length-mismatch";
    case ErrorCode::ChecksumMismatch: return "checksum-mismatch";
    case ErrorCode::TooManyTriads: return "too-many-triads";
    case ErrorCode::Syntax: return "syntax";
    case ErrorCode::Constraint: return "constraint";
    case ErrorCode::AddressRange: return "address-range";
    case ErrorCode::DomainMismatch: return "domain-mismatch";
    case ErrorCode::EmptyMap: return "empty-map";
    case ErrorCode::Alignment: return "alignment";
    case ErrorCode::InvalidBoundary: return "invalid-boundary";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace ucode
