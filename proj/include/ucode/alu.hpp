#pragma once

// Register-operation arithmetic and flag computation, x86 conventions.

#include <cstdint>

#include "ucode/tables.hpp"

namespace ucode {

struct Flags {
  bool zf = false;
  bool cf = false;
  bool sf = false;
  bool of = false;

  friend bool operator==(const Flags&, const Flags&) = default;
};

struct AluResult {
  std::uint32_t value = 0;
  Flags flags{};
  bool writes_destination = true;
};

/// `a` is the first source (reg1), `b` the second (reg3 or immediate).
/// Operands are masked to `width` bits (8, 16 or 32). For operations that
/// do not define a flag, the incoming value is passed through.
AluResult alu_execute(tables::OpKind op, std::uint32_t a, std::uint32_t b, unsigned width, Flags in);

/// Evaluates a 5-bit condition field. Returns false for reserved selectors
/// via `valid`.
bool evaluate_condition(std::uint8_t cc, const Flags& flags, bool& valid);

}  // namespace ucode
