#pragma once

// Glue shared by the command-line tool and its golden tests: loading ROM
// images, applying "key=value" state assignments, and formatting run reports.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucode/engine.hpp"

namespace ucode {

/// Accepts decimal or 0x-prefixed hex. Throws Error{Syntax}.
std::uint32_t parse_u32(std::string_view text);

/// ROM assembled from RTL placed with .org; unplaced triads are `fill`.
/// Throws Error{AddressRange} if the program reaches into patch RAM.
MicrocodeStore rom_from_rtl(std::string_view text, const Triad& fill);
/// kRomTriads consecutive 28-byte triads. Throws Error{LengthMismatch}.
MicrocodeStore rom_from_image(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> rom_image(const MicrocodeStore& store);

// A state assignment is "reg=value", "flag=0|1", "tN=value", or
// "[location]=value" where location is a register or an address; the latter
// stores a 32-bit little-endian value, mapping the page if needed.
struct Assignment {
  std::string key;
  std::uint32_t value = 0;
  bool is_memory = false;
  std::string location;  // inside the brackets
};

/// Throws Error{Syntax} for a malformed assignment or unknown register.
Assignment parse_assignment(std::string_view text);
void apply_assignment(MachineState& state, const Assignment& assignment);
/// Address a memory assignment refers to, evaluated against `state`.
std::uint32_t assignment_address(const MachineState& state, const Assignment& assignment);

/// Plain-text outcome: status, next decode address, triad count, the
/// general-purpose registers, then "mem[loc]=value" for each watched
/// location (read from the final state, as a decimal).
std::string run_report(const ExecutionOutcome& outcome, std::span<const Assignment> watches);

}  // namespace ucode
