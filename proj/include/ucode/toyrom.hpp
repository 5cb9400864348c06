#pragma once

// A small synthetic ROM for exercising the engine. Every triad outside the
// planted microprograms is a trap that loads from address 0, so any stray
// fetch faults loudly.
//
// Planted layout:
//   0x7e5          div: effect-free triad (a safe interception point)
//   0x7e6 - 0x7ec  div: shift-subtract loop and result write-back
//   0x900 - 0x901  call       0x902  ret       0x905  shared completion
//   0x914 - 0x917  rep_cmps_mem8
//   0x960 mul_mem16  0x961 idiv  0x962 mul_reg16  0x964 imul_mem16
//   0x965 bound      0x966 imul_reg16  0x968 bts_imm
//   0x972 - 0x973  div entry (divisor check, loop setup)
//   0x976 - 0x977, 0x979 - 0x97a  idiv continuation
//   0x9a8 btr_imm  0x9ae mfence
//   0xaca - 0xace  shrd r/m32, r32, imm8

#include <cstdint>
#include <string_view>
#include <vector>

#include "ucode/engine.hpp"

namespace ucode::toy {

inline constexpr std::uint32_t kCodeAddress = 0x00401000;
inline constexpr std::uint32_t kStackTop = 0x00008000;
inline constexpr std::uint32_t kDataAddress = 0x00004000;

std::string_view rom_source();
const Triad& trap_triad();
MicrocodeStore build_toy_rom();

/// esp = kStackTop, edi = kDataAddress, ebx = 1, everything else zero; the
/// stack and data pages are mapped.
MachineState default_state();

struct MacroInfo {
  std::string_view name;
  std::uint16_t entry;
};

/// Every macroinstruction the toy ROM implements, in entry-address order.
const std::vector<MacroInfo>& macros();

MacroContext div_context(Gpr divisor = Gpr::Ebx, std::uint32_t address = kCodeAddress);
MacroContext shrd_context(Gpr destination, Gpr source, std::uint8_t count, std::uint32_t address = kCodeAddress);
MacroContext call_context(std::int32_t displacement, std::uint32_t address = kCodeAddress);
MacroContext ret_context(std::uint32_t address = kCodeAddress);

/// Context with representative operands for any name in macros(). `count`
/// is used only by shrd. Throws Error{UnknownMnemonic}.
MacroContext macro_context(std::string_view name, std::uint32_t address = kCodeAddress, std::uint8_t count = 0);

}  // namespace ucode::toy
