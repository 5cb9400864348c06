#pragma once

// Assembler and disassembler for the microcode RTL.
//
//   insn op1, op2[, op3]      first operand is the destination
//   ld t2d, [edi]             memory operands take exactly one register
//   st [edi], t2d             store size follows the source register
//   jcc nZF, 0xfe5            conditional microcode branch
//   writePC t3d               always lands in slot 2
//   mul eax, ebx              mul/imul always land in slot 0
//   add.f / sub.nf            force flag commit on / off
//   .start N  .org A          patch-relative / absolute triad placement
//   .sw_branch A  .sw_complete  .sw_next  .sw_raw V
//   .raw 0x...                verbatim 64-bit microinstruction
//   a; b; c                   one explicit triad
//   // set match register N to ADDR     match register pragma

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucode/container.hpp"
#include "ucode/error.hpp"
#include "ucode/uisa.hpp"

namespace ucode::rtl {

struct SourceLocation {
  std::size_t line = 0;    // 1-based
  std::size_t column = 0;  // 1-based

  friend bool operator==(const SourceLocation&, const SourceLocation&) = default;
};

/// Parse and assembly errors carry the offending source position.
class RtlError : public Error {
 public:
  RtlError(ErrorCode code, SourceLocation loc, const std::string& message);
  SourceLocation location() const noexcept { return loc_; }

 private:
  SourceLocation loc_;
};

struct Operand {
  enum class Kind { Register, Immediate, Memory, Condition };
  Kind kind = Kind::Register;
  RegisterName reg{};       // Register, Memory
  std::uint64_t value = 0;  // Immediate, Condition (cc bits)
  std::string text;

  friend bool operator==(const Operand&, const Operand&) = default;
};

enum class StatementKind { Instruction, Directive };

struct RtlStatement {
  StatementKind kind = StatementKind::Instruction;
  std::string mnemonic;  // lower-case op name, "nop", "jcc", ".raw", or a directive
  std::optional<bool> commit_flags;  // from a .f / .nf suffix
  std::vector<Operand> operands;
  SourceLocation location;
  std::optional<std::size_t> bundle;  // statements sharing an id form one explicit triad
};

struct MatchPragma {
  std::size_t index = 0;
  std::uint16_t address = 0;

  friend bool operator==(const MatchPragma&, const MatchPragma&) = default;
};

struct RtlProgram {
  std::optional<std::uint16_t> start_address;  // first .start, patch-relative
  std::vector<RtlStatement> statements;
  std::vector<MatchPragma> match_pragmas;
};

RtlProgram parse_program(std::string_view text);

struct AssembledProgram {
  std::map<std::uint16_t, Triad> triads;  // absolute triad address -> triad
  std::vector<MatchPragma> match_pragmas;

  /// Triads for patch RAM starting at patch index 0. Gaps below the highest
  /// placed triad are filled with no-op triads that complete. Throws
  /// Error{AddressRange} if the program places triads in ROM.
  std::vector<Triad> patch_triads() const;
};

AssembledProgram assemble(const RtlProgram& program);
AssembledProgram assemble_text(std::string_view text);

/// Builds an update file for a patch program. Pragmas fill the match
/// registers first; `overrides` (from the command line) win.
UpdateFile make_update(const AssembledProgram& program, std::span<const MatchPragma> overrides = {});

/// Encodes one instruction statement outside any triad context.
Microinstruction encode_statement(const RtlStatement& statement);

struct DisasmOptions {
  bool addresses = false;  // emit a "// 0xNNN" comment per triad
};

/// Text for one microinstruction in a given slot. Falls back to `.raw` when
/// the word would not reassemble to the same bits in that slot.
std::string disassemble_insn(const Microinstruction& insn, std::size_t slot);

/// Disassembles consecutive triads placed from `base_address`.
std::string disassemble(std::span<const Triad> triads, std::uint16_t base_address = kPatchBase,
                        const DisasmOptions& options = {});

/// Disassembles an update file including its match register pragmas.
std::string disassemble_update(const UpdateFile& update, const DisasmOptions& options = {});

}  // namespace ucode::rtl
