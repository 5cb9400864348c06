#pragma once

// Bit-exact codec for 64-bit microinstructions and 32-bit sequence words.
//
// Decoding is total: every 64-bit word maps to a Microinstruction, including
// words whose class or op type is not in the tables. Bits that no known
// field covers are kept in `raw_unknown` so encode(decode(w)) == w always.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ucode/tables.hpp"

namespace ucode {

using tables::OpClass;
using tables::OpKind;
using tables::SeqAction;

inline constexpr std::uint16_t kRomTriads = 0xc00;  // 0x000..0xbff
inline constexpr std::uint16_t kPatchBase = 0xc00;
inline constexpr std::uint16_t kAddressMask = 0xfff;

struct RegisterName {
  std::uint8_t code = 0;  // 6-bit
  std::uint8_t size = 0;  // 2-bit size code

  friend bool operator==(const RegisterName&, const RegisterName&) = default;
};

/// Resolve a register mnemonic ("t1d", "zerob", "regmd4", ...). Throws
/// Error{UnknownMnemonic} for names outside the table.
RegisterName lookup_register(std::string_view mnemonic);

/// Name of a (code, size) pair, or nullopt when the code is unassigned.
std::optional<std::string_view> register_mnemonic(std::uint8_t code, std::uint8_t size);
std::optional<std::string_view> register_mnemonic(RegisterName reg);

struct Microinstruction {
  OpClass op_class = OpClass::RegOp;
  std::uint8_t class_code = 0;  // bits 39..37
  std::uint16_t type = 0;       // 9-bit, or 4-bit for SpecOp
  std::uint8_t cc = 0;          // SpecOp only
  bool sw = false;
  bool three_operand = false;
  std::uint8_t reg1 = 0;
  std::uint8_t flags = 0;       // RegOp only
  std::uint8_t size = 0;        // 3-bit; RegOp, StOp, SpecOp
  std::uint8_t reg2 = 0;
  bool rmod = false;            // 1 = immediate, 0 = reg3 in imm16[5:0]
  std::uint16_t imm = 0;        // imm16 / reg3 / addr12
  std::uint64_t raw_unknown = 0;

  OpKind kind() const noexcept;
  std::uint8_t reg3() const noexcept { return static_cast<std::uint8_t>(imm & 0x3f); }

  friend bool operator==(const Microinstruction&, const Microinstruction&) = default;
};

/// Mask of the bit positions that carry a decoded field for a class.
std::uint64_t known_field_mask(OpClass op_class) noexcept;

/// Class implied by a class code and 9-bit type field (RegOp vs SpecOp
/// share class code 000).
OpClass classify(std::uint8_t class_code, std::uint16_t type9) noexcept;

/// Op type lookup: returns the table entry for (class, type[, cc]).
const tables::OpTypeEntry* find_op_type(OpClass op_class, std::uint16_t type, std::uint8_t cc = 0) noexcept;
const tables::OpTypeEntry* find_op_type(std::string_view mnemonic) noexcept;
const tables::OpTypeEntry& op_type_entry(OpKind kind);

Microinstruction decode_microinstruction(std::uint64_t word) noexcept;
/// Throws Error{FieldOverflow} naming the field that does not fit.
std::uint64_t encode_microinstruction(const Microinstruction& insn);

struct SequenceWord {
  SeqAction action = SeqAction::NextTriad;
  std::uint8_t action_code = 0;  // bits 16..14
  std::uint16_t address = 0;     // branch target, bits 11..0
  std::uint32_t raw_unknown = 0;

  static SequenceWord next_triad() { return {}; }
  static SequenceWord complete() { return {SeqAction::Complete, 0b110, 0, 0}; }
  static SequenceWord branch(std::uint16_t target) { return {SeqAction::Branch, 0b010, target, 0}; }

  friend bool operator==(const SequenceWord&, const SequenceWord&) = default;
};

SequenceWord decode_sequence_word(std::uint32_t word) noexcept;
/// Throws Error{FieldOverflow} when the address exceeds 12 bits.
std::uint32_t encode_sequence_word(const SequenceWord& sw);

struct Triad {
  std::array<Microinstruction, 3> insns{};
  SequenceWord seq{};

  friend bool operator==(const Triad&, const Triad&) = default;
};

inline constexpr std::size_t kTriadBytes = 28;

/// 3 little-endian microinstructions followed by the sequence word.
void write_triad(const Triad& triad, std::span<std::uint8_t, kTriadBytes> out);
Triad read_triad(std::span<const std::uint8_t, kTriadBytes> in) noexcept;

/// Canonical no-op: `or zerod, zerod, zerod` without flag commit.
Microinstruction nop_encoding() noexcept;
bool is_nop(const Microinstruction& insn) noexcept;

/// Three no-ops followed by the given sequence word.
Triad nop_triad(SequenceWord seq = SequenceWord::next_triad()) noexcept;

/// Condition mnemonic for a 5-bit cc value ("ZF", "nZF", "cc9", ...).
std::string condition_mnemonic(std::uint8_t cc);
/// Inverse of condition_mnemonic; nullopt if the text is not a condition.
std::optional<std::uint8_t> parse_condition(std::string_view text);

// Bulk kernels. The parallel variants split the input across OpenMP threads
// and must agree element-for-element with the serial ones.
std::vector<Microinstruction> decode_words(std::span<const std::uint64_t> words);
std::vector<Microinstruction> decode_words_serial(std::span<const std::uint64_t> words);
/// Number of words for which encode(decode(w)) != w.
std::size_t count_roundtrip_failures(std::span<const std::uint64_t> words);
std::size_t count_roundtrip_failures_serial(std::span<const std::uint64_t> words);

}  // namespace ucode
