#pragma once

// Encoding tables for the K8/K10 microinstruction set.
//
// Everything the codec, assembler and disassembler know about bit layouts,
// operation types and register names lives here as plain data. The codec is
// written against these arrays, and `export_tables_json` serializes them so
// other tools can consume the same numbers.

#include <array>
#include <cstdint>
#include <string_view>

namespace ucode::tables {

enum class OpClass : std::uint8_t { RegOp, LdOp, StOp, SpecOp, Unknown };

/// Value of the 3-bit class field (bits 39..37) for each known class.
/// RegOp and SpecOp share 000 and are told apart by their type encodings.
inline constexpr std::uint8_t kClassCodeRegSpec = 0b000;
inline constexpr std::uint8_t kClassCodeLd = 0b001;
inline constexpr std::uint8_t kClassCodeSt = 0b010;

enum class Field : std::uint8_t {
  Type,       // 9-bit op type (4-bit for SpecOp)
  Cc,         // SpecOp condition code
  Swap,       // sw
  ThreeOp,    // 3o
  Reg1,
  Flags,      // RegOp flag commit
  Class,
  Size,
  Reg2,
  Rmod,
  Imm,        // imm16 / reg3 / addr12
};

struct FieldSpec {
  Field field;
  std::string_view name;
  std::uint8_t lsb;
  std::uint8_t width;
};

// Microinstruction layouts, one per class. Bits not covered by a field are
// the unknown "-" positions and are carried verbatim.
inline constexpr std::array<FieldSpec, 10> kRegOpLayout{{
    {Field::Type, "type", 54, 9},
    {Field::Swap, "sw", 53, 1},
    {Field::ThreeOp, "3o", 52, 1},
    {Field::Reg1, "reg1", 46, 6},
    {Field::Flags, "flags", 41, 2},
    {Field::Class, "class", 37, 3},
    {Field::Size, "size", 30, 3},
    {Field::Reg2, "reg2", 24, 6},
    {Field::Rmod, "rmod", 23, 1},
    {Field::Imm, "imm16/reg3", 0, 16},
}};

inline constexpr std::array<FieldSpec, 8> kLdOpLayout{{
    {Field::Type, "type", 54, 9},
    {Field::Swap, "sw", 53, 1},
    {Field::ThreeOp, "3o", 52, 1},
    {Field::Reg1, "reg1", 46, 6},
    {Field::Class, "class", 37, 3},
    {Field::Reg2, "reg2", 24, 6},
    {Field::Rmod, "rmod", 23, 1},
    {Field::Imm, "imm16/reg3", 0, 16},
}};

inline constexpr std::array<FieldSpec, 9> kStOpLayout{{
    {Field::Type, "type", 54, 9},
    {Field::Swap, "sw", 53, 1},
    {Field::ThreeOp, "3o", 52, 1},
    {Field::Reg1, "reg1", 46, 6},
    {Field::Class, "class", 37, 3},
    {Field::Size, "size", 30, 3},
    {Field::Reg2, "reg2", 24, 6},
    {Field::Rmod, "rmod", 23, 1},
    {Field::Imm, "imm16/reg3", 0, 16},
}};

inline constexpr std::array<FieldSpec, 9> kSpecOpLayout{{
    {Field::Type, "type", 59, 4},
    {Field::Cc, "cc", 54, 5},
    {Field::Swap, "sw", 53, 1},
    {Field::ThreeOp, "3o", 52, 1},
    {Field::Reg1, "reg1", 46, 6},
    {Field::Class, "class", 37, 3},
    {Field::Size, "size", 30, 3},
    {Field::Reg2, "reg2", 24, 6},
    {Field::Imm, "imm16/addr12", 0, 16},
}};

// Classes 011..111 have never been observed; the positions shared by every
// known class are decoded so that such words still disassemble field-wise.
inline constexpr std::array<FieldSpec, 8> kUnknownClassLayout = kLdOpLayout;

enum class OpKind : std::uint8_t {
  Add, Or, Adc, Sbb, And, Sub, Xor, Cmp, Test,
  Rll, Rrl, Sll, Srl,
  Mov, Mul, Imul,
  Bswap, Not,
  WritePc, BranchCc,
  Ld, St,
  Unrecognized,
};

struct OpTypeEntry {
  OpKind kind;
  std::string_view mnemonic;
  OpClass op_class;
  std::uint16_t encoding;  // 9-bit pattern; for branchCC the low 5 bits are cc
  bool cc_in_low_bits;
};

inline constexpr std::array<OpTypeEntry, 22> kOpTypes{{
    {OpKind::Add, "add", OpClass::RegOp, 0b000000000, false},
    {OpKind::Or, "or", OpClass::RegOp, 0b000000001, false},
    {OpKind::Adc, "adc", OpClass::RegOp, 0b000000010, false},
    {OpKind::Sbb, "sbb", OpClass::RegOp, 0b000000011, false},
    {OpKind::And, "and", OpClass::RegOp, 0b000000100, false},
    {OpKind::Sub, "sub", OpClass::RegOp, 0b000000101, false},
    {OpKind::Xor, "xor", OpClass::RegOp, 0b000000110, false},
    {OpKind::Cmp, "cmp", OpClass::RegOp, 0b000000111, false},
    {OpKind::Test, "test", OpClass::RegOp, 0b000001000, false},
    {OpKind::Rll, "rll", OpClass::RegOp, 0b000010000, false},
    {OpKind::Rrl, "rrl", OpClass::RegOp, 0b000010001, false},
    {OpKind::Sll, "sll", OpClass::RegOp, 0b000010100, false},
    {OpKind::Srl, "srl", OpClass::RegOp, 0b000010101, false},
    {OpKind::Mov, "mov", OpClass::RegOp, 0b001100000, false},
    {OpKind::Mul, "mul", OpClass::RegOp, 0b001110000, false},
    {OpKind::Imul, "imul", OpClass::RegOp, 0b001110001, false},
    {OpKind::Bswap, "bswap", OpClass::RegOp, 0b111000000, false},
    {OpKind::Not, "not", OpClass::RegOp, 0b111110101, false},
    {OpKind::WritePc, "writePC", OpClass::SpecOp, 0b001000000, false},
    {OpKind::BranchCc, "branchCC", OpClass::SpecOp, 0b010100000, true},
    {OpKind::Ld, "ld", OpClass::LdOp, 0b001111111, false},
    {OpKind::St, "st", OpClass::StOp, 0b101010000, false},
}};

// Register size codes (2 bits) as used by the size field and the register table columns.
inline constexpr std::uint8_t kSizeByte = 0b00;
inline constexpr std::uint8_t kSizeWord = 0b01;
inline constexpr std::uint8_t kSizeDword = 0b10;
inline constexpr std::uint8_t kSizeQword = 0b11;

struct RegisterRow {
  std::array<std::string_view, 4> names;  // indexed by size code
  std::uint8_t code;                      // 6-bit
};

inline constexpr std::array<RegisterRow, 20> kRegisters{{
    {{"al", "ax", "eax", "rax"}, 0b000000},
    {{"cl", "cx", "ecx", "rcx"}, 0b000001},
    {{"dl", "dx", "edx", "rdx"}, 0b000010},
    {{"bl", "bx", "ebx", "rbx"}, 0b000011},
    {{"ah", "sp", "esp", "rsp"}, 0b000100},
    {{"ch", "bp", "ebp", "rbp"}, 0b000101},
    {{"dh", "si", "esi", "rsi"}, 0b000110},
    {{"bh", "di", "edi", "rdi"}, 0b000111},
    {{"t1l", "t1w", "t1d", "t1q"}, 0b001000},
    {{"t2l", "t2w", "t2d", "t2q"}, 0b001001},
    {{"t3l", "t3w", "t3d", "t3q"}, 0b001010},
    {{"t4l", "t4w", "t4d", "t4q"}, 0b001011},
    {{"t1h", "t5w", "t5d", "t5q"}, 0b001100},
    {{"t2h", "t6w", "t6d", "t6q"}, 0b001101},
    {{"t3h", "t7w", "t7d", "t7q"}, 0b001110},
    {{"t4h", "t8w", "t8d", "t8q"}, 0b001111},
    {{"regmb", "regmw", "regmd", "regmq"}, 0b101000},
    {{"regb", "regw", "regd", "regq"}, 0b101100},
    {{"pcb", "pcw", "pcd", "pcq"}, 0b111000},
    {{"zerob", "zerow", "zerod", "zeroq"}, 0b111111},
}};

// Substitution slots used by the shrd microprogram but missing from the
// register table. Interpretation: regm?4 selects the first macro operand,
// regm?6 the second. Codes were picked from the unused 1010xx range so the
// slot survives serialization.
inline constexpr std::array<RegisterRow, 2> kRegisterExtensions{{
    {{"regmb4", "regmw4", "regmd4", "regmq4"}, 0b101010},
    {{"regmb6", "regmw6", "regmd6", "regmq6"}, 0b101011},
}};

enum class SeqAction : std::uint8_t { NextTriad, Branch, Complete, Unknown };

struct SeqActionEntry {
  SeqAction action;
  std::string_view name;
  std::uint8_t code;  // 3-bit, bits 16..14
};

inline constexpr std::array<SeqActionEntry, 3> kSeqActions{{
    {SeqAction::NextTriad, "next_triad", 0b000},
    {SeqAction::Branch, "branch", 0b010},
    {SeqAction::Complete, "complete", 0b110},
}};

inline constexpr std::uint8_t kSeqActionLsb = 14;
inline constexpr std::uint8_t kSeqActionWidth = 3;
inline constexpr std::uint8_t kSeqAddressLsb = 0;
inline constexpr std::uint8_t kSeqAddressWidth = 12;

// Condition selector: bits 4..1 of cc index this table, bit 0 inverts.
// Provisional: the real encodings were never published in full. Entries
// 8..15 are reserved and have no mnemonic beyond "cc<n>".
struct ConditionEntry {
  std::string_view mnemonic;
  std::uint8_t selector;  // 4-bit
};

inline constexpr std::array<ConditionEntry, 8> kConditions{{
    {"T", 0},
    {"ZF", 1},
    {"CF", 2},
    {"SF", 3},
    {"OF", 4},
    {"BE", 5},  // CF | ZF
    {"LT", 6},  // SF != OF
    {"LE", 7},  // ZF | (SF != OF)
}};

inline constexpr std::uint8_t kCcInvertBit = 0b00001;

}  // namespace ucode::tables
