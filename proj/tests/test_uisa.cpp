#include <doctest.h>

#include <random>

#include "ucode/rtl.hpp"
#include "ucode/uisa.hpp"

using namespace ucode;

namespace {

// Reference words packed field by field by a separate script.
constexpr std::uint64_t kMovT1dImm42 = 0x1802000080800042ull;
constexpr std::uint64_t kJccNzfFe5 = 0x28c0000000000fe5ull;
constexpr std::uint64_t kNop = 0x005fc000bf00003full;

std::uint64_t assemble_one(std::string_view text) {
  auto program = rtl::parse_program(text);
  REQUIRE(program.statements.size() == 1);
  return encode_microinstruction(rtl::encode_statement(program.statements.front()));
}

}  // namespace

TEST_CASE("reference encodings") {
  CHECK(assemble_one("mov t1d, 0x0042") == kMovT1dImm42);
  CHECK(assemble_one("jcc nZF, 0xfe5") == kJccNzfFe5);
  CHECK(encode_microinstruction(nop_encoding()) == kNop);
  CHECK(assemble_one("nop") == kNop);
}

TEST_CASE("decode exposes every field") {
  const auto m = decode_microinstruction(kMovT1dImm42);
  CHECK(m.op_class == OpClass::RegOp);
  CHECK(m.kind() == OpKind::Mov);
  CHECK(m.reg1 == 0b001000);
  CHECK(m.size == tables::kSizeDword);
  CHECK(m.rmod);
  CHECK(m.imm == 0x42);
  CHECK(m.raw_unknown == 0);

  const auto j = decode_microinstruction(kJccNzfFe5);
  CHECK(j.op_class == OpClass::SpecOp);
  CHECK(j.kind() == OpKind::BranchCc);
  CHECK(j.cc == 0b00011);
  CHECK(j.imm == 0xfe5);
}

TEST_CASE("all-zero word is add al, al") {
  const auto m = decode_microinstruction(0);
  CHECK(m.kind() == OpKind::Add);
  CHECK(rtl::disassemble_insn(m, 0) == "add al, al");
}

TEST_CASE("unknown bits survive a round trip") {
  const std::uint64_t w = kMovT1dImm42 | (1ull << 63) | (1ull << 44) | (1ull << 20);
  const auto m = decode_microinstruction(w);
  CHECK(m.raw_unknown == ((1ull << 63) | (1ull << 44) | (1ull << 20)));
  CHECK(encode_microinstruction(m) == w);
}

TEST_CASE("unknown classes decode with the shared layout") {
  const std::uint64_t w = (0b101ull << 37) | (0x1ffull << 54) | 0x1234;
  const auto m = decode_microinstruction(w);
  CHECK(m.op_class == OpClass::Unknown);
  CHECK(m.class_code == 0b101);
  CHECK(m.kind() == OpKind::Unrecognized);
  CHECK(encode_microinstruction(m) == w);
  CHECK(rtl::disassemble_insn(m, 0).rfind(".raw", 0) == 0);
}

TEST_CASE("encode rejects out-of-range fields") {
  Microinstruction m = nop_encoding();
  m.reg1 = 64;
  CHECK_THROWS_AS(encode_microinstruction(m), Error);
  m = nop_encoding();
  m.size = 8;
  CHECK_THROWS_AS(encode_microinstruction(m), Error);
  m = nop_encoding();
  m.type = 0x200;
  CHECK_THROWS_AS(encode_microinstruction(m), Error);
}

TEST_CASE("sequence words") {
  CHECK(encode_sequence_word(SequenceWord::next_triad()) == 0);
  CHECK(encode_sequence_word(SequenceWord::complete()) == (0b110u << 14));
  CHECK(encode_sequence_word(SequenceWord::branch(0x7e6)) == ((0b010u << 14) | 0x7e6));
  const auto odd = decode_sequence_word(0b111u << 14);
  CHECK(odd.action == SeqAction::Unknown);
  CHECK(encode_sequence_word(odd) == (0b111u << 14));
  const auto with_junk = decode_sequence_word((1u << 31) | 0x123);
  CHECK(with_junk.action == SeqAction::NextTriad);
  CHECK(encode_sequence_word(with_junk) == ((1u << 31) | 0x123));
  SequenceWord too_far = SequenceWord::branch(0x1000);
  CHECK_THROWS_AS(encode_sequence_word(too_far), Error);
}

TEST_CASE("registers resolve by name") {
  CHECK(lookup_register("eax") == RegisterName{0, tables::kSizeDword});
  CHECK(lookup_register("t4h") == RegisterName{0b001111, tables::kSizeByte});
  CHECK(lookup_register("regmd4") == RegisterName{0b101010, tables::kSizeDword});
  CHECK(lookup_register("regmd6") == RegisterName{0b101011, tables::kSizeDword});
  CHECK(lookup_register("ZEROD") == RegisterName{0b111111, tables::kSizeDword});
  CHECK_THROWS_AS(lookup_register("t9d"), Error);
  CHECK(*register_mnemonic(0b111000, tables::kSizeDword) == "pcd");
  CHECK_FALSE(register_mnemonic(0b110000, tables::kSizeDword).has_value());
}

TEST_CASE("condition mnemonics") {
  CHECK(condition_mnemonic(0b00010) == "ZF");
  CHECK(condition_mnemonic(0b00011) == "nZF");
  CHECK(*parse_condition("nZF") == 0b00011);
  CHECK(*parse_condition(condition_mnemonic(0b10001)) == 0b10001);
  CHECK_FALSE(parse_condition("XYZ").has_value());
}

TEST_CASE("triad byte image") {
  Triad t = nop_triad(SequenceWord::branch(0x7e6));
  t.insns[0] = decode_microinstruction(kMovT1dImm42);
  std::array<std::uint8_t, kTriadBytes> bytes{};
  write_triad(t, bytes);
  CHECK(bytes[0] == 0x42);
  CHECK(bytes[7] == 0x18);
  CHECK(bytes[24] == 0xe6);
  CHECK(bytes[25] == 0x87);
  CHECK(read_triad(bytes) == t);
}

TEST_CASE("bulk kernels agree with their serial references") {
  std::mt19937_64 rng(7);
  std::vector<std::uint64_t> words(50000);
  for (auto& w : words) w = rng();
  CHECK(decode_words(words) == decode_words_serial(words));
  CHECK(count_roundtrip_failures(words) == 0);
  CHECK(count_roundtrip_failures_serial(words) == 0);
}
