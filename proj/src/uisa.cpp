#include "ucode/uisa.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <string>

#include "ucode/error.hpp"

namespace ucode {

namespace {

using tables::Field;
using tables::FieldSpec;

constexpr std::uint64_t field_mask(const FieldSpec& f) {
  return ((std::uint64_t{1} << f.width) - 1) << f.lsb;
}

std::span<const FieldSpec> layout_for(OpClass op_class) noexcept {
  switch (op_class) {
    case OpClass::RegOp:
      return tables::kRegOpLayout;
    case OpClass::LdOp:
      return tables::kLdOpLayout;
    case OpClass::StOp:
      return tables::kStOpLayout;
    case OpClass::SpecOp:
      return tables::kSpecOpLayout;
    case OpClass::Unknown:
      break;
  }
  return tables::kUnknownClassLayout;
}

std::uint64_t get_field(const Microinstruction& m, Field f) {
  switch (f) {
    case Field::Type: return m.type;
    case Field::Cc: return m.cc;
    case Field::Swap: return m.sw;
    case Field::ThreeOp: return m.three_operand;
    case Field::Reg1: return m.reg1;
    case Field::Flags: return m.flags;
    case Field::Class: return m.class_code;
    case Field::Size: return m.size;
    case Field::Reg2: return m.reg2;
    case Field::Rmod: return m.rmod;
    case Field::Imm: return m.imm;
  }
  return 0;
}

void set_field(Microinstruction& m, Field f, std::uint64_t v) {
  switch (f) {
    case Field::Type: m.type = static_cast<std::uint16_t>(v); break;
    case Field::Cc: m.cc = static_cast<std::uint8_t>(v); break;
    case Field::Swap: m.sw = v != 0; break;
    case Field::ThreeOp: m.three_operand = v != 0; break;
    case Field::Reg1: m.reg1 = static_cast<std::uint8_t>(v); break;
    case Field::Flags: m.flags = static_cast<std::uint8_t>(v); break;
    case Field::Class: m.class_code = static_cast<std::uint8_t>(v); break;
    case Field::Size: m.size = static_cast<std::uint8_t>(v); break;
    case Field::Reg2: m.reg2 = static_cast<std::uint8_t>(v); break;
    case Field::Rmod: m.rmod = v != 0; break;
    case Field::Imm: m.imm = static_cast<std::uint16_t>(v); break;
  }
}

// Fields that a class does not have must stay zero when encoding, otherwise
// they would silently vanish.
bool class_has_field(OpClass op_class, Field f) {
  auto layout = layout_for(op_class);
  return std::any_of(layout.begin(), layout.end(), [f](const FieldSpec& s) { return s.field == f; });
}

constexpr std::uint8_t kClassLsb = 37;
constexpr std::uint64_t kClassMask = std::uint64_t{0b111} << kClassLsb;
constexpr std::uint8_t kType9Lsb = 54;
constexpr std::uint64_t kType9Mask = std::uint64_t{0x1ff} << kType9Lsb;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// registers

RegisterName lookup_register(std::string_view mnemonic) {
  const std::string name = lower(mnemonic);
  auto search = [&](auto const& rows) -> std::optional<RegisterName> {
    for (const auto& row : rows) {
      for (std::uint8_t size = 0; size < 4; ++size) {
        if (row.names[size] == name) return RegisterName{row.code, size};
      }
    }
    return std::nullopt;
  };
  if (auto r = search(tables::kRegisters)) return *r;
  if (auto r = search(tables::kRegisterExtensions)) return *r;
  throw Error(ErrorCode::UnknownMnemonic, fmt::format("unknown register '{}'", mnemonic));
}

std::optional<std::string_view> register_mnemonic(std::uint8_t code, std::uint8_t size) {
  if (size > 3) return std::nullopt;
  for (const auto& row : tables::kRegisters) {
    if (row.code == code) return row.names[size];
  }
  for (const auto& row : tables::kRegisterExtensions) {
    if (row.code == code) return row.names[size];
  }
  return std::nullopt;
}

std::optional<std::string_view> register_mnemonic(RegisterName reg) {
  return register_mnemonic(reg.code, reg.size);
}

// ---------------------------------------------------------------------------
// op types

OpClass classify(std::uint8_t class_code, std::uint16_t type9) noexcept {
  switch (class_code) {
    case tables::kClassCodeLd:
      return OpClass::LdOp;
    case tables::kClassCodeSt:
      return OpClass::StOp;
    case tables::kClassCodeRegSpec: {
      for (const auto& e : tables::kOpTypes) {
        if (e.op_class != OpClass::SpecOp) continue;
        if ((type9 >> 5) == (e.encoding >> 5)) return OpClass::SpecOp;
      }
      return OpClass::RegOp;
    }
    default:
      return OpClass::Unknown;
  }
}

const tables::OpTypeEntry* find_op_type(OpClass op_class, std::uint16_t type, std::uint8_t /*cc*/) noexcept {
  for (const auto& e : tables::kOpTypes) {
    if (e.op_class != op_class) continue;
    if (op_class == OpClass::SpecOp) {
      // SpecOp keeps only the 4-bit type; the cc field is separate.
      if ((e.encoding >> 5) == type) return &e;
    } else if (e.encoding == type) {
      return &e;
    }
  }
  return nullptr;
}

const tables::OpTypeEntry* find_op_type(std::string_view mnemonic) noexcept {
  const std::string name = lower(mnemonic);
  for (const auto& e : tables::kOpTypes) {
    if (lower(e.mnemonic) == name) return &e;
  }
  return nullptr;
}

const tables::OpTypeEntry& op_type_entry(OpKind kind) {
  for (const auto& e : tables::kOpTypes) {
    if (e.kind == kind) return e;
  }
  throw Error(ErrorCode::UnknownMnemonic, "no table entry for unrecognized op kind");
}

OpKind Microinstruction::kind() const noexcept {
  const auto* e = find_op_type(op_class, type, cc);
  return e ? e->kind : OpKind::Unrecognized;
}

std::uint64_t known_field_mask(OpClass op_class) noexcept {
  std::uint64_t mask = 0;
  for (const auto& f : layout_for(op_class)) mask |= field_mask(f);
  return mask;
}

// ---------------------------------------------------------------------------
// microinstruction codec

Microinstruction decode_microinstruction(std::uint64_t word) noexcept {
  Microinstruction m;
  const auto class_code = static_cast<std::uint8_t>((word & kClassMask) >> kClassLsb);
  const auto type9 = static_cast<std::uint16_t>((word & kType9Mask) >> kType9Lsb);
  m.op_class = classify(class_code, type9);
  for (const auto& f : layout_for(m.op_class)) {
    set_field(m, f.field, (word & field_mask(f)) >> f.lsb);
  }
  m.raw_unknown = word & ~known_field_mask(m.op_class);
  return m;
}

std::uint64_t encode_microinstruction(const Microinstruction& insn) {
  const auto layout = layout_for(insn.op_class);
  std::uint64_t word = 0;
  for (const auto& f : layout) {
    const std::uint64_t v = get_field(insn, f.field);
    if (v >> f.width) {
      throw Error(ErrorCode::FieldOverflow,
                  fmt::format("field '{}' value {:#x} exceeds {} bits", f.name, v, f.width));
    }
    word |= v << f.lsb;
  }
  for (Field f : {Field::Cc, Field::Flags, Field::Size, Field::Rmod}) {
    if (!class_has_field(insn.op_class, f) && get_field(insn, f) != 0) {
      throw Error(ErrorCode::FieldOverflow, "field not present in this operation class is nonzero");
    }
  }
  const std::uint64_t known = known_field_mask(insn.op_class);
  if (insn.raw_unknown & known) {
    throw Error(ErrorCode::FieldOverflow, "raw_unknown overlaps decoded fields");
  }
  word |= insn.raw_unknown;

  // The class must survive a decode, otherwise the layout changes under us.
  const auto type9 = static_cast<std::uint16_t>((word & kType9Mask) >> kType9Lsb);
  if (classify(insn.class_code, type9) != insn.op_class) {
    throw Error(ErrorCode::FieldOverflow,
                fmt::format("class code {:#05b} with type {:#011b} does not decode as the requested class",
                            insn.class_code, type9));
  }
  return word;
}

// ---------------------------------------------------------------------------
// sequence words

namespace {

constexpr std::uint32_t kSeqActionMask = 0b111u << tables::kSeqActionLsb;
constexpr std::uint32_t kSeqAddressMask = 0xfffu;

SeqAction action_for(std::uint8_t code) {
  for (const auto& e : tables::kSeqActions) {
    if (e.code == code) return e.action;
  }
  return SeqAction::Unknown;
}

}  // namespace

SequenceWord decode_sequence_word(std::uint32_t word) noexcept {
  SequenceWord sw;
  sw.action_code = static_cast<std::uint8_t>((word & kSeqActionMask) >> tables::kSeqActionLsb);
  sw.action = action_for(sw.action_code);
  std::uint32_t known = kSeqActionMask;
  if (sw.action == SeqAction::Branch) {
    sw.address = static_cast<std::uint16_t>(word & kSeqAddressMask);
    known |= kSeqAddressMask;
  }
  sw.raw_unknown = word & ~known;
  return sw;
}

std::uint32_t encode_sequence_word(const SequenceWord& sw) {
  if (sw.action_code > 0b111) {
    throw Error(ErrorCode::FieldOverflow, "sequence word action exceeds 3 bits");
  }
  if (sw.action != action_for(sw.action_code)) {
    throw Error(ErrorCode::FieldOverflow, "sequence word action does not match its action code");
  }
  if (sw.address > kSeqAddressMask) {
    throw Error(ErrorCode::FieldOverflow, fmt::format("branch address {:#x} exceeds 12 bits", sw.address));
  }
  std::uint32_t known = kSeqActionMask;
  std::uint32_t word = std::uint32_t{sw.action_code} << tables::kSeqActionLsb;
  if (sw.action == SeqAction::Branch) {
    known |= kSeqAddressMask;
    word |= sw.address;
  } else if (sw.address != 0) {
    throw Error(ErrorCode::FieldOverflow, "address set on a non-branch sequence word");
  }
  if (sw.raw_unknown & known) {
    throw Error(ErrorCode::FieldOverflow, "raw_unknown overlaps decoded sequence word fields");
  }
  return word | sw.raw_unknown;
}

// ---------------------------------------------------------------------------
// triads

namespace {

template <typename T>
void put_le(std::uint8_t* p, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

}  // namespace

void write_triad(const Triad& triad, std::span<std::uint8_t, kTriadBytes> out) {
  for (std::size_t i = 0; i < 3; ++i) put_le(out.data() + 8 * i, encode_microinstruction(triad.insns[i]));
  put_le(out.data() + 24, encode_sequence_word(triad.seq));
}

Triad read_triad(std::span<const std::uint8_t, kTriadBytes> in) noexcept {
  Triad t;
  for (std::size_t i = 0; i < 3; ++i) t.insns[i] = decode_microinstruction(get_le<std::uint64_t>(in.data() + 8 * i));
  t.seq = decode_sequence_word(get_le<std::uint32_t>(in.data() + 24));
  return t;
}

Microinstruction nop_encoding() noexcept {
  Microinstruction m;
  m.op_class = OpClass::RegOp;
  m.class_code = tables::kClassCodeRegSpec;
  m.type = 0b000000001;  // or
  m.three_operand = true;
  m.reg1 = 0b111111;
  m.reg2 = 0b111111;
  m.size = tables::kSizeDword;
  m.rmod = false;
  m.imm = 0b111111;
  return m;
}

bool is_nop(const Microinstruction& insn) noexcept { return insn == nop_encoding(); }

Triad nop_triad(SequenceWord seq) noexcept {
  Triad t;
  t.insns.fill(nop_encoding());
  t.seq = seq;
  return t;
}

// ---------------------------------------------------------------------------
// condition codes

std::string condition_mnemonic(std::uint8_t cc) {
  const std::uint8_t selector = (cc >> 1) & 0xf;
  const bool inverted = (cc & tables::kCcInvertBit) != 0;
  std::string base = fmt::format("CC{}", selector);
  for (const auto& c : tables::kConditions) {
    if (c.selector == selector) base = std::string(c.mnemonic);
  }
  return inverted ? "n" + base : base;
}

std::optional<std::uint8_t> parse_condition(std::string_view text) {
  bool inverted = false;
  if (text.size() > 1 && text.front() == 'n') {
    inverted = true;
    text.remove_prefix(1);
  }
  std::optional<std::uint8_t> selector;
  for (const auto& c : tables::kConditions) {
    if (c.mnemonic == text) selector = c.selector;
  }
  if (!selector && text.size() > 2 && text.substr(0, 2) == "CC") {
    unsigned v = 0;
    for (char ch : text.substr(2)) {
      if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
      v = v * 10 + static_cast<unsigned>(ch - '0');
      if (v > 15) return std::nullopt;
    }
    selector = static_cast<std::uint8_t>(v);
  }
  if (!selector) return std::nullopt;
  return static_cast<std::uint8_t>((*selector << 1) | (inverted ? 1 : 0));
}

// ---------------------------------------------------------------------------
// bulk kernels

std::vector<Microinstruction> decode_words_serial(std::span<const std::uint64_t> words) {
  std::vector<Microinstruction> out(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) out[i] = decode_microinstruction(words[i]);
  return out;
}

std::vector<Microinstruction> decode_words(std::span<const std::uint64_t> words) {
  std::vector<Microinstruction> out(words.size());
  const auto n = static_cast<std::ptrdiff_t>(words.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = decode_microinstruction(words[i]);
  return out;
}

std::size_t count_roundtrip_failures_serial(std::span<const std::uint64_t> words) {
  std::size_t failures = 0;
  for (auto w : words) {
    if (encode_microinstruction(decode_microinstruction(w)) != w) ++failures;
  }
  return failures;
}

std::size_t count_roundtrip_failures(std::span<const std::uint64_t> words) {
  const auto n = static_cast<std::ptrdiff_t>(words.size());
  std::size_t failures = 0;
#pragma omp parallel for schedule(static) reduction(+ : failures)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (encode_microinstruction(decode_microinstruction(words[i])) != words[i]) ++failures;
  }
  return failures;
}

}  // namespace ucode
