#include <fmt/format.h>

#include "ucode/rtl.hpp"

namespace ucode::rtl {

namespace {

constexpr std::uint8_t kFlagsCommit = 0b11;

bool is_unary(OpKind k) { return k == OpKind::Not || k == OpKind::Bswap; }

bool default_commit(OpKind k) { return k == OpKind::Cmp || k == OpKind::Test; }

const Operand& require(const RtlStatement& s, std::size_t i, Operand::Kind kind, const char* what) {
  const Operand& op = s.operands.at(i);
  if (op.kind != kind) {
    throw RtlError(ErrorCode::Syntax, s.location,
                   fmt::format("operand {} of '{}' must be {}, got '{}'", i + 1, s.mnemonic, what, op.text));
  }
  return op;
}

void require_dword(const RtlStatement& s, const Operand& op) {
  if (op.reg.size != tables::kSizeDword) {
    throw RtlError(ErrorCode::Syntax, s.location,
                   fmt::format("'{}' in '{}' must be a 32-bit register", op.text, s.mnemonic));
  }
}

std::uint16_t checked_imm16(const RtlStatement& s, const Operand& op) {
  if (op.value > 0xffff) {
    throw RtlError(ErrorCode::Constraint, s.location,
                   fmt::format("immediate {} exceeds 16 bits; build it with sll/add", op.text));
  }
  return static_cast<std::uint16_t>(op.value);
}

Microinstruction encode_regop(const RtlStatement& s, const tables::OpTypeEntry& e) {
  Microinstruction m;
  m.op_class = OpClass::RegOp;
  m.class_code = tables::kClassCodeRegSpec;
  m.type = e.encoding;
  const bool commit = s.commit_flags.value_or(default_commit(e.kind));
  m.flags = commit ? kFlagsCommit : 0;

  const auto n = s.operands.size();
  const std::size_t min_ops = is_unary(e.kind) ? 1 : 2;
  const std::size_t max_ops = is_unary(e.kind) ? 2 : 3;
  if (n < min_ops || n > max_ops) {
    throw RtlError(ErrorCode::Syntax, s.location,
                   fmt::format("'{}' takes {} to {} operands, got {}", s.mnemonic, min_ops, max_ops, n));
  }
  for (std::size_t i = 0; i + 1 < n; ++i) require(s, i, Operand::Kind::Register, "a register");
  const Operand& dst = s.operands[0];
  m.size = dst.reg.size;
  for (const auto& op : s.operands) {
    if (op.kind == Operand::Kind::Register && op.reg.size != dst.reg.size) {
      throw RtlError(ErrorCode::Syntax, s.location,
                     fmt::format("operand '{}' does not match the destination size of '{}'", op.text, dst.text));
    }
    if (op.kind == Operand::Kind::Memory || op.kind == Operand::Kind::Condition) {
      throw RtlError(ErrorCode::Syntax, s.location, fmt::format("'{}' takes no memory or condition operands", s.mnemonic));
    }
  }

  auto set_source = [&](const Operand& src) {
    if (src.kind == Operand::Kind::Immediate) {
      m.rmod = true;
      m.imm = checked_imm16(s, src);
    } else {
      m.rmod = false;
      m.imm = src.reg.code;
    }
  };

  if (is_unary(e.kind)) {
    if (n == 1) {
      m.reg1 = dst.reg.code;
    } else {
      require(s, 1, Operand::Kind::Register, "a register");
      m.three_operand = true;
      m.reg2 = dst.reg.code;
      m.reg1 = s.operands[1].reg.code;
    }
    return m;
  }

  if (n == 2) {
    m.reg1 = dst.reg.code;
    set_source(s.operands[1]);
  } else {
    m.three_operand = true;
    m.reg2 = dst.reg.code;
    m.reg1 = s.operands[1].reg.code;
    set_source(s.operands[2]);
  }
  return m;
}

}  // namespace

Microinstruction encode_statement(const RtlStatement& s) {
  if (s.kind != StatementKind::Instruction) {
    throw RtlError(ErrorCode::Syntax, s.location, fmt::format("'{}' is not an instruction", s.mnemonic));
  }
  if (s.mnemonic == "nop") return nop_encoding();
  if (s.mnemonic == ".raw") return decode_microinstruction(s.operands[0].value);

  if (s.mnemonic == "jcc") {
    if (s.operands.size() != 2) throw RtlError(ErrorCode::Syntax, s.location, "jcc takes a condition and a target");
    const auto& cond = require(s, 0, Operand::Kind::Condition, "a condition");
    const auto& target = require(s, 1, Operand::Kind::Immediate, "a triad address");
    if (target.value > kAddressMask) {
      throw RtlError(ErrorCode::AddressRange, s.location,
                     fmt::format("branch target {} exceeds 12 bits", target.text));
    }
    const auto& e = op_type_entry(OpKind::BranchCc);
    Microinstruction m;
    m.op_class = OpClass::SpecOp;
    m.class_code = tables::kClassCodeRegSpec;
    m.type = e.encoding >> 5;
    m.cc = static_cast<std::uint8_t>(cond.value);
    m.imm = static_cast<std::uint16_t>(target.value);
    return m;
  }

  const auto* e = find_op_type(s.mnemonic);
  if (e == nullptr) throw RtlError(ErrorCode::UnknownMnemonic, s.location, fmt::format("unknown mnemonic '{}'", s.mnemonic));

  switch (e->op_class) {
    case OpClass::RegOp:
      return encode_regop(s, *e);
    case OpClass::LdOp: {
      if (s.operands.size() != 2) throw RtlError(ErrorCode::Syntax, s.location, "ld takes a register and [register]");
      const auto& dst = require(s, 0, Operand::Kind::Register, "a register");
      const auto& addr = require(s, 1, Operand::Kind::Memory, "a memory operand");
      require_dword(s, dst);
      require_dword(s, addr);
      Microinstruction m;
      m.op_class = OpClass::LdOp;
      m.class_code = tables::kClassCodeLd;
      m.type = e->encoding;
      m.reg1 = dst.reg.code;
      m.imm = addr.reg.code;
      return m;
    }
    case OpClass::StOp: {
      if (s.operands.size() != 2) throw RtlError(ErrorCode::Syntax, s.location, "st takes [register] and a register");
      const auto& addr = require(s, 0, Operand::Kind::Memory, "a memory operand");
      const auto& src = require(s, 1, Operand::Kind::Register, "a register");
      require_dword(s, addr);
      Microinstruction m;
      m.op_class = OpClass::StOp;
      m.class_code = tables::kClassCodeSt;
      m.type = e->encoding;
      m.size = src.reg.size;
      m.reg1 = addr.reg.code;
      m.imm = src.reg.code;
      return m;
    }
    case OpClass::SpecOp: {
      // writePC; branchCC is spelled jcc and handled above.
      if (s.operands.size() != 1) throw RtlError(ErrorCode::Syntax, s.location, "writePC takes one register");
      const auto& src = require(s, 0, Operand::Kind::Register, "a register");
      require_dword(s, src);
      Microinstruction m;
      m.op_class = OpClass::SpecOp;
      m.class_code = tables::kClassCodeRegSpec;
      m.type = e->encoding >> 5;
      m.reg1 = src.reg.code;
      m.size = src.reg.size;
      return m;
    }
    case OpClass::Unknown:
      break;
  }
  throw RtlError(ErrorCode::UnknownMnemonic, s.location, fmt::format("cannot encode '{}'", s.mnemonic));
}

namespace {

bool needs_slot0(const Microinstruction& m, const RtlStatement& s) {
  if (s.mnemonic == ".raw") return false;
  const auto k = m.kind();
  return k == OpKind::Mul || k == OpKind::Imul;
}

bool needs_slot2(const Microinstruction& m, const RtlStatement& s) {
  return s.mnemonic != ".raw" && m.kind() == OpKind::WritePc;
}

// Packs statements into triads. A triad stays "current" after it fills up so
// that a following sequence directive still applies to it.
class Packer {
 public:
  explicit Packer(AssembledProgram& out) : out_(out) {}

  void instruction(const RtlStatement& s) {
    const Microinstruction m = encode_statement(s);
    if (needs_slot0(m, s)) {
      if (!slots_.empty()) flush(s.location);
    } else if (needs_slot2(m, s)) {
      if (slots_.size() == 3) flush(s.location);
      while (slots_.size() < 2) slots_.push_back(nop_encoding());
    } else if (slots_.size() == 3) {
      flush(s.location);
    }
    slots_.push_back(m);
  }

  void bundle(const std::vector<const RtlStatement*>& group) {
    const SourceLocation loc = group.front()->location;
    if (!slots_.empty()) flush(loc);
    for (std::size_t i = 0; i < group.size(); ++i) {
      const RtlStatement& s = *group[i];
      const Microinstruction m = encode_statement(s);
      if (needs_slot0(m, s) && !slots_.empty()) {
        throw RtlError(ErrorCode::Constraint, s.location,
                       fmt::format("'{}' must be the first microinstruction of its triad", s.mnemonic));
      }
      if (needs_slot2(m, s)) {
        if (i + 1 != group.size()) {
          throw RtlError(ErrorCode::Constraint, s.location, "writePC must be the last microinstruction of its triad");
        }
        while (slots_.size() < 2) slots_.push_back(nop_encoding());
      }
      if (slots_.size() == 3) {
        throw RtlError(ErrorCode::Constraint, s.location, "explicit triad needs more than three slots");
      }
      slots_.push_back(m);
    }
    while (slots_.size() < 3) slots_.push_back(nop_encoding());
  }

  void sequence(const RtlStatement& s, SequenceWord seq) {
    if (slots_.empty()) slots_.assign(3, nop_encoding());
    seq_ = seq;
    flush(s.location);
  }

  void origin(const RtlStatement& s, std::uint32_t address) {
    if (!slots_.empty()) flush(s.location);
    if (address > kAddressMask) {
      throw RtlError(ErrorCode::AddressRange, s.location, fmt::format("origin {:#x} is outside the triad space", address));
    }
    address_ = address;
  }

  void finish(SourceLocation loc) {
    if (!slots_.empty()) flush(loc);
  }

 private:
  void flush(SourceLocation loc) {
    if (address_ > kAddressMask) {
      throw RtlError(ErrorCode::AddressRange, loc, "program runs past the end of the triad space");
    }
    Triad t;
    for (std::size_t i = 0; i < 3; ++i) t.insns[i] = i < slots_.size() ? slots_[i] : nop_encoding();
    t.seq = seq_;
    const auto addr = static_cast<std::uint16_t>(address_);
    if (!out_.triads.emplace(addr, t).second) {
      throw RtlError(ErrorCode::Constraint, loc, fmt::format("triad {:#05x} is placed twice", addr));
    }
    ++address_;
    slots_.clear();
    seq_ = SequenceWord::next_triad();
  }

  AssembledProgram& out_;
  std::vector<Microinstruction> slots_;
  SequenceWord seq_ = SequenceWord::next_triad();
  std::uint32_t address_ = kPatchBase;
};

std::uint16_t branch_target(const RtlStatement& s) {
  const auto v = s.operands[0].value;
  if (v > kAddressMask) {
    throw RtlError(ErrorCode::AddressRange, s.location, fmt::format("branch target {} exceeds 12 bits", s.operands[0].text));
  }
  return static_cast<std::uint16_t>(v);
}

}  // namespace

AssembledProgram assemble(const RtlProgram& program) {
  AssembledProgram out;
  out.match_pragmas = program.match_pragmas;
  Packer packer(out);

  const auto& stmts = program.statements;
  for (std::size_t i = 0; i < stmts.size(); ++i) {
    const RtlStatement& s = stmts[i];
    if (s.bundle) {
      std::vector<const RtlStatement*> group{&s};
      while (i + 1 < stmts.size() && stmts[i + 1].bundle == s.bundle) group.push_back(&stmts[++i]);
      packer.bundle(group);
      continue;
    }
    if (s.kind == StatementKind::Instruction) {
      packer.instruction(s);
    } else if (s.mnemonic == ".start") {
      if (s.operands[0].value > kAddressMask - kPatchBase) {
        throw RtlError(ErrorCode::AddressRange, s.location, "patch start index exceeds patch RAM");
      }
      packer.origin(s, static_cast<std::uint32_t>(kPatchBase + s.operands[0].value));
    } else if (s.mnemonic == ".org") {
      packer.origin(s, static_cast<std::uint32_t>(std::min<std::uint64_t>(s.operands[0].value, 0x10000)));
    } else if (s.mnemonic == ".sw_complete") {
      packer.sequence(s, SequenceWord::complete());
    } else if (s.mnemonic == ".sw_next") {
      packer.sequence(s, SequenceWord::next_triad());
    } else if (s.mnemonic == ".sw_branch") {
      packer.sequence(s, SequenceWord::branch(branch_target(s)));
    } else if (s.mnemonic == ".sw_raw") {
      if (s.operands[0].value > 0xffffffffu) throw RtlError(ErrorCode::FieldOverflow, s.location, "sequence word exceeds 32 bits");
      packer.sequence(s, decode_sequence_word(static_cast<std::uint32_t>(s.operands[0].value)));
    }
  }
  packer.finish(stmts.empty() ? SourceLocation{} : stmts.back().location);
  return out;
}

AssembledProgram assemble_text(std::string_view text) { return assemble(parse_program(text)); }

std::vector<Triad> AssembledProgram::patch_triads() const {
  std::vector<Triad> out;
  if (triads.empty()) return out;
  if (triads.begin()->first < kPatchBase) {
    throw Error(ErrorCode::AddressRange,
                fmt::format("triad {:#05x} is in ROM, not patch RAM", triads.begin()->first));
  }
  const std::size_t count = triads.rbegin()->first - kPatchBase + 1;
  out.assign(count, nop_triad(SequenceWord::complete()));
  for (const auto& [addr, t] : triads) out[addr - kPatchBase] = t;
  return out;
}

UpdateFile make_update(const AssembledProgram& program, std::span<const MatchPragma> overrides) {
  UpdateFile u;
  u.triads = program.patch_triads();
  if (u.triads.size() > kMaxTriads) {
    throw Error(ErrorCode::TooManyTriads, fmt::format("{} triads do not fit an update file", u.triads.size()));
  }
  u.header.len = static_cast<std::uint8_t>(u.triads.size());
  for (const auto& p : program.match_pragmas) u.match_registers.at(p.index) = p.address;
  for (const auto& p : overrides) {
    if (p.index >= kMatchRegisterCount || p.address > kAddressMask) {
      throw Error(ErrorCode::AddressRange, fmt::format("invalid match register {}={:#x}", p.index, p.address));
    }
    u.match_registers[p.index] = p.address;
  }
  u.header.checksum = compute_checksum(u);
  return u;
}

}  // namespace ucode::rtl
