#include <fmt/format.h>

#include "ucode/rtl.hpp"

namespace ucode::rtl {

namespace {

std::optional<std::string> reg_name(std::uint8_t code, std::uint8_t size) {
  auto n = register_mnemonic(code, size);
  if (!n) return std::nullopt;
  return std::string(*n);
}

std::string imm_text(std::uint16_t v) { return fmt::format("{:#x}", v); }

// Best-effort rendering; the caller verifies it by reassembly.
std::optional<std::string> render(const Microinstruction& m) {
  if (is_nop(m)) return std::string("nop");
  const auto kind = m.kind();
  if (kind == OpKind::Unrecognized) return std::nullopt;
  const auto& entry = op_type_entry(kind);

  switch (m.op_class) {
    case OpClass::RegOp: {
      if (m.size > 3) return std::nullopt;
      std::string mnem(entry.mnemonic);
      const bool default_commit = kind == OpKind::Cmp || kind == OpKind::Test;
      if (m.flags == 0b11 && !default_commit) mnem += ".f";
      if (m.flags == 0 && default_commit) mnem += ".nf";

      auto src = [&]() -> std::optional<std::string> {
        if (m.rmod) return imm_text(m.imm);
        return reg_name(m.reg3(), m.size);
      };
      const auto r1 = reg_name(m.reg1, m.size);
      if (!r1) return std::nullopt;
      if (kind == OpKind::Not || kind == OpKind::Bswap) {
        if (!m.three_operand) return fmt::format("{} {}", mnem, *r1);
        const auto r2 = reg_name(m.reg2, m.size);
        if (!r2) return std::nullopt;
        return fmt::format("{} {}, {}", mnem, *r2, *r1);
      }
      const auto s = src();
      if (!s) return std::nullopt;
      if (!m.three_operand) return fmt::format("{} {}, {}", mnem, *r1, *s);
      const auto r2 = reg_name(m.reg2, m.size);
      if (!r2) return std::nullopt;
      return fmt::format("{} {}, {}, {}", mnem, *r2, *r1, *s);
    }
    case OpClass::LdOp: {
      const auto dst = reg_name(m.reg1, tables::kSizeDword);
      const auto addr = reg_name(m.reg3(), tables::kSizeDword);
      if (!dst || !addr) return std::nullopt;
      return fmt::format("ld {}, [{}]", *dst, *addr);
    }
    case OpClass::StOp: {
      const auto addr = reg_name(m.reg1, tables::kSizeDword);
      const auto src = m.size <= 3 ? reg_name(m.reg3(), m.size) : std::nullopt;
      if (!addr || !src) return std::nullopt;
      return fmt::format("st [{}], {}", *addr, *src);
    }
    case OpClass::SpecOp: {
      if (kind == OpKind::BranchCc) {
        return fmt::format("jcc {}, {}", condition_mnemonic(m.cc), imm_text(m.imm));
      }
      const auto src = m.size <= 3 ? reg_name(m.reg1, m.size) : std::nullopt;
      if (!src) return std::nullopt;
      return fmt::format("writePC {}", *src);
    }
    case OpClass::Unknown:
      break;
  }
  return std::nullopt;
}

bool reassembles_to(const std::string& text, const Microinstruction& m) {
  try {
    const auto program = parse_program(text);
    if (program.statements.size() != 1) return false;
    return encode_statement(program.statements.front()) == m;
  } catch (const Error&) {
    return false;
  }
}

std::string raw_line(const Microinstruction& m) {
  return fmt::format(".raw {:#018x}", encode_microinstruction(m));
}

std::string sequence_line(const SequenceWord& sw) {
  if (sw.raw_unknown == 0) {
    switch (sw.action) {
      case SeqAction::NextTriad:
        return {};
      case SeqAction::Complete:
        return ".sw_complete";
      case SeqAction::Branch:
        return fmt::format(".sw_branch {:#x}", sw.address);
      case SeqAction::Unknown:
        break;
    }
  }
  return fmt::format(".sw_raw {:#010x}", encode_sequence_word(sw));
}

}  // namespace

std::string disassemble_insn(const Microinstruction& insn, std::size_t slot) {
  const auto kind = insn.kind();
  if ((kind == OpKind::Mul || kind == OpKind::Imul) && slot != 0) return raw_line(insn);
  if (kind == OpKind::WritePc && slot != 2) return raw_line(insn);
  if (auto text = render(insn); text && reassembles_to(*text, insn)) return *text;
  return raw_line(insn);
}

std::string disassemble(std::span<const Triad> triads, std::uint16_t base_address, const DisasmOptions& options) {
  std::string out;
  if (base_address >= kPatchBase) {
    out += fmt::format(".start {:#x}\n", base_address - kPatchBase);
  } else {
    out += fmt::format(".org {:#x}\n", base_address);
  }
  for (std::size_t i = 0; i < triads.size(); ++i) {
    const auto& t = triads[i];
    if (options.addresses) out += fmt::format("// {:#05x}\n", base_address + i);
    for (std::size_t slot = 0; slot < 3; ++slot) {
      out += disassemble_insn(t.insns[slot], slot);
      out += '\n';
    }
    if (auto seq = sequence_line(t.seq); !seq.empty()) {
      out += seq;
      out += '\n';
    }
  }
  return out;
}

std::string disassemble_update(const UpdateFile& update, const DisasmOptions& options) {
  std::string out;
  for (std::size_t i = 0; i < update.match_registers.size(); ++i) {
    const auto v = update.match_registers[i];
    if (v == 0) continue;
    if (v <= kAddressMask) {
      out += fmt::format("// set match register {} to {:#x}\n", i, v);
    } else {
      out += fmt::format("// match register {} holds raw value {:#010x}\n", i, v);
    }
  }
  out += disassemble(update.triads, kPatchBase, options);
  return out;
}

}  // namespace ucode::rtl
