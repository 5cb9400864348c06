#include "ucode/engine.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "ucode/error.hpp"

namespace ucode {

namespace {

constexpr std::array<std::string_view, 8> kGprNames{"eax", "ecx", "edx", "ebx", "esp", "ebp", "esi", "edi"};
constexpr std::array<std::string_view, 8> kTempNames{"t1", "t2", "t3", "t4", "t5", "t6", "t7", "t8"};

constexpr std::uint8_t kCodeRegm = 0b101000;
constexpr std::uint8_t kCodeReg = 0b101100;
constexpr std::uint8_t kCodeRegm4 = tables::kRegisterExtensions[0].code;
constexpr std::uint8_t kCodeRegm6 = tables::kRegisterExtensions[1].code;
constexpr std::uint8_t kCodePc = 0b111000;
constexpr std::uint8_t kCodeZero = 0b111111;

std::uint32_t page_of(std::uint32_t address) { return address / Memory::kPageSize; }

Fault engine_fault(std::string detail) { return Fault{FaultKind::Engine, 0, Access::Read, std::move(detail)}; }

Fault page_fault(std::uint32_t address, Access access) {
  return Fault{FaultKind::PageFault, address, access, {}};
}

unsigned width_bits(std::uint8_t size) { return 8u << size; }

std::uint32_t width_mask(std::uint8_t size) {
  return size == tables::kSizeDword ? 0xffffffffu : (1u << width_bits(size)) - 1;
}

// Where a (code, size) register operand lives in the machine state.
struct Location {
  enum class Kind { Gpr, Temp, Pc, Zero } kind = Kind::Zero;
  std::size_t index = 0;
  unsigned shift = 0;  // 8 for the high-byte views
  std::uint32_t mask = 0xffffffffu;
};

struct Resolved {
  std::optional<Location> location;
  std::string error;
};

Resolved resolve_register(std::uint8_t code, std::uint8_t size, const MacroContext& ctx) {
  if (size == tables::kSizeQword) return {std::nullopt, "64-bit operand size is not supported in 32-bit mode"};
  if (size > tables::kSizeQword) return {std::nullopt, fmt::format("invalid operand size code {}", size)};

  if (code == kCodeRegm || code == kCodeRegm4 || code == kCodeReg || code == kCodeRegm6) {
    const bool first = code == kCodeRegm || code == kCodeRegm4;
    const auto& binding = first ? ctx.operand1 : ctx.operand2;
    if (!binding) {
      return {std::nullopt, fmt::format("macro operand {} is not bound in this context", first ? 1 : 2)};
    }
    code = static_cast<std::uint8_t>(*binding);
  }

  Location loc;
  loc.mask = width_mask(size);
  if (code < 8) {
    loc.kind = Location::Kind::Gpr;
    loc.index = code;
    if (size == tables::kSizeByte && code >= 4) {
      loc.index = code - 4u;
      loc.shift = 8;
    }
    return {loc, {}};
  }
  if (code < 16) {
    loc.kind = Location::Kind::Temp;
    loc.index = code - 8u;
    if (size == tables::kSizeByte && code >= 12) {
      loc.index = code - 12u;
      loc.shift = 8;
    }
    return {loc, {}};
  }
  if (code == kCodePc) {
    loc.kind = Location::Kind::Pc;
    return {loc, {}};
  }
  if (code == kCodeZero) {
    loc.kind = Location::Kind::Zero;
    return {loc, {}};
  }
  return {std::nullopt, fmt::format("register code {:#08b} is unassigned", code)};
}

std::uint32_t read_location(const MachineState& s, const MacroContext& ctx, const Location& loc) {
  std::uint32_t full = 0;
  switch (loc.kind) {
    case Location::Kind::Gpr: full = s.gprs[loc.index]; break;
    case Location::Kind::Temp: full = s.temps[loc.index]; break;
    case Location::Kind::Pc: full = ctx.next_pc; break;
    case Location::Kind::Zero: full = 0; break;
  }
  return (full >> loc.shift) & loc.mask;
}

void write_location(MachineState& s, const Location& loc, std::uint32_t value) {
  std::uint32_t* target = nullptr;
  if (loc.kind == Location::Kind::Gpr) target = &s.gprs[loc.index];
  if (loc.kind == Location::Kind::Temp) target = &s.temps[loc.index];
  if (!target) return;
  const std::uint32_t field = loc.mask << loc.shift;
  *target = (*target & ~field) | ((value & loc.mask) << loc.shift);
}

// Operand access for one instruction; the first failure is kept and later
// accesses become no-ops so execution can bail out before mutating state.
class Operands {
 public:
  Operands(MachineState& s, const MacroContext& ctx) : s_(s), ctx_(ctx) {}

  std::uint32_t read(std::uint8_t code, std::uint8_t size) {
    if (fault_) return 0;
    auto r = resolve_register(code, size, ctx_);
    if (!r.location) {
      fault_ = engine_fault(r.error);
      return 0;
    }
    return read_location(s_, ctx_, *r.location);
  }

  // Resolves the destination up front so a bad destination faults before
  // any side effect.
  std::optional<Location> destination(std::uint8_t code, std::uint8_t size) {
    if (fault_) return std::nullopt;
    auto r = resolve_register(code, size, ctx_);
    if (!r.location) {
      fault_ = engine_fault(r.error);
      return std::nullopt;
    }
    if (r.location->kind == Location::Kind::Pc) {
      fault_ = engine_fault("pc registers are read-only; use writePC");
      return std::nullopt;
    }
    return r.location;
  }

  std::optional<Fault>& fault() { return fault_; }

 private:
  MachineState& s_;
  const MacroContext& ctx_;
  std::optional<Fault> fault_;
};

InsnResult exec_regop(MachineState& s, const MacroContext& ctx, const Microinstruction& m, OpKind kind) {
  InsnResult result;
  if (m.size >= tables::kSizeQword) {
    result.fault = engine_fault(m.size == tables::kSizeQword ? "64-bit operand size is not supported in 32-bit mode"
                                                              : fmt::format("invalid operand size code {}", m.size));
    return result;
  }
  Operands ops(s, ctx);
  std::uint8_t src1 = m.reg1;
  std::uint8_t src2 = m.reg3();
  if (m.sw && !m.rmod) std::swap(src1, src2);

  const std::uint32_t a = ops.read(src1, m.size);
  const std::uint32_t b = m.rmod ? m.imm : ops.read(src2, m.size);
  const auto dest = ops.destination(m.three_operand ? m.reg2 : src1, m.size);
  if (ops.fault()) {
    result.fault = ops.fault();
    return result;
  }

  const auto r = alu_execute(kind, a, b, width_bits(m.size), s.flags);
  if (r.writes_destination) write_location(s, *dest, r.value);
  if (m.flags != 0) s.flags = r.flags;
  return result;
}

InsnResult exec_load(MachineState& s, const MacroContext& ctx, const Microinstruction& m) {
  InsnResult result;
  Operands ops(s, ctx);
  const std::uint32_t address = m.rmod ? m.imm : ops.read(m.reg3(), tables::kSizeDword);
  const auto dest = ops.destination(m.reg1, tables::kSizeDword);
  if (ops.fault()) {
    result.fault = ops.fault();
    return result;
  }
  if (auto bad = s.memory.first_unmapped(address, 4)) {
    result.fault = page_fault(*bad, Access::Read);
    return result;
  }
  std::uint32_t value = 0;
  for (std::uint32_t i = 0; i < 4; ++i) value |= std::uint32_t{*s.memory.read8(address + i)} << (8 * i);
  write_location(s, *dest, value);
  return result;
}

InsnResult exec_store(MachineState& s, const MacroContext& ctx, const Microinstruction& m,
                      std::vector<MemoryDelta>* log) {
  InsnResult result;
  if (m.size >= tables::kSizeQword) {
    result.fault = engine_fault(fmt::format("store size code {} is not supported", m.size));
    return result;
  }
  Operands ops(s, ctx);
  const std::uint32_t address = ops.read(m.reg1, tables::kSizeDword);
  const std::uint32_t value = m.rmod ? m.imm : ops.read(m.reg3(), m.size);
  if (ops.fault()) {
    result.fault = ops.fault();
    return result;
  }
  const std::uint32_t bytes = 1u << m.size;
  if (auto bad = s.memory.first_unmapped(address, bytes)) {
    result.fault = page_fault(*bad, Access::Write);
    return result;
  }
  for (std::uint32_t i = 0; i < bytes; ++i) {
    const auto before = *s.memory.read8(address + i);
    const auto after = static_cast<std::uint8_t>(value >> (8 * i));
    s.memory.write8(address + i, after);
    if (log) log->push_back({address + i, before, after});
  }
  return result;
}

InsnResult exec_special(MachineState& s, const MacroContext& ctx, const Microinstruction& m, OpKind kind) {
  InsnResult result;
  if (kind == OpKind::BranchCc) {
    bool valid = true;
    const bool taken = evaluate_condition(m.cc, s.flags, valid);
    if (!valid) {
      result.fault = engine_fault(fmt::format("condition {} is reserved", condition_mnemonic(m.cc)));
    } else if (taken) {
      result.branch_target = static_cast<std::uint16_t>(m.imm & kAddressMask);
    }
    return result;
  }
  Operands ops(s, ctx);
  const std::uint32_t target = ops.read(m.reg1, m.size);
  if (ops.fault()) {
    result.fault = ops.fault();
    return result;
  }
  result.write_pc = target;
  return result;
}

void append_register_deltas(const MachineState& before, const MachineState& after,
                            std::vector<RegisterDelta>& out) {
  for (std::size_t i = 0; i < 8; ++i) {
    if (before.gprs[i] != after.gprs[i]) out.push_back({std::string(kGprNames[i]), before.gprs[i], after.gprs[i]});
  }
  for (std::size_t i = 0; i < 8; ++i) {
    if (before.temps[i] != after.temps[i]) {
      out.push_back({std::string(kTempNames[i]), before.temps[i], after.temps[i]});
    }
  }
  auto flag = [&](const char* name, bool b, bool a) {
    if (b != a) out.push_back({name, b ? 1u : 0u, a ? 1u : 0u});
  };
  flag("ZF", before.flags.zf, after.flags.zf);
  flag("CF", before.flags.cf, after.flags.cf);
  flag("SF", before.flags.sf, after.flags.sf);
  flag("OF", before.flags.of, after.flags.of);
}

}  // namespace

std::string_view gpr_name(Gpr r) noexcept { return kGprNames[static_cast<std::size_t>(r)]; }

std::optional<Gpr> parse_gpr(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kGprNames.size(); ++i) {
    if (kGprNames[i] == name) return static_cast<Gpr>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// memory

void Memory::map_page(std::uint32_t address) {
  const auto page = page_of(address);
  if (page == 0) throw Error(ErrorCode::AddressRange, "page 0 cannot be mapped");
  pages_.try_emplace(page, std::array<std::uint8_t, kPageSize>{});
}

void Memory::map_range(std::uint32_t address, std::uint32_t length) {
  if (length == 0) return;
  const std::uint64_t last = std::uint64_t{address} + length - 1;
  for (std::uint64_t p = page_of(address); p <= last / kPageSize; ++p) {
    map_page(static_cast<std::uint32_t>(p * kPageSize));
  }
}

bool Memory::is_mapped(std::uint32_t address) const noexcept { return pages_.count(page_of(address)) != 0; }

std::optional<std::uint8_t> Memory::read8(std::uint32_t address) const noexcept {
  auto it = pages_.find(page_of(address));
  if (it == pages_.end()) return std::nullopt;
  return it->second[address % kPageSize];
}

bool Memory::write8(std::uint32_t address, std::uint8_t value) noexcept {
  auto it = pages_.find(page_of(address));
  if (it == pages_.end()) return false;
  it->second[address % kPageSize] = value;
  return true;
}

std::optional<std::uint32_t> Memory::first_unmapped(std::uint32_t address, std::uint32_t length) const noexcept {
  for (std::uint32_t i = 0; i < length; ++i) {
    if (!is_mapped(address + i)) return address + i;
  }
  return std::nullopt;
}

void Memory::store32(std::uint32_t address, std::uint32_t value) {
  map_range(address, 4);
  for (std::uint32_t i = 0; i < 4; ++i) write8(address + i, static_cast<std::uint8_t>(value >> (8 * i)));
}

std::uint32_t Memory::load32(std::uint32_t address) const {
  if (auto bad = first_unmapped(address, 4)) {
    throw Error(ErrorCode::AddressRange, fmt::format("address {:#x} is not mapped", *bad));
  }
  std::uint32_t v = 0;
  for (std::uint32_t i = 0; i < 4; ++i) v |= std::uint32_t{*read8(address + i)} << (8 * i);
  return v;
}

std::vector<std::uint32_t> Memory::mapped_pages() const {
  std::vector<std::uint32_t> out;
  for (const auto& [page, _] : pages_) out.push_back(page * kPageSize);
  return out;
}

std::string describe(const Fault& f) {
  switch (f.kind) {
    case FaultKind::PageFault:
      return fmt::format("page fault on {} at {:#010x}", f.access == Access::Read ? "read" : "write", f.address);
    case FaultKind::GeneralProtection:
      return f.detail.empty() ? "general protection fault" : fmt::format("general protection fault: {}", f.detail);
    case FaultKind::StepLimit:
      return fmt::format("step limit exceeded: {}", f.detail);
    case FaultKind::Engine:
      return fmt::format("engine fault: {}", f.detail);
  }
  return "fault";
}

// ---------------------------------------------------------------------------
// store

MicrocodeStore::MicrocodeStore(const Triad& fill)
    : rom_(std::make_shared<std::vector<Triad>>(kRomTriads, fill)) {}

MicrocodeStore::MicrocodeStore(std::vector<Triad> rom) {
  if (rom.size() != kRomTriads) {
    throw Error(ErrorCode::Configuration,
                fmt::format("ROM image must hold {} triads, got {}", kRomTriads, rom.size()));
  }
  rom_ = std::make_shared<std::vector<Triad>>(std::move(rom));
}

std::optional<Fault> MicrocodeStore::apply_update(const UpdateFile& update, bool verify) {
  if (verify) {
    const auto expected = compute_checksum(update);
    if (expected != update.header.checksum) {
      return Fault{FaultKind::GeneralProtection, 0, Access::Read,
                   fmt::format("update checksum {:#010x} does not match computed {:#010x}", update.header.checksum,
                               expected)};
    }
  }
  if (kPatchBase + update.triads.size() > kAddressMask + 1u) {
    return Fault{FaultKind::GeneralProtection, 0, Access::Read, "update does not fit into patch RAM"};
  }
  patch_ = update.triads;
  match_ = update.match_registers;
  return std::nullopt;
}

std::uint16_t MicrocodeStore::resolve(std::uint16_t address) const noexcept {
  address &= kAddressMask;
  if (address >= kPatchBase) return address;
  for (std::size_t i = 0; i < match_.size(); ++i) {
    const auto m = static_cast<std::uint16_t>(match_[i] & kAddressMask);
    if (m != 0 && m == address) return static_cast<std::uint16_t>(kPatchBase + 2 * i);
  }
  return address;
}

const Triad* MicrocodeStore::fetch(std::uint16_t address) const noexcept {
  const auto effective = resolve(address);
  if (effective < kPatchBase) return &(*rom_)[effective];
  const std::size_t index = effective - kPatchBase;
  return index < patch_.size() ? &patch_[index] : nullptr;
}

const Triad& MicrocodeStore::fetch_triad(std::uint16_t address) const {
  if (const auto* t = fetch(address)) return *t;
  throw Error(ErrorCode::AddressRange,
              fmt::format("triad {:#05x} (effective {:#05x}) is not populated", address, resolve(address)));
}

const Triad& MicrocodeStore::rom_triad(std::uint16_t address) const {
  if (address >= kRomTriads) throw Error(ErrorCode::AddressRange, fmt::format("{:#x} is not a ROM address", address));
  return (*rom_)[address];
}

void MicrocodeStore::set_rom_triad(std::uint16_t address, const Triad& triad) {
  if (address >= kRomTriads) throw Error(ErrorCode::AddressRange, fmt::format("{:#x} is not a ROM address", address));
  if (rom_.use_count() != 1) rom_ = std::make_shared<std::vector<Triad>>(*rom_);
  (*rom_)[address] = triad;
}

// ---------------------------------------------------------------------------
// execution

InsnResult execute_insn(MachineState& state, const MacroContext& ctx, const Microinstruction& insn,
                        std::vector<MemoryDelta>* memory_log) {
  const auto kind = insn.kind();
  switch (insn.op_class) {
    case OpClass::RegOp:
      if (kind == OpKind::Unrecognized) break;
      return exec_regop(state, ctx, insn, kind);
    case OpClass::LdOp:
      if (kind != OpKind::Ld) break;
      return exec_load(state, ctx, insn);
    case OpClass::StOp:
      if (kind != OpKind::St) break;
      return exec_store(state, ctx, insn, memory_log);
    case OpClass::SpecOp:
      if (kind == OpKind::Unrecognized) break;
      return exec_special(state, ctx, insn, kind);
    case OpClass::Unknown:
      break;
  }
  InsnResult r;
  r.fault = engine_fault(fmt::format("undefined microinstruction {:#018x}", encode_microinstruction(insn)));
  return r;
}

StepResult step_triad(MachineState& state, const MacroContext& ctx, const Triad& triad,
                      std::vector<TraceRecord>* trace, std::uint16_t address, std::uint16_t effective_address) {
  StepResult result;
  for (std::size_t slot = 0; slot < triad.insns.size(); ++slot) {
    const auto& insn = triad.insns[slot];
    InsnResult r;
    if (trace) {
      TraceRecord rec;
      rec.address = address;
      rec.effective_address = effective_address;
      rec.slot = static_cast<std::uint8_t>(slot);
      rec.insn = insn;
      const MachineState before_regs{state.gprs, state.temps, state.flags, {}};
      r = execute_insn(state, ctx, insn, &rec.memory);
      const MachineState after_regs{state.gprs, state.temps, state.flags, {}};
      append_register_deltas(before_regs, after_regs, rec.registers);
      trace->push_back(std::move(rec));
    } else {
      r = execute_insn(state, ctx, insn);
    }
    if (r.write_pc) result.write_pc = r.write_pc;
    if (r.fault) {
      result.fault = std::move(r.fault);
      return result;
    }
    if (r.branch_target) {
      result.action = SequencerAction::Branch;
      result.target = *r.branch_target;
      return result;
    }
  }

  switch (triad.seq.action) {
    case SeqAction::NextTriad:
      result.action = SequencerAction::NextTriad;
      break;
    case SeqAction::Branch:
      result.action = SequencerAction::Branch;
      result.target = triad.seq.address;
      break;
    case SeqAction::Complete:
      result.action = SequencerAction::Complete;
      break;
    case SeqAction::Unknown:
      result.fault = engine_fault(fmt::format("undefined sequence word {:#010x}", encode_sequence_word(triad.seq)));
      break;
  }
  return result;
}

ExecutionOutcome run_macroinstruction(const MicrocodeStore& store, MachineState state, const MacroContext& ctx,
                                      const RunOptions& options) {
  ExecutionOutcome out;
  out.next_decode_pc = ctx.next_pc;
  state.temps.fill(0);

  if (!ctx.instruction_bytes.empty()) {
    try {
      state.memory.map_range(ctx.instruction_address, static_cast<std::uint32_t>(ctx.instruction_bytes.size()));
    } catch (const Error& e) {
      out.fault = engine_fault(e.what());
      out.final_state = std::move(state);
      return out;
    }
    for (std::size_t i = 0; i < ctx.instruction_bytes.size(); ++i) {
      state.memory.write8(ctx.instruction_address + static_cast<std::uint32_t>(i), ctx.instruction_bytes[i]);
    }
  }

  std::optional<std::uint32_t> pending_pc;
  std::uint16_t address = ctx.entry_address & kAddressMask;
  while (true) {
    if (out.triads_executed >= options.step_limit) {
      out.fault = Fault{FaultKind::StepLimit, 0, Access::Read,
                        fmt::format("{} triads executed without completing", out.triads_executed)};
      break;
    }
    const auto effective = store.resolve(address);
    const Triad* triad = store.fetch(address);
    if (!triad) {
      out.fault = engine_fault(fmt::format("fetch from unpopulated triad {:#05x}", effective));
      break;
    }
    out.fetched.push_back(address);
    ++out.triads_executed;

    auto step = step_triad(state, ctx, *triad, options.record_trace ? &out.trace : nullptr, address, effective);
    if (step.write_pc) pending_pc = step.write_pc;
    if (step.fault) {
      out.fault = std::move(step.fault);
      break;
    }
    if (step.action == SequencerAction::Complete) {
      if (pending_pc) out.next_decode_pc = *pending_pc;
      break;
    }
    if (step.action == SequencerAction::Branch) {
      address = step.target & kAddressMask;
    } else {
      address = static_cast<std::uint16_t>((effective + 1) & kAddressMask);
    }
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace ucode
