#include "ucode/toyrom.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "ucode/error.hpp"
#include "ucode/rtl.hpp"

namespace ucode::toy {

namespace {

// div divides eax by regmd: quotient to eax, remainder to edx. edx is
// clobbered as scratch, and a zero divisor branches to a trap triad.
// State carried across 0x7e5 lives in t4..t8 so a hook there may use t1..t3.
constexpr std::string_view kRomSource = R"(// call rel32: push the return address and jump
.org 0x900
sub t1d, pcd, 4
ld t1d, [t1d]
add t1d, pcd
sub esp, 4
st [esp], pcd
writePC t1d
.sw_branch 0x905

// ret: pop the return address
.org 0x902
ld t1d, [esp]
add esp, 4
writePC t1d
.sw_branch 0x905

.org 0x905
nop
nop
nop
.sw_complete

.org 0x914
nop
nop
nop
nop
nop
nop
nop
nop
nop
nop
nop
nop
.sw_complete

.org 0x960
nop; nop; nop
.sw_complete
// idiv
nop; nop; nop
.sw_branch 0x976
// mul_reg16
nop; nop; nop
.sw_complete

.org 0x964
nop; nop; nop
.sw_complete
// bound
nop; nop; nop
.sw_complete
// imul_reg16
nop; nop; nop
.sw_complete

.org 0x968
nop; nop; nop
.sw_complete

// div entry
.org 0x972
mov t4d, regmd
test t4d, t4d
jcc ZF, 0x974
mov t5d, 0
mov t6d, 0
mov t8d, 32
.sw_branch 0x7e5

.org 0x976
nop; nop; nop
nop; nop; nop
.sw_branch 0x979

.org 0x979
nop; nop; nop
nop; nop; nop
.sw_complete

.org 0x9a8
nop; nop; nop
.sw_complete

.org 0x9ae
nop; nop; nop
.sw_complete

.org 0x7e5
nop; nop; nop
mov t7d, eax
.sw_next
// one quotient bit per iteration
sll.f t7d, 1
adc.f t6d, t6d
sbb t1d, t1d
cmp t6d, t4d
sbb edx, edx
not edx
or edx, t1d
sll t5d, 1
sub t5d, edx
and edx, t4d
sub t6d, edx
sub.f t8d, 1
jcc nZF, 0x7e7
.sw_next
mov eax, t5d
mov edx, t6d
.sw_branch 0x905

// shrd r/m32, r32, imm8
.org 0xaca
sub t2d, pcd, 1
ld t2d, [t2d]
and t2d, 0x1f
test t2d, t2d
jcc ZF, 0xace
.sw_next
srl regmd, t2d
mov t3d, 32
sub t3d, t2d
sll t2d, regd, t3d
or regmd, t2d
.sw_complete
nop; nop; nop
.sw_complete
)";

std::uint8_t modrm_reg(Gpr reg, Gpr rm) {
  return static_cast<std::uint8_t>(0xc0 | (static_cast<unsigned>(reg) << 3) | static_cast<unsigned>(rm));
}

MacroContext make(std::string_view name, std::vector<std::uint8_t> bytes, std::uint32_t address,
                  std::optional<Gpr> op1 = std::nullopt, std::optional<Gpr> op2 = std::nullopt) {
  MacroContext ctx;
  ctx.name = std::string(name);
  const auto& list = macros();
  auto it = std::find_if(list.begin(), list.end(), [&](const MacroInfo& m) { return m.name == name; });
  ctx.entry_address = it->entry;
  ctx.operand1 = op1;
  ctx.operand2 = op2;
  ctx.instruction_address = address;
  ctx.next_pc = address + static_cast<std::uint32_t>(bytes.size());
  ctx.instruction_bytes = std::move(bytes);
  return ctx;
}

}  // namespace

std::string_view rom_source() { return kRomSource; }

const Triad& trap_triad() {
  static const Triad trap = [] {
    auto program = rtl::assemble_text("ld t1d, [zerod]\n.sw_complete\n");
    return program.triads.begin()->second;
  }();
  return trap;
}

MicrocodeStore build_toy_rom() {
  MicrocodeStore store(trap_triad());
  const auto program = rtl::assemble_text(kRomSource);
  for (const auto& [address, triad] : program.triads) store.set_rom_triad(address, triad);
  return store;
}

MachineState default_state() {
  MachineState s;
  s.gpr(Gpr::Esp) = kStackTop;
  s.gpr(Gpr::Edi) = kDataAddress;
  s.gpr(Gpr::Ebx) = 1;
  s.memory.map_range(kStackTop - Memory::kPageSize, 2 * Memory::kPageSize);
  s.memory.map_page(kDataAddress);
  return s;
}

const std::vector<MacroInfo>& macros() {
  static const std::vector<MacroInfo> list{
      {"call", 0x900},       {"ret", 0x902},        {"rep_cmps_mem8", 0x914}, {"mul_mem16", 0x960},
      {"idiv", 0x961},       {"mul_reg16", 0x962},  {"imul_mem16", 0x964},    {"bound", 0x965},
      {"imul_reg16", 0x966}, {"bts_imm", 0x968},    {"div", 0x972},           {"btr_imm", 0x9a8},
      {"mfence", 0x9ae},     {"shrd", 0xaca},
  };
  return list;
}

MacroContext div_context(Gpr divisor, std::uint32_t address) {
  return make("div", {0xf7, modrm_reg(static_cast<Gpr>(6), divisor)}, address, divisor);
}

MacroContext shrd_context(Gpr destination, Gpr source, std::uint8_t count, std::uint32_t address) {
  return make("shrd", {0x0f, 0xac, modrm_reg(source, destination), count}, address, destination, source);
}

MacroContext call_context(std::int32_t displacement, std::uint32_t address) {
  const auto d = static_cast<std::uint32_t>(displacement);
  return make("call",
              {0xe8, static_cast<std::uint8_t>(d), static_cast<std::uint8_t>(d >> 8), static_cast<std::uint8_t>(d >> 16),
               static_cast<std::uint8_t>(d >> 24)},
              address);
}

MacroContext ret_context(std::uint32_t address) { return make("ret", {0xc3}, address); }

MacroContext macro_context(std::string_view name, std::uint32_t address, std::uint8_t count) {
  if (name == "div") return div_context(Gpr::Ebx, address);
  if (name == "shrd") return shrd_context(Gpr::Eax, Gpr::Ebx, count, address);
  if (name == "call") return call_context(0, address);
  if (name == "ret") return ret_context(address);
  if (name == "rep_cmps_mem8") return make(name, {0xf3, 0xa6}, address);
  if (name == "mul_mem16") return make(name, {0x66, 0xf7, 0x23}, address, Gpr::Ebx);
  if (name == "idiv") return make(name, {0xf7, 0xfb}, address, Gpr::Ebx);
  if (name == "mul_reg16") return make(name, {0x66, 0xf7, 0xe3}, address, Gpr::Ebx);
  if (name == "imul_mem16") return make(name, {0x66, 0xf7, 0x2b}, address, Gpr::Ebx);
  if (name == "bound") return make(name, {0x62, 0x03}, address, Gpr::Eax, Gpr::Ebx);
  if (name == "imul_reg16") return make(name, {0x66, 0xf7, 0xeb}, address, Gpr::Ebx);
  if (name == "bts_imm") return make(name, {0x0f, 0xba, 0xe8, 0x05}, address, Gpr::Eax);
  if (name == "btr_imm") return make(name, {0x0f, 0xba, 0xf0, 0x05}, address, Gpr::Eax);
  if (name == "mfence") return make(name, {0x0f, 0xae, 0xf0}, address);
  throw Error(ErrorCode::UnknownMnemonic, fmt::format("the toy ROM has no macroinstruction '{}'", name));
}

}  // namespace ucode::toy
