#include "ucode/session.hpp"

#include <fmt/format.h>

#include <cctype>
#include <charconv>

#include "ucode/error.hpp"
#include "ucode/rtl.hpp"

namespace ucode {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool* flag_slot(Flags& f, std::string_view name) {
  if (name == "zf") return &f.zf;
  if (name == "cf") return &f.cf;
  if (name == "sf") return &f.sf;
  if (name == "of") return &f.of;
  return nullptr;
}

std::optional<std::size_t> temp_index(std::string_view name) {
  if (name.size() == 2 && name[0] == 't' && name[1] >= '1' && name[1] <= '8') {
    return static_cast<std::size_t>(name[1] - '1');
  }
  return std::nullopt;
}

}  // namespace

std::uint32_t parse_u32(std::string_view text) {
  text = trim(text);
  int base = 10;
  std::string_view digits = text;
  if (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) {
    base = 16;
    digits.remove_prefix(2);
  }
  std::uint32_t v = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, base);
  if (digits.empty() || ec != std::errc{} || end != digits.data() + digits.size()) {
    throw Error(ErrorCode::Syntax, fmt::format("'{}' is not a 32-bit number", text));
  }
  return v;
}

MicrocodeStore rom_from_rtl(std::string_view text, const Triad& fill) {
  const auto program = rtl::assemble_text(text);
  MicrocodeStore store(fill);
  for (const auto& [address, triad] : program.triads) {
    if (address >= kRomTriads) {
      throw Error(ErrorCode::AddressRange, fmt::format("ROM source places a triad at {:#x}, past the ROM", address));
    }
    store.set_rom_triad(address, triad);
  }
  return store;
}

MicrocodeStore rom_from_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != std::size_t{kRomTriads} * kTriadBytes) {
    throw Error(ErrorCode::LengthMismatch, fmt::format("a ROM image holds {} bytes, got {}",
                                                      std::size_t{kRomTriads} * kTriadBytes, bytes.size()));
  }
  std::vector<Triad> rom;
  rom.reserve(kRomTriads);
  for (std::size_t i = 0; i < kRomTriads; ++i) {
    rom.push_back(read_triad(bytes.subspan(i * kTriadBytes).first<kTriadBytes>()));
  }
  return MicrocodeStore(std::move(rom));
}

std::vector<std::uint8_t> rom_image(const MicrocodeStore& store) {
  std::vector<std::uint8_t> out(std::size_t{kRomTriads} * kTriadBytes);
  for (std::uint16_t a = 0; a < kRomTriads; ++a) {
    write_triad(store.rom_triad(a), std::span(out).subspan(std::size_t{a} * kTriadBytes).first<kTriadBytes>());
  }
  return out;
}

Assignment parse_assignment(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) {
    throw Error(ErrorCode::Syntax, fmt::format("assignment '{}' needs the form key=value", text));
  }
  Assignment a;
  a.key = lower(trim(text.substr(0, eq)));
  a.value = parse_u32(text.substr(eq + 1));
  if (a.key.size() >= 2 && a.key.front() == '[' && a.key.back() == ']') {
    a.is_memory = true;
    a.location = std::string(trim(std::string_view(a.key).substr(1, a.key.size() - 2)));
    if (!parse_gpr(a.location)) parse_u32(a.location);
    return a;
  }
  Flags probe;
  if (!parse_gpr(a.key) && !temp_index(a.key) && !flag_slot(probe, a.key)) {
    throw Error(ErrorCode::Syntax, fmt::format("unknown register '{}' in assignment", a.key));
  }
  return a;
}

std::uint32_t assignment_address(const MachineState& state, const Assignment& assignment) {
  if (const auto r = parse_gpr(assignment.location)) return state.gpr(*r);
  return parse_u32(assignment.location);
}

void apply_assignment(MachineState& state, const Assignment& assignment) {
  if (assignment.is_memory) {
    state.memory.store32(assignment_address(state, assignment), assignment.value);
  } else if (const auto r = parse_gpr(assignment.key)) {
    state.gpr(*r) = assignment.value;
  } else if (const auto t = temp_index(assignment.key)) {
    state.temps[*t] = assignment.value;
  } else if (bool* f = flag_slot(state.flags, assignment.key)) {
    *f = assignment.value != 0;
  } else {
    throw Error(ErrorCode::Syntax, fmt::format("unknown register '{}' in assignment", assignment.key));
  }
}

std::string run_report(const ExecutionOutcome& outcome, std::span<const Assignment> watches) {
  std::string out;
  if (outcome.fault) {
    out += fmt::format("status=fault {}\n", describe(*outcome.fault));
  } else {
    out += "status=ok\n";
  }
  out += fmt::format("next_decode_pc={:#x}\n", outcome.next_decode_pc);
  out += fmt::format("triads={}\n", outcome.triads_executed);
  for (std::size_t i = 0; i < outcome.final_state.gprs.size(); ++i) {
    out += fmt::format("{}={:#010x}\n", gpr_name(static_cast<Gpr>(i)), outcome.final_state.gprs[i]);
  }
  const auto& f = outcome.final_state.flags;
  out += fmt::format("flags=zf:{} cf:{} sf:{} of:{}\n", int{f.zf}, int{f.cf}, int{f.sf}, int{f.of});
  for (const auto& w : watches) {
    if (!w.is_memory) continue;
    const auto address = assignment_address(outcome.final_state, w);
    if (outcome.final_state.memory.first_unmapped(address, 4)) {
      out += fmt::format("mem[{}]=unmapped\n", w.location);
    } else {
      out += fmt::format("mem[{}]={}\n", w.location, outcome.final_state.memory.load32(address));
    }
  }
  return out;
}

}  // namespace ucode
