#include "ucode/json_io.hpp"

#include <fmt/format.h>

#include <limits>

#include "ucode/error.hpp"
#include "ucode/rtl.hpp"
#include "ucode/toyrom.hpp"

namespace ucode {

namespace {

std::string hex(std::uint64_t v) { return fmt::format("{:#x}", v); }

std::uint64_t number(const json& j, const char* what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    try {
      std::size_t used = 0;
      const auto v = std::stoull(s, &used, 0);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::Syntax, fmt::format("'{}' must be a non-negative number, got {}", what, j.dump()));
}

template <typename T>
T bounded(const json& parent, const char* key) {
  if (!parent.contains(key)) throw Error(ErrorCode::Syntax, fmt::format("missing member '{}'", key));
  const auto v = number(parent.at(key), key);
  if (v > std::numeric_limits<T>::max()) {
    throw Error(ErrorCode::FieldOverflow, fmt::format("'{}' = {:#x} does not fit its field", key, v));
  }
  return static_cast<T>(v);
}

std::string_view class_name(OpClass c) {
  switch (c) {
    case OpClass::RegOp: return "RegOp";
    case OpClass::LdOp: return "LdOp";
    case OpClass::StOp: return "StOp";
    case OpClass::SpecOp: return "SpecOp";
    case OpClass::Unknown: break;
  }
  return "Unknown";
}

std::string bits(std::uint32_t v, unsigned width) {
  std::string s(width, '0');
  for (unsigned i = 0; i < width; ++i) {
    if ((v >> i) & 1u) s[width - 1 - i] = '1';
  }
  return s;
}

template <std::size_t N>
json layout_json(const std::array<tables::FieldSpec, N>& layout) {
  json out = json::array();
  for (const auto& f : layout) out.push_back({{"field", f.name}, {"lsb", f.lsb}, {"width", f.width}});
  return out;
}

}  // namespace

json update_to_json(const UpdateFile& u) {
  const auto& h = u.header;
  json j;
  j["header"] = {
      {"date", hex(h.date)},
      {"patch_id", hex(h.patch_id)},
      {"patch_block", hex(h.patch_block)},
      {"len", h.len},
      {"init", hex(h.init)},
      {"checksum", hex(h.checksum)},
      {"northbridge_id", hex(h.northbridge_id)},
      {"southbridge_id", hex(h.southbridge_id)},
      {"cpuid", hex(h.cpuid)},
      {"magic", hex(h.magic)},
  };
  j["match_registers"] = json::array();
  for (auto m : u.match_registers) j["match_registers"].push_back(hex(m));
  j["triads"] = json::array();
  for (std::size_t i = 0; i < u.triads.size(); ++i) {
    const auto& t = u.triads[i];
    json insns = json::array();
    json text = json::array();
    for (std::size_t slot = 0; slot < 3; ++slot) {
      insns.push_back(fmt::format("{:#018x}", encode_microinstruction(t.insns[slot])));
      text.push_back(rtl::disassemble_insn(t.insns[slot], slot));
    }
    j["triads"].push_back({{"address", hex(kPatchBase + i)},
                           {"insns", insns},
                           {"seq", fmt::format("{:#010x}", encode_sequence_word(t.seq))},
                           {"text", text}});
  }
  return j;
}

UpdateFile update_from_json(const json& j) {
  if (!j.is_object() || !j.contains("header") || !j.contains("match_registers") || !j.contains("triads")) {
    throw Error(ErrorCode::Syntax, "update JSON needs 'header', 'match_registers' and 'triads'");
  }
  UpdateFile u;
  const auto& h = j.at("header");
  u.header.date = bounded<std::uint32_t>(h, "date");
  u.header.patch_id = bounded<std::uint32_t>(h, "patch_id");
  u.header.patch_block = bounded<std::uint16_t>(h, "patch_block");
  u.header.len = bounded<std::uint8_t>(h, "len");
  u.header.init = bounded<std::uint8_t>(h, "init");
  u.header.checksum = bounded<std::uint32_t>(h, "checksum");
  u.header.northbridge_id = bounded<std::uint32_t>(h, "northbridge_id");
  u.header.southbridge_id = bounded<std::uint32_t>(h, "southbridge_id");
  u.header.cpuid = bounded<std::uint32_t>(h, "cpuid");
  u.header.magic = bounded<std::uint32_t>(h, "magic");

  const auto& m = j.at("match_registers");
  if (!m.is_array() || m.size() != kMatchRegisterCount) {
    throw Error(ErrorCode::Syntax, fmt::format("'match_registers' must list {} values", kMatchRegisterCount));
  }
  for (std::size_t i = 0; i < kMatchRegisterCount; ++i) {
    const auto v = number(m[i], "match_registers");
    if (v > 0xffffffffu) throw Error(ErrorCode::FieldOverflow, "match register value exceeds 32 bits");
    u.match_registers[i] = static_cast<std::uint32_t>(v);
  }

  for (const auto& t : j.at("triads")) {
    if (!t.contains("insns") || !t.contains("seq") || t.at("insns").size() != 3) {
      throw Error(ErrorCode::Syntax, "each triad needs three 'insns' and a 'seq'");
    }
    Triad triad;
    for (std::size_t slot = 0; slot < 3; ++slot) {
      triad.insns[slot] = decode_microinstruction(number(t.at("insns")[slot], "insns"));
    }
    const auto seq = number(t.at("seq"), "seq");
    if (seq > 0xffffffffu) throw Error(ErrorCode::FieldOverflow, "sequence word exceeds 32 bits");
    triad.seq = decode_sequence_word(static_cast<std::uint32_t>(seq));
    u.triads.push_back(triad);
  }
  return u;
}

json fault_to_json(const Fault& f) {
  json j;
  switch (f.kind) {
    case FaultKind::PageFault:
      j["kind"] = "page_fault";
      j["address"] = hex(f.address);
      j["access"] = f.access == Access::Read ? "read" : "write";
      break;
    case FaultKind::GeneralProtection: j["kind"] = "general_protection"; break;
    case FaultKind::StepLimit: j["kind"] = "step_limit"; break;
    case FaultKind::Engine: j["kind"] = "engine"; break;
  }
  if (!f.detail.empty()) j["detail"] = f.detail;
  return j;
}

json trace_record_to_json(const TraceRecord& r) {
  json j;
  j["address"] = hex(r.address);
  if (r.effective_address != r.address) j["effective_address"] = hex(r.effective_address);
  j["slot"] = r.slot;
  j["mnemonic"] = rtl::disassemble_insn(r.insn, r.slot);
  json regs = json::object();
  for (const auto& d : r.registers) regs[d.name] = {hex(d.before), hex(d.after)};
  j["registers"] = regs;
  json mem = json::array();
  for (const auto& d : r.memory) mem.push_back({{"address", hex(d.address)}, {"before", hex(d.before)}, {"after", hex(d.after)}});
  j["memory"] = mem;
  return j;
}

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
  std::string out;
  for (const auto& r : trace) {
    out += trace_record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

namespace {

Gpr gpr_member(const json& j, const char* key) {
  if (!j.is_string()) throw Error(ErrorCode::Syntax, fmt::format("'{}' must be a register name", key));
  const auto r = parse_gpr(j.get<std::string>());
  if (!r) throw Error(ErrorCode::Syntax, fmt::format("'{}' names no register: {}", key, j.dump()));
  return *r;
}

std::vector<std::uint8_t> hex_bytes(const json& j) {
  if (!j.is_string()) throw Error(ErrorCode::Syntax, "'bytes' must be a hex string");
  std::string s;
  for (char c : j.get<std::string>()) {
    if (c != ' ') s.push_back(c);
  }
  if (s.size() % 2 != 0) throw Error(ErrorCode::Syntax, "'bytes' needs an even number of hex digits");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < s.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(number(json("0x" + s.substr(i, 2)), "bytes")));
  }
  return out;
}

}  // namespace

MacroContext context_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Syntax, "a macro context must be a JSON object");
  const auto address = j.contains("address") ? bounded<std::uint32_t>(j, "address") : toy::kCodeAddress;
  const auto count = j.contains("count") ? bounded<std::uint8_t>(j, "count") : std::uint8_t{0};
  MacroContext ctx;
  if (j.contains("macro")) {
    if (!j.at("macro").is_string()) throw Error(ErrorCode::Syntax, "'macro' must be a string");
    ctx = toy::macro_context(j.at("macro").get<std::string>(), address, count);
  } else {
    ctx.instruction_address = address;
  }
  if (j.contains("name")) ctx.name = j.at("name").get<std::string>();
  if (j.contains("entry")) {
    const auto entry = bounded<std::uint16_t>(j, "entry");
    if (entry >= kRomTriads + kMaxTriads) {
      throw Error(ErrorCode::FieldOverflow, fmt::format("entry {:#x} is past the triad address space", entry));
    }
    ctx.entry_address = entry;
  } else if (!j.contains("macro")) {
    throw Error(ErrorCode::Syntax, "a macro context needs 'macro' or 'entry'");
  }
  if (j.contains("operand1")) ctx.operand1 = gpr_member(j.at("operand1"), "operand1");
  if (j.contains("operand2")) ctx.operand2 = gpr_member(j.at("operand2"), "operand2");
  if (j.contains("bytes")) ctx.instruction_bytes = hex_bytes(j.at("bytes"));
  ctx.next_pc = ctx.instruction_address + static_cast<std::uint32_t>(ctx.instruction_bytes.size());
  return ctx;
}

json context_to_json(const MacroContext& ctx) {
  json j;
  j["name"] = ctx.name;
  j["entry"] = hex(ctx.entry_address);
  if (ctx.operand1) j["operand1"] = std::string(gpr_name(*ctx.operand1));
  if (ctx.operand2) j["operand2"] = std::string(gpr_name(*ctx.operand2));
  std::string bytes;
  for (auto b : ctx.instruction_bytes) bytes += fmt::format("{:02x}", b);
  j["bytes"] = bytes;
  j["address"] = hex(ctx.instruction_address);
  return j;
}

json export_tables_json() {
  json j;
  j["layouts"] = {
      {"RegOp", layout_json(tables::kRegOpLayout)},
      {"LdOp", layout_json(tables::kLdOpLayout)},
      {"StOp", layout_json(tables::kStOpLayout)},
      {"SpecOp", layout_json(tables::kSpecOpLayout)},
  };
  j["class_codes"] = {{"RegOp", bits(tables::kClassCodeRegSpec, 3)},
                      {"LdOp", bits(tables::kClassCodeLd, 3)},
                      {"StOp", bits(tables::kClassCodeSt, 3)},
                      {"SpecOp", bits(tables::kClassCodeRegSpec, 3)}};
  json ops = json::array();
  for (const auto& e : tables::kOpTypes) {
    std::string enc = bits(e.encoding, 9);
    if (e.cc_in_low_bits) enc.replace(4, 5, "CCCCC");
    ops.push_back({{"class", class_name(e.op_class)}, {"mnemonic", e.mnemonic}, {"encoding", enc}});
  }
  j["op_types"] = ops;
  json regs = json::array();
  for (const auto& r : tables::kRegisters) regs.push_back({{"names", r.names}, {"encoding", bits(r.code, 6)}});
  j["registers"] = regs;
  json ext = json::array();
  for (const auto& r : tables::kRegisterExtensions) ext.push_back({{"names", r.names}, {"encoding", bits(r.code, 6)}});
  j["register_extensions"] = ext;
  json seq = json::array();
  for (const auto& a : tables::kSeqActions) seq.push_back({{"action", a.name}, {"code", bits(a.code, 3)}});
  j["sequence_actions"] = seq;
  j["sequence_fields"] = {{"action", {{"lsb", tables::kSeqActionLsb}, {"width", tables::kSeqActionWidth}}},
                          {"address", {{"lsb", tables::kSeqAddressLsb}, {"width", tables::kSeqAddressWidth}}}};
  json cc = json::array();
  for (const auto& c : tables::kConditions) cc.push_back({{"mnemonic", c.mnemonic}, {"selector", c.selector}});
  j["conditions"] = cc;
  j["condition_invert_bit"] = tables::kCcInvertBit;
  return j;
}

std::uint32_t tables_checksum() {
  const std::string dump = export_tables_json().dump();
  std::uint32_t h = 0x811c9dc5u;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x01000193u;
  }
  return h;
}

}  // namespace ucode
