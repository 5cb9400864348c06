#pragma once

// Checks the codec against the machine-readable encoding tables in
// tables/uisa.json by pushing bit patterns through decode/encode and
// serialize, rather than by comparing constants.

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "ucode/container.hpp"
#include "ucode/uisa.hpp"

namespace testing {

struct TableReport {
  std::size_t checked = 0;
  std::vector<std::string> mismatches;
};

inline nlohmann::json load_tables(const char* path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

namespace detail {

inline std::uint64_t bits_of(const std::string& pattern) {
  std::uint64_t v = 0;
  for (char c : pattern) v = (v << 1) | (c == '1' ? 1u : 0u);
  return v;
}

inline std::uint64_t field_mask(unsigned msb, unsigned lsb) {
  const unsigned width = msb - lsb + 1;
  return (width == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << width) - 1)) << lsb;
}

inline bool is_class_field(const std::string& name) {
  return name.size() == 3 && name.find_first_not_of("01") == std::string::npos;
}

// Value the decoder reports for a named layout field.
inline std::optional<std::uint64_t> decoded_field(const ucode::Microinstruction& m, const std::string& name) {
  if (name == "type") return m.type;
  if (name == "cc") return m.cc;
  if (name == "sw") return m.sw;
  if (name == "3o") return m.three_operand;
  if (name == "reg1") return m.reg1;
  if (name == "flags") return m.flags;
  if (name == "size") return m.size;
  if (name == "reg2") return m.reg2;
  if (name == "rmod") return m.rmod;
  if (name.rfind("imm16", 0) == 0) return m.imm;
  if (is_class_field(name)) return m.class_code;
  return std::nullopt;
}

inline ucode::OpClass class_from_name(const std::string& name) {
  if (name == "RegOp") return ucode::OpClass::RegOp;
  if (name == "LdOp") return ucode::OpClass::LdOp;
  if (name == "StOp") return ucode::OpClass::StOp;
  if (name == "SpecOp") return ucode::OpClass::SpecOp;
  return ucode::OpClass::Unknown;
}

// Header field name -> byte offset the container uses.
inline std::optional<std::size_t> container_offset(const std::string& field) {
  namespace o = ucode::offsets;
  if (field == "date") return o::kDate;
  if (field == "patch ID") return o::kPatchId;
  if (field == "patch block") return o::kPatchBlock;
  if (field == "len") return o::kLen;
  if (field == "init") return o::kInit;
  if (field == "checksum") return o::kChecksum;
  if (field == "northbridge ID") return o::kNorthbridge;
  if (field == "southbridge ID") return o::kSouthbridge;
  if (field == "CPUID") return o::kCpuid;
  if (field == "magic value") return o::kMagic;
  if (field.rfind("match register ", 0) == 0) return o::kMatchRegisters + 4 * std::stoul(field.substr(15));
  if (field.rfind("triad 0, microinstruction ", 0) == 0) return o::kTriads + 8 * std::stoul(field.substr(26));
  if (field == "triad 0, sequence word") return o::kTriads + 24;
  if (field == "triad 1 ...") return o::kTriads + ucode::kTriadBytes;
  return std::nullopt;
}

}  // namespace detail

inline TableReport check_tables(const nlohmann::json& t) {
  using namespace ucode;
  TableReport report;
  auto fail = [&](std::string what) { report.mismatches.push_back(std::move(what)); };

  // Type bits of the first op type listed for each class, to keep the class stable while other fields vary.
  std::map<std::string, std::uint64_t> class_type;
  for (const auto& e : t.at("op_types")) {
    std::string enc = e.at("encoding");
    for (auto& c : enc) c = c == 'C' ? '0' : c;
    class_type.emplace(e.at("class"), detail::bits_of(enc));
  }

  for (const auto& [cls, fields] : t.at("class_layouts").items()) {
    std::uint64_t class_bits = 0;
    for (const auto& f : fields) {
      const std::string name = f.at("field");
      if (detail::is_class_field(name)) class_bits = detail::bits_of(name) << f.at("lsb").get<unsigned>();
    }
    const std::uint64_t base = class_bits | (class_type.at(cls) << 54);
    for (const auto& f : fields) {
      ++report.checked;
      const std::string name = f.at("field");
      const unsigned msb = f.at("msb"), lsb = f.at("lsb");
      if (name == "type" || name == "cc" || detail::is_class_field(name)) {
        const auto m = decode_microinstruction(base);
        if (m.op_class != detail::class_from_name(cls)) fail(fmt::format("{}: base word decodes to another class", cls));
        const auto got = detail::decoded_field(m, name);
        const auto want = (base & detail::field_mask(msb, lsb)) >> lsb;
        if (!got || *got != want) fail(fmt::format("{}.{}: decoded {} want {}", cls, name, got.value_or(~0ull), want));
        continue;
      }
      const std::uint64_t mask = detail::field_mask(msb, lsb);
      for (std::uint64_t pattern : {~0ull, 0x5555555555555555ull, 0xaaaaaaaaaaaaaaaaull}) {
        const std::uint64_t word = (base & ~mask) | (pattern & mask);
        const auto m = decode_microinstruction(word);
        const auto got = detail::decoded_field(m, name);
        if (!got || *got != (word & mask) >> lsb) fail(fmt::format("{}.{} at {}..{} not decoded", cls, name, msb, lsb));
        if (encode_microinstruction(m) != word) fail(fmt::format("{}.{} does not re-encode", cls, name));
      }
    }
  }

  for (const auto& e : t.at("op_types")) {
    ++report.checked;
    const std::string mnemonic = e.at("mnemonic");
    const std::string cls = e.at("class");
    const std::string enc = e.at("encoding");
    const auto* entry = find_op_type(mnemonic);
    if (entry == nullptr) {
      fail(fmt::format("op type {} unknown to the codec", mnemonic));
      continue;
    }
    const std::uint64_t class_code = cls == "LdOp" ? 0b001 : cls == "StOp" ? 0b010 : 0b000;
    const bool has_cc = enc.find('C') != std::string::npos;
    for (unsigned cc = 0; cc < (has_cc ? 32u : 1u); ++cc) {
      std::string concrete = enc;
      for (std::size_t i = 0, bit = 4; i < concrete.size(); ++i) {
        if (concrete[i] == 'C') concrete[i] = ((cc >> bit--) & 1) ? '1' : '0';
      }
      const std::uint64_t word = (detail::bits_of(concrete) << 54) | (class_code << 37);
      const auto m = decode_microinstruction(word);
      if (m.kind() != entry->kind || m.op_class != detail::class_from_name(cls)) {
        fail(fmt::format("{} encoding {} decodes to {}", mnemonic, concrete, op_type_entry(m.kind()).mnemonic));
      }
      if (has_cc && m.cc != cc) fail(fmt::format("{} cc {} decoded as {}", mnemonic, cc, m.cc));
    }
  }

  for (const auto& row : t.at("registers")) {
    const auto code = static_cast<std::uint8_t>(detail::bits_of(row.at("encoding")));
    const auto& names = row.at("names");
    for (std::uint8_t size = 0; size < names.size(); ++size) {
      ++report.checked;
      const std::string name = names[size];
      try {
        if (lookup_register(name) != RegisterName{code, size}) fail(fmt::format("register {} has the wrong code", name));
      } catch (const std::exception&) {
        fail(fmt::format("register {} unknown", name));
      }
      const auto back = register_mnemonic(code, size);
      if (!back || *back != name) fail(fmt::format("register code {:06b} size {} prints wrongly", code, size));
    }
  }

  for (const auto& [action, fields] : t.at("sequence_word").items()) {
    ++report.checked;
    std::uint32_t word = 0;
    for (const auto& f : fields) {
      const std::string name = f.at("field");
      const unsigned lsb = f.at("lsb"), msb = f.at("msb");
      if (detail::is_class_field(name)) word |= static_cast<std::uint32_t>(detail::bits_of(name) << lsb);
      if (name == "address") word |= static_cast<std::uint32_t>(detail::field_mask(msb, lsb) & 0xabc);
    }
    const auto sw = decode_sequence_word(word);
    const bool ok = (action == "next_triad" && sw == SequenceWord::next_triad()) ||
                    (action == "branch" && sw == SequenceWord::branch(0xabc)) ||
                    (action == "complete" && sw == SequenceWord::complete());
    if (!ok || encode_sequence_word(sw) != word) fail(fmt::format("sequence word '{}' disagrees", action));
  }

  UpdateFile u;
  u.header = {0x11111111, 0x22222222, 0x3333, 0, 0x44, 0, 0x55555555, 0x66666666, 0x77777777, 0x88888888};
  for (std::size_t i = 0; i < u.match_registers.size(); ++i) u.match_registers[i] = 0x0a0b0c00u + i;
  Triad t0;
  for (std::size_t i = 0; i < 3; ++i) t0.insns[i] = decode_microinstruction(0x0123456789abcd00ull + i);
  t0.seq = SequenceWord::branch(0x321);
  u.triads = {t0, nop_triad()};
  const auto bytes = serialize_update(u);
  auto read_le = [&](std::size_t off, unsigned nbytes) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < nbytes; ++i) v |= std::uint64_t{bytes[off + i]} << (8 * i);
    return v;
  };
  for (const auto& r : t.at("update_file_rows")) {
    ++report.checked;
    std::size_t row = r.at("row");
    // The row label 54 is a misprint: rows advance in steps of 8 and 54 sits between 48 and 64.
    if (row == 54) row = 56;
    const std::string field = r.at("field");
    const std::size_t at = row + r.at("bit_offset").get<std::size_t>() / 8;
    const auto expected_offset = detail::container_offset(field);
    if (!expected_offset || *expected_offset != at) {
      fail(fmt::format("header field '{}' sits at byte {}, table says {}", field, expected_offset.value_or(0), at));
      continue;
    }
    const unsigned nbytes = r.at("bits").get<unsigned>() / 8;
    const std::uint64_t got = read_le(at, nbytes);
    std::uint64_t want = 0;
    if (field == "date") want = u.header.date;
    else if (field == "patch ID") want = u.header.patch_id;
    else if (field == "patch block") want = u.header.patch_block;
    else if (field == "len") want = u.triads.size();
    else if (field == "init") want = u.header.init;
    else if (field == "checksum") want = compute_checksum(u);
    else if (field == "northbridge ID") want = u.header.northbridge_id;
    else if (field == "southbridge ID") want = u.header.southbridge_id;
    else if (field == "CPUID") want = u.header.cpuid;
    else if (field == "magic value") want = u.header.magic;
    else if (field.rfind("match register ", 0) == 0) want = u.match_registers[std::stoul(field.substr(15))];
    else if (field.rfind("triad 0, microinstruction ", 0) == 0) {
      want = encode_microinstruction(t0.insns[std::stoul(field.substr(26))]);
    } else if (field == "triad 0, sequence word") want = encode_sequence_word(t0.seq);
    else want = encode_microinstruction(nop_triad().insns[0]) & 0xffffffffu;
    if (got != want) fail(fmt::format("header field '{}' holds {:#x}, want {:#x}", field, got, want));
  }
  return report;
}

}  // namespace testing
