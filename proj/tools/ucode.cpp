#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>

#include "ucode/container.hpp"
#include "ucode/error.hpp"
#include "ucode/heatmap.hpp"
#include "ucode/json_io.hpp"
#include "ucode/romgrid.hpp"
#include "ucode/rtl.hpp"
#include "ucode/session.hpp"
#include "ucode/toyrom.hpp"

using namespace ucode;

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  if (path == "-") {
    std::cin >> std::noskipws;
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, fmt::format("cannot open '{}'", path));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  if (path == "-") {
    std::cout.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write '{}'", path));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const std::string& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

bool looks_like_json(std::span<const std::uint8_t> bytes) {
  for (auto b : bytes) {
    if (b == ' ' || b == '\n' || b == '\r' || b == '\t') continue;
    return b == '{';
  }
  return false;
}

json parse_json(std::span<const std::uint8_t> bytes) {
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Syntax, fmt::format("invalid JSON: {}", e.what()));
  }
}

UpdateFile load_update(const std::string& path, bool verify) {
  const auto bytes = read_bytes(path);
  if (looks_like_json(bytes)) return update_from_json(parse_json(bytes));
  return parse_update(bytes, verify);
}

std::vector<rtl::MatchPragma> parse_matches(const std::vector<std::string>& specs) {
  std::vector<rtl::MatchPragma> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::Syntax, fmt::format("--match '{}' needs N=ADDR", s));
    const auto index = parse_u32(std::string_view(s).substr(0, eq));
    const auto address = parse_u32(std::string_view(s).substr(eq + 1));
    if (index >= kMatchRegisterCount || address > 0xffff) {
      throw Error(ErrorCode::FieldOverflow, fmt::format("--match '{}' is out of range", s));
    }
    out.push_back({index, static_cast<std::uint16_t>(address)});
  }
  return out;
}

MicrocodeStore load_rom(const std::string& spec) {
  if (spec == "toy") return toy::build_toy_rom();
  const auto bytes = read_bytes(spec);
  if (spec.ends_with(".rtl")) return rom_from_rtl(std::string(bytes.begin(), bytes.end()), toy::trap_triad());
  return rom_from_image(bytes);
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size() && !text.empty()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    out.push_back(parse_u32(std::string_view(text).substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return out;
}

AddressRange parse_range(const std::string& text) {
  const auto dash = text.find('-');
  if (dash == std::string::npos) throw Error(ErrorCode::Syntax, fmt::format("range '{}' needs BEGIN-END", text));
  const auto begin = parse_u32(std::string_view(text).substr(0, dash));
  const auto end = parse_u32(std::string_view(text).substr(dash + 1));
  if (begin > end || end > kRomTriads) {
    throw Error(ErrorCode::AddressRange, fmt::format("range '{}' must lie within 0x0-{:#x}", text, kRomTriads));
  }
  return {static_cast<std::uint16_t>(begin), static_cast<std::uint16_t>(end)};
}

struct AsmArgs {
  std::string input;
  std::string output = "-";
  std::vector<std::string> matches;
  bool json = false;
  bool raw = false;
};

int cmd_asm(const AsmArgs& a) {
  const auto program = rtl::assemble_text(read_text(a.input));
  const auto overrides = parse_matches(a.matches);
  if (a.raw) {
    const auto triads = program.patch_triads();
    std::vector<std::uint8_t> bytes(triads.size() * kTriadBytes);
    for (std::size_t i = 0; i < triads.size(); ++i) {
      write_triad(triads[i], std::span(bytes).subspan(i * kTriadBytes).first<kTriadBytes>());
    }
    write_bytes(a.output, bytes);
    return 0;
  }
  const auto update = rtl::make_update(program, overrides);
  if (a.json) {
    write_text(a.output, update_to_json(update).dump(2) + "\n");
  } else {
    write_bytes(a.output, serialize_update(update));
  }
  return 0;
}

struct DisasmArgs {
  std::string input;
  std::string output = "-";
  bool addresses = false;
  bool verify = false;
};

int cmd_disasm(const DisasmArgs& a) {
  const auto update = load_update(a.input, a.verify);
  write_text(a.output, rtl::disassemble_update(update, {a.addresses}));
  return 0;
}

struct PackArgs {
  std::string input;
  std::string output = "-";
  bool recompute = false;
};

int cmd_pack(const PackArgs& a) {
  const auto update = update_from_json(parse_json(read_bytes(a.input)));
  write_bytes(a.output, serialize_update(update, a.recompute ? ChecksumMode::Recompute : ChecksumMode::Keep));
  return 0;
}

struct UnpackArgs {
  std::string input;
  std::string output = "-";
  bool json = false;
  bool verify = false;
};

std::string header_text(const UpdateFile& u) {
  const auto& h = u.header;
  std::string out;
  out += fmt::format("date={:#010x}\npatch_id={:#010x}\npatch_block={:#06x}\nlen={}\ninit={:#04x}\n", h.date,
                     h.patch_id, h.patch_block, u.triads.size(), h.init);
  out += fmt::format("checksum={:#010x}\nnorthbridge_id={:#010x}\nsouthbridge_id={:#010x}\ncpuid={:#010x}\n",
                     h.checksum, h.northbridge_id, h.southbridge_id, h.cpuid);
  out += fmt::format("magic={:#010x}\n", h.magic);
  for (std::size_t i = 0; i < u.match_registers.size(); ++i) {
    out += fmt::format("m{}={:#x}\n", i, u.match_registers[i]);
  }
  return out;
}

int cmd_unpack(const UnpackArgs& a) {
  const auto update = parse_update(read_bytes(a.input), a.verify);
  if (a.json) {
    write_text(a.output, update_to_json(update).dump(2) + "\n");
  } else {
    write_text(a.output, header_text(update) + "\n" + rtl::disassemble_update(update, {true}));
  }
  return 0;
}

struct RunArgs {
  std::string rom = "toy";
  std::vector<std::string> updates;
  std::string macro;
  std::string context_file;
  std::uint32_t count = 0;
  std::vector<std::string> sets;
  std::string trace;
  std::size_t step_limit = 4096;
  bool json = false;
  bool no_verify = false;
};

int cmd_run(const RunArgs& a) {
  auto store = load_rom(a.rom);
  for (const auto& path : a.updates) {
    if (const auto fault = store.apply_update(load_update(path, false), !a.no_verify)) {
      throw Error(ErrorCode::ChecksumMismatch, fmt::format("update '{}' rejected: {}", path, describe(*fault)));
    }
  }
  MacroContext ctx;
  if (!a.context_file.empty()) {
    ctx = context_from_json(parse_json(read_bytes(a.context_file)));
  } else {
    if (a.count > 0xff) throw Error(ErrorCode::FieldOverflow, "--count must fit in 8 bits");
    ctx = toy::macro_context(a.macro, toy::kCodeAddress, static_cast<std::uint8_t>(a.count));
  }
  auto state = toy::default_state();
  std::vector<Assignment> assignments;
  for (const auto& s : a.sets) assignments.push_back(parse_assignment(s));
  for (const auto& s : assignments) {
    if (!s.is_memory) apply_assignment(state, s);
  }
  for (const auto& s : assignments) {
    if (s.is_memory) apply_assignment(state, s);
  }

  RunOptions options;
  options.step_limit = a.step_limit;
  options.record_trace = !a.trace.empty();
  const auto outcome = run_macroinstruction(store, std::move(state), ctx, options);
  if (!a.trace.empty()) write_text(a.trace, trace_to_jsonl(outcome.trace));

  if (a.json) {
    json j;
    j["context"] = context_to_json(ctx);
    j["fault"] = outcome.fault ? fault_to_json(*outcome.fault) : json(nullptr);
    j["next_decode_pc"] = fmt::format("{:#x}", outcome.next_decode_pc);
    j["triads_executed"] = outcome.triads_executed;
    json regs = json::object();
    for (std::size_t i = 0; i < outcome.final_state.gprs.size(); ++i) {
      regs[std::string(gpr_name(static_cast<Gpr>(i)))] = fmt::format("{:#x}", outcome.final_state.gprs[i]);
    }
    j["registers"] = regs;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << run_report(outcome, assignments);
  }
  return outcome.fault ? 2 : 0;
}

struct HeatmapArgs {
  std::string rom = "toy";
  std::vector<std::string> macros;
  std::string range = "0x0-0xc00";
  bool csv = false;
  bool raw = false;
  bool serial = false;
};

int cmd_heatmap(const HeatmapArgs& a) {
  const auto store = load_rom(a.rom);
  const auto range = parse_range(a.range);
  const auto generate = [&](const MacroRunner& runner, const std::string& label) {
    return a.serial ? generate_raw_heatmap_serial(store, runner, range, label)
                    : generate_raw_heatmap(store, runner, range, label);
  };
  const auto reference = generate(
      make_sequence_runner(toy::default_state(), {toy::call_context(0), toy::ret_context()}), "reference");

  std::vector<HeatMap> maps;
  for (const auto& name : a.macros) {
    const auto raw = generate(make_runner(toy::default_state(), toy::macro_context(name)), name);
    maps.push_back(a.raw ? raw : subtract_reference(raw, reference));
  }
  if (a.csv) {
    for (const auto& m : maps) std::cout << to_csv(m);
  } else {
    std::cout << render_table(maps, range);
  }
  return 0;
}

struct RomgridArgs {
  std::string input;
  unsigned parity = 1;
  std::string segments;
  std::string segment_parity;
  std::size_t subarrays = 1;
  std::string order;
  bool flip = false;
};

int cmd_romgrid(const RomgridArgs& a) {
  auto grid = parse_grid(read_text(a.input), a.flip);
  GridPipeline config;
  config.inverted_parity = a.parity;
  config.segment_boundaries = parse_list(a.segments);
  for (auto p : parse_list(a.segment_parity)) config.segment_parity.push_back(static_cast<std::uint8_t>(p));
  config.subarray_count = a.subarrays;
  config.order = parse_list(a.order);
  for (const auto w : run_pipeline(grid, config)) std::cout << fmt::format("{:016x}\n", w);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Microcode toolchain: assembler, container tools, engine, heat maps, ROM grid decoding"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", [] { return fmt::format("ucode tables {:08x}", tables_checksum()); });

  AsmArgs asm_args;
  auto* asm_cmd = app.add_subcommand("asm", "Assemble RTL into an update file");
  asm_cmd->add_option("input", asm_args.input, "RTL source ('-' for stdin)")->required();
  asm_cmd->add_option("-o,--output", asm_args.output, "Output path ('-' for stdout)");
  asm_cmd->add_option("--match", asm_args.matches, "Match register N=ADDR, overrides pragmas");
  auto* asm_json = asm_cmd->add_flag("--json", asm_args.json, "Emit the update as JSON");
  asm_cmd->add_flag("--raw", asm_args.raw, "Emit bare triad bytes")->excludes(asm_json);

  DisasmArgs dis_args;
  auto* dis_cmd = app.add_subcommand("disasm", "Disassemble an update file (binary or JSON) to RTL");
  dis_cmd->add_option("input", dis_args.input)->required();
  dis_cmd->add_option("-o,--output", dis_args.output);
  dis_cmd->add_flag("--addresses", dis_args.addresses, "Annotate triad addresses");
  dis_cmd->add_flag("--verify", dis_args.verify, "Reject a bad checksum");

  PackArgs pack_args;
  auto* pack_cmd = app.add_subcommand("pack", "Serialize a JSON update to binary");
  pack_cmd->add_option("input", pack_args.input)->required();
  pack_cmd->add_option("-o,--output", pack_args.output);
  pack_cmd->add_flag("--recompute-checksum", pack_args.recompute, "Replace the stored checksum");

  UnpackArgs unpack_args;
  auto* unpack_cmd = app.add_subcommand("unpack", "Show a binary update as text or JSON");
  unpack_cmd->add_option("input", unpack_args.input)->required();
  unpack_cmd->add_option("-o,--output", unpack_args.output);
  unpack_cmd->add_flag("--json", unpack_args.json);
  unpack_cmd->add_flag("--verify", unpack_args.verify, "Reject a bad checksum");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Execute one macroinstruction");
  run_cmd->add_option("--rom", run_args.rom, "'toy', a .rtl ROM source, or a binary ROM image");
  run_cmd->add_option("--update", run_args.updates, "Update file(s) to apply, in order");
  auto* macro_opt = run_cmd->add_option("--macro", run_args.macro, "Toy ROM macroinstruction name");
  auto* ctx_opt = run_cmd->add_option("--context", run_args.context_file, "Macro context description (JSON)");
  macro_opt->excludes(ctx_opt);
  run_cmd->add_option("--count", run_args.count, "Immediate count for shrd");
  run_cmd->add_option("--set", run_args.sets, "Initial state: reg=V, flag=0|1, tN=V, [reg|addr]=V");
  run_cmd->add_option("--trace", run_args.trace, "Write a JSON-lines trace ('-' for stdout)");
  run_cmd->add_option("--step-limit", run_args.step_limit);
  run_cmd->add_flag("--json", run_args.json);
  run_cmd->add_flag("--no-verify", run_args.no_verify, "Accept updates with a bad checksum");

  HeatmapArgs heat_args;
  auto* heat_cmd = app.add_subcommand("heatmap", "Crash-interception heat maps over the ROM");
  heat_cmd->add_option("--rom", heat_args.rom);
  heat_cmd->add_option("--macro", heat_args.macros, "Macroinstruction(s) to map")->required();
  heat_cmd->add_option("--range", heat_args.range, "BEGIN-END, end exclusive");
  heat_cmd->add_flag("--csv", heat_args.csv, "CSV instead of a table");
  heat_cmd->add_flag("--raw", heat_args.raw, "Skip reference subtraction");
  heat_cmd->add_flag("--serial", heat_args.serial, "Single-threaded sweep");

  RomgridArgs grid_args;
  auto* grid_cmd = app.add_subcommand("romgrid", "Decode a ROM bit grid into 64-bit words");
  grid_cmd->add_option("input", grid_args.input)->required();
  grid_cmd->add_option("--parity", grid_args.parity, "Inverted column parity")->check(CLI::Range(0u, 1u));
  grid_cmd->add_option("--segments", grid_args.segments, "Comma-separated segment start columns");
  grid_cmd->add_option("--segment-parity", grid_args.segment_parity, "Comma-separated parity per segment");
  grid_cmd->add_option("--subarrays", grid_args.subarrays)->check(CLI::PositiveNumber);
  grid_cmd->add_option("--order", grid_args.order, "Comma-separated subarray order");
  grid_cmd->add_flag("--flip-convention", grid_args.flip, "Complement every input bit");

  auto* tables_cmd = app.add_subcommand("tables", "Dump the encoding tables as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*asm_cmd) return cmd_asm(asm_args);
    if (*dis_cmd) return cmd_disasm(dis_args);
    if (*pack_cmd) return cmd_pack(pack_args);
    if (*unpack_cmd) return cmd_unpack(unpack_args);
    if (*run_cmd) {
      if (run_args.macro.empty() && run_args.context_file.empty()) {
        std::cerr << "run: one of --macro or --context is required\n";
        return 1;
      }
      return cmd_run(run_args);
    }
    if (*heat_cmd) return cmd_heatmap(heat_args);
    if (*grid_cmd) return cmd_romgrid(grid_args);
    if (*tables_cmd) {
      std::cout << export_tables_json().dump(2) << "\n";
      return 0;
    }
  } catch (const rtl::RtlError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
