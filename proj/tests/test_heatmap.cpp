#include <doctest.h>

#include <set>

#include "ucode/error.hpp"
#include "ucode/heatmap.hpp"
#include "ucode/toyrom.hpp"

using namespace ucode;

namespace {

std::set<std::uint16_t> fetched_rom(const ExecutionOutcome& out) {
  std::set<std::uint16_t> s;
  for (auto a : out.fetched) {
    if (a < kRomTriads) s.insert(a);
  }
  return s;
}

std::set<std::uint16_t> reference_fetches(const MicrocodeStore& store) {
  std::set<std::uint16_t> s;
  auto state = toy::default_state();
  for (const auto& ctx : {toy::call_context(0), toy::ret_context()}) {
    const auto out = run_macroinstruction(store, state, ctx);
    REQUIRE_FALSE(out.fault.has_value());
    const auto f = fetched_rom(out);
    s.insert(f.begin(), f.end());
    state = out.final_state;
  }
  return s;
}

HeatMap clean_map(const MicrocodeStore& store, const std::string& name, AddressRange range) {
  const auto reference = generate_raw_heatmap(
      store, make_sequence_runner(toy::default_state(), {toy::call_context(0), toy::ret_context()}), range, "ref");
  const auto raw = generate_raw_heatmap(store, make_runner(toy::default_state(), toy::macro_context(name)), range, name);
  return subtract_reference(raw, reference);
}

}  // namespace

TEST_CASE("crash patch intercepts exactly one address") {
  const auto u = crash_patch(0x123);
  CHECK(u.match_registers[0] == 0x123);
  REQUIRE(u.triads.size() == 1);
  CHECK(u.header.checksum == compute_checksum(u));
  MicrocodeStore store = toy::build_toy_rom();
  REQUIRE_FALSE(store.apply_update(u).has_value());
  MachineState s = toy::default_state();
  const auto r = step_triad(s, MacroContext{}, store.fetch_triad(0x123));
  REQUIRE(r.fault.has_value());
  CHECK(r.fault->kind == FaultKind::PageFault);
  CHECK(r.fault->access == Access::Write);
}

TEST_CASE("clean div map equals the trace-derived triad set") {
  const auto store = toy::build_toy_rom();
  const AddressRange all{0, kRomTriads};
  const auto clean = clean_map(store, "div", all);

  const auto div = run_macroinstruction(store, toy::default_state(), toy::div_context());
  REQUIRE_FALSE(div.fault.has_value());
  std::set<std::uint16_t> expected = fetched_rom(div);
  for (auto a : reference_fetches(store)) expected.erase(a);
  expected.erase(0);

  const auto hits = clean.hits();
  CHECK(std::set<std::uint16_t>(hits.begin(), hits.end()) == expected);

  std::set<std::uint16_t> planted;
  for (std::uint16_t a = 0x7e5; a <= 0x7ec; ++a) planted.insert(a);
  planted.insert(0x972);
  planted.insert(0x973);
  CHECK(expected == planted);

  CHECK(locate_entrypoint(clean) == 0x7e5);
  CHECK(locate_entrypoint(clean, div.fetched) == 0x972);
}

TEST_CASE("parallel and serial sweeps agree") {
  const auto store = toy::build_toy_rom();
  const auto runner = make_runner(toy::default_state(), toy::macro_context("idiv"));
  const AddressRange range{0x900, 0xa00};
  CHECK(generate_raw_heatmap(store, runner, range, "idiv") == generate_raw_heatmap_serial(store, runner, range, "idiv"));
}

TEST_CASE("table rendering over the vector region") {
  const auto store = toy::build_toy_rom();
  const AddressRange range{0x900, 0xa00};
  std::vector<HeatMap> maps;
  for (const char* name : {"rep_cmps_mem8", "mul_mem16", "idiv", "mul_reg16", "imul_mem16", "bound", "imul_reg16",
                           "bts_imm", "div", "btr_imm", "mfence"}) {
    maps.push_back(clean_map(store, name, range));
  }
  const std::string expected =
      "0x900 - 0x913  -\n"
      "0x914 - 0x917  rep_cmps_mem8\n"
      "0x918 - 0x95f  -\n"
      "0x960          mul_mem16\n"
      "0x961          idiv\n"
      "0x962          mul_reg16\n"
      "0x963          -\n"
      "0x964          imul_mem16\n"
      "0x965          bound\n"
      "0x966          imul_reg16\n"
      "0x967          -\n"
      "0x968          bts_imm\n"
      "0x969 - 0x971  -\n"
      "0x972 - 0x973  div\n"
      "0x974 - 0x975  -\n"
      "0x976 - 0x977  idiv\n"
      "0x978          -\n"
      "0x979 - 0x97a  idiv\n"
      "0x97b - 0x9a7  -\n"
      "0x9a8          btr_imm\n"
      "0x9a9 - 0x9ad  -\n"
      "0x9ae          mfence\n"
      "0x9af - 0x9ff  -\n";
  CHECK(render_table(maps, range) == expected);
}

TEST_CASE("overlapping labels are joined") {
  HeatMap a("a", {0, 4});
  HeatMap b("b", {0, 4});
  a.set(1, true);
  b.set(1, true);
  b.set(2, true);
  const std::vector<HeatMap> maps{a, b};
  CHECK(render_table(maps, {0, 4}) == "0x000          -\n0x001          a,b\n0x002          b\n0x003          -\n");
}

TEST_CASE("heat map errors") {
  const auto store = toy::build_toy_rom();
  auto broken = toy::default_state();
  broken.gpr(Gpr::Ebx) = 0;
  try {
    generate_raw_heatmap(store, make_runner(broken, toy::div_context()), {0x900, 0x910});
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Configuration);
  }

  HeatMap a("a", {0, 8});
  HeatMap b("b", {0, 9});
  CHECK_THROWS_AS(subtract_reference(a, b), Error);
  CHECK_THROWS_AS(locate_entrypoint(a), Error);
  CHECK_THROWS_AS(a.at(8), Error);
}

TEST_CASE("csv export") {
  HeatMap m("x", {0x10, 0x13});
  m.set(0x11, true);
  CHECK(to_csv(m) == "address,hit\n0x010,0\n0x011,1\n0x012,0\n");
}

TEST_CASE("address 0 is never a hit") {
  const auto store = toy::build_toy_rom();
  const auto raw = generate_raw_heatmap(store, make_runner(toy::default_state(), toy::div_context()), {0, 4});
  CHECK_FALSE(raw.at(0));
}
