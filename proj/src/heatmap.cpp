#include "ucode/heatmap.hpp"

#include <fmt/format.h>

#include <exception>

#include "ucode/error.hpp"
#include "ucode/rtl.hpp"

namespace ucode {

HeatMap::HeatMap(std::string label, AddressRange domain)
    : label_(std::move(label)), domain_(domain), hits_(domain.size(), 0) {}

bool HeatMap::contains(std::uint16_t address) const noexcept {
  return address >= domain_.begin && address < domain_.end;
}

bool HeatMap::at(std::uint16_t address) const {
  if (!contains(address)) throw Error(ErrorCode::AddressRange, fmt::format("{:#05x} is outside the heat map", address));
  return hits_[address - domain_.begin] != 0;
}

void HeatMap::set(std::uint16_t address, bool hit) {
  if (!contains(address)) throw Error(ErrorCode::AddressRange, fmt::format("{:#05x} is outside the heat map", address));
  hits_[address - domain_.begin] = hit ? 1 : 0;
}

std::vector<std::uint16_t> HeatMap::hits() const {
  std::vector<std::uint16_t> out;
  for (std::size_t i = 0; i < hits_.size(); ++i) {
    if (hits_[i]) out.push_back(static_cast<std::uint16_t>(domain_.begin + i));
  }
  return out;
}

MacroRunner make_runner(MachineState state, MacroContext ctx, RunOptions options) {
  return [state = std::move(state), ctx = std::move(ctx), options](const MicrocodeStore& store) {
    return run_macroinstruction(store, state, ctx, options);
  };
}

MacroRunner make_sequence_runner(MachineState state, std::vector<MacroContext> contexts, RunOptions options) {
  return [state = std::move(state), contexts = std::move(contexts), options](const MicrocodeStore& store) {
    ExecutionOutcome combined;
    combined.final_state = state;
    for (const auto& ctx : contexts) {
      auto out = run_macroinstruction(store, std::move(combined.final_state), ctx, options);
      combined.final_state = std::move(out.final_state);
      combined.next_decode_pc = out.next_decode_pc;
      combined.fault = std::move(out.fault);
      combined.fetched.insert(combined.fetched.end(), out.fetched.begin(), out.fetched.end());
      combined.trace.insert(combined.trace.end(), out.trace.begin(), out.trace.end());
      combined.triads_executed += out.triads_executed;
      if (combined.fault) break;
    }
    return combined;
  };
}

UpdateFile crash_patch(std::uint16_t address) {
  static const rtl::AssembledProgram program = rtl::assemble_text(
      "st [zerod], zerod\n"
      ".sw_complete\n");
  const rtl::MatchPragma m0{0, static_cast<std::uint16_t>(address & kAddressMask)};
  return rtl::make_update(program, std::span(&m0, 1));
}

namespace {

void check_baseline(const MicrocodeStore& store, const MacroRunner& runner) {
  const auto baseline = runner(store);
  if (baseline.fault) {
    throw Error(ErrorCode::Configuration,
                fmt::format("the macroinstruction faults without interception: {}", describe(*baseline.fault)));
  }
}

bool probe(const MicrocodeStore& store, const MacroRunner& runner, std::uint16_t address) {
  if (address == 0 || address >= kRomTriads) return false;
  MicrocodeStore patched = store;
  patched.apply_update(crash_patch(address), false);
  return runner(patched).fault.has_value();
}

}  // namespace

HeatMap generate_raw_heatmap(const MicrocodeStore& store, const MacroRunner& runner, AddressRange range,
                             std::string label) {
  HeatMap map(std::move(label), range);
  if (range.size() == 0) return map;
  check_baseline(store, runner);

  const auto n = static_cast<std::int64_t>(range.size());
  std::vector<std::uint8_t> hits(range.size(), 0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    try {
      hits[i] = probe(store, runner, static_cast<std::uint16_t>(range.begin + i)) ? 1 : 0;
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::int64_t i = 0; i < n; ++i) map.set(static_cast<std::uint16_t>(range.begin + i), hits[i] != 0);
  return map;
}

HeatMap generate_raw_heatmap_serial(const MicrocodeStore& store, const MacroRunner& runner, AddressRange range,
                                    std::string label) {
  HeatMap map(std::move(label), range);
  if (range.size() == 0) return map;
  check_baseline(store, runner);
  for (std::uint16_t a = range.begin; a < range.end; ++a) map.set(a, probe(store, runner, a));
  return map;
}

HeatMap subtract_reference(const HeatMap& raw, const HeatMap& reference) {
  if (raw.domain() != reference.domain()) {
    throw Error(ErrorCode::DomainMismatch,
                fmt::format("heat map domains differ: [{:#05x}, {:#05x}) vs [{:#05x}, {:#05x})", raw.domain().begin,
                            raw.domain().end, reference.domain().begin, reference.domain().end));
  }
  HeatMap clean(raw.label(), raw.domain());
  for (std::uint16_t a = raw.domain().begin; a < raw.domain().end; ++a) clean.set(a, raw.at(a) && !reference.at(a));
  return clean;
}

std::uint16_t locate_entrypoint(const HeatMap& clean, std::span<const std::uint16_t> fetch_order) {
  const auto hits = clean.hits();
  if (hits.empty()) throw Error(ErrorCode::EmptyMap, fmt::format("heat map '{}' has no hits", clean.label()));
  for (auto a : fetch_order) {
    if (clean.contains(a) && clean.at(a)) return a;
  }
  return hits.front();
}

std::string render_table(std::span<const HeatMap> maps, AddressRange range) {
  auto label_at = [&](std::uint16_t a) -> std::string {
    std::string label;
    for (const auto& m : maps) {
      if (m.contains(a) && m.at(a)) {
        if (!label.empty()) label += ",";
        label += m.label().empty() ? "?" : m.label();
      }
    }
    return label.empty() ? "-" : label;
  };

  std::string out;
  std::uint16_t a = range.begin;
  while (a < range.end) {
    const std::string label = label_at(a);
    std::uint16_t last = a;
    while (last + 1 < range.end && label_at(static_cast<std::uint16_t>(last + 1)) == label) ++last;
    const std::string addr = last == a ? fmt::format("{:#05x}", a) : fmt::format("{:#05x} - {:#05x}", a, last);
    out += fmt::format("{:<13}  {}\n", addr, label);
    a = static_cast<std::uint16_t>(last + 1);
  }
  return out;
}

std::string to_csv(const HeatMap& map) {
  std::string out = "address,hit\n";
  for (std::uint16_t a = map.domain().begin; a < map.domain().end; ++a) {
    out += fmt::format("{:#05x},{}\n", a, map.at(a) ? 1 : 0);
  }
  return out;
}

}  // namespace ucode
