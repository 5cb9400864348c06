#pragma once

// Crash-interception heat maps.
//
// For every triad address in a range, a one-triad update redirects that
// address to a triad which stores to an unmapped page. If the macroinstruction
// faults, its decode fetched the address. Subtracting a reference map (taken
// with instructions every test run needs) leaves the triads private to the
// instruction under test.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ucode/engine.hpp"

namespace ucode {

struct AddressRange {
  std::uint16_t begin = 0;
  std::uint16_t end = 0;  // exclusive

  std::size_t size() const noexcept { return end > begin ? end - begin : 0; }
  friend bool operator==(const AddressRange&, const AddressRange&) = default;
};

class HeatMap {
 public:
  HeatMap() = default;
  HeatMap(std::string label, AddressRange domain);

  const std::string& label() const noexcept { return label_; }
  AddressRange domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return hits_.size(); }

  bool contains(std::uint16_t address) const noexcept;
  /// Throws Error{AddressRange} outside the domain.
  bool at(std::uint16_t address) const;
  void set(std::uint16_t address, bool hit);

  std::vector<std::uint16_t> hits() const;

  friend bool operator==(const HeatMap&, const HeatMap&) = default;

 private:
  std::string label_;
  AddressRange domain_{};
  std::vector<std::uint8_t> hits_;
};

/// Runs one macroinstruction (or a fixed sequence) against a store.
/// Must be callable concurrently from several threads.
using MacroRunner = std::function<ExecutionOutcome(const MicrocodeStore&)>;

MacroRunner make_runner(MachineState state, MacroContext ctx, RunOptions options = {});
/// Runs the contexts back to back on one evolving state; stops at the first fault.
MacroRunner make_sequence_runner(MachineState state, std::vector<MacroContext> contexts, RunOptions options = {});

/// One-triad update: match register 0 = address, triad = store to address 0.
UpdateFile crash_patch(std::uint16_t address);

/// Throws Error{Configuration} if the runner already faults without any
/// interception. Address 0 can never be intercepted and is always false.
HeatMap generate_raw_heatmap(const MicrocodeStore& store, const MacroRunner& runner, AddressRange range,
                             std::string label = {});
HeatMap generate_raw_heatmap_serial(const MicrocodeStore& store, const MacroRunner& runner, AddressRange range,
                                    std::string label = {});

/// raw AND NOT reference. Throws Error{DomainMismatch}.
HeatMap subtract_reference(const HeatMap& raw, const HeatMap& reference);

/// First address of `fetch_order` that is set in the clean map; without a
/// fetch order, the lowest set address. Throws Error{EmptyMap}.
std::uint16_t locate_entrypoint(const HeatMap& clean, std::span<const std::uint16_t> fetch_order = {});

/// Range-compressed rendering of several maps over `range`, one row per run
/// of consecutive addresses sharing a label; "-" marks unattributed runs.
std::string render_table(std::span<const HeatMap> maps, AddressRange range);

/// "address,hit" CSV with one row per address in the domain.
std::string to_csv(const HeatMap& map);

}  // namespace ucode
