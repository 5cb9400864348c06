#pragma once

// Interpreter for the microcode engine.
//
// A MicrocodeStore holds the ROM, patch RAM and match registers. A
// macroinstruction runs by fetching triads from its entry address until a
// sequence word signals completion, a fault occurs, or the step limit is hit.
// Stores, states and contexts are plain values, so sweeps can clone them
// freely across threads.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ucode/alu.hpp"
#include "ucode/container.hpp"
#include "ucode/uisa.hpp"

namespace ucode {

enum class Gpr : std::uint8_t { Eax, Ecx, Edx, Ebx, Esp, Ebp, Esi, Edi };

std::string_view gpr_name(Gpr r) noexcept;
std::optional<Gpr> parse_gpr(std::string_view name) noexcept;

/// Sparse byte-addressable memory with 4 KiB pages. Page 0 can never be
/// mapped, so address 0 is a guaranteed fault.
class Memory {
 public:
  static constexpr std::uint32_t kPageSize = 4096;

  /// Maps the page containing `address`. Throws Error{AddressRange} for page 0.
  void map_page(std::uint32_t address);
  void map_range(std::uint32_t address, std::uint32_t length);
  bool is_mapped(std::uint32_t address) const noexcept;

  std::optional<std::uint8_t> read8(std::uint32_t address) const noexcept;
  /// Returns false when the page is unmapped.
  bool write8(std::uint32_t address, std::uint8_t value) noexcept;

  /// First unmapped address in [address, address + length), if any.
  std::optional<std::uint32_t> first_unmapped(std::uint32_t address, std::uint32_t length) const noexcept;

  /// Little-endian helpers for setting up tests; they map pages as needed.
  void store32(std::uint32_t address, std::uint32_t value);
  std::uint32_t load32(std::uint32_t address) const;

  std::vector<std::uint32_t> mapped_pages() const;

  friend bool operator==(const Memory&, const Memory&) = default;

 private:
  std::map<std::uint32_t, std::array<std::uint8_t, kPageSize>> pages_;
};

struct MachineState {
  std::array<std::uint32_t, 8> gprs{};
  std::array<std::uint32_t, 8> temps{};  // t1..t8
  Flags flags{};
  Memory memory;

  std::uint32_t& gpr(Gpr r) { return gprs[static_cast<std::size_t>(r)]; }
  std::uint32_t gpr(Gpr r) const { return gprs[static_cast<std::size_t>(r)]; }

  friend bool operator==(const MachineState&, const MachineState&) = default;
};

struct MacroContext {
  std::string name;
  std::uint16_t entry_address = 0;
  std::optional<Gpr> operand1;  // bound to regm
  std::optional<Gpr> operand2;  // bound to reg
  std::vector<std::uint8_t> instruction_bytes;
  std::uint32_t instruction_address = 0;
  std::uint32_t next_pc = 0;  // value of pcd
};

enum class FaultKind { PageFault, GeneralProtection, StepLimit, Engine };
enum class Access { Read, Write };

struct Fault {
  FaultKind kind = FaultKind::Engine;
  std::uint32_t address = 0;  // faulting address for page faults
  Access access = Access::Read;
  std::string detail;

  friend bool operator==(const Fault&, const Fault&) = default;
};

std::string describe(const Fault& fault);

class MicrocodeStore {
 public:
  /// ROM filled with `fill`, empty patch RAM, match registers cleared.
  explicit MicrocodeStore(const Triad& fill = nop_triad(SequenceWord::complete()));
  /// Takes exactly kRomTriads triads. Throws Error{Configuration} otherwise.
  explicit MicrocodeStore(std::vector<Triad> rom);

  /// Loads patch RAM and match registers. With `verify`, a checksum mismatch
  /// rejects the update with a general protection fault and leaves the store
  /// untouched.
  std::optional<Fault> apply_update(const UpdateFile& update, bool verify = true);

  /// Address actually read when fetching `address`: a ROM address matching
  /// a match register i is redirected to patch triad 2*i.
  std::uint16_t resolve(std::uint16_t address) const noexcept;

  /// Triad at `address` after redirection, or nullptr when the address lies
  /// past the populated patch RAM.
  const Triad* fetch(std::uint16_t address) const noexcept;
  /// Like fetch, but throws Error{AddressRange}.
  const Triad& fetch_triad(std::uint16_t address) const;

  const Triad& rom_triad(std::uint16_t address) const;
  void set_rom_triad(std::uint16_t address, const Triad& triad);

  const std::vector<Triad>& patch_ram() const noexcept { return patch_; }
  const MatchRegisterFile& match_registers() const noexcept { return match_; }
  std::uint16_t end_address() const noexcept {
    return static_cast<std::uint16_t>(kPatchBase + patch_.size());
  }

 private:
  std::shared_ptr<std::vector<Triad>> rom_;  // shared between copies, copied on write
  std::vector<Triad> patch_;
  MatchRegisterFile match_{};
};

struct RegisterDelta {
  std::string name;
  std::uint32_t before = 0;
  std::uint32_t after = 0;

  friend bool operator==(const RegisterDelta&, const RegisterDelta&) = default;
};

struct MemoryDelta {
  std::uint32_t address = 0;
  std::uint8_t before = 0;
  std::uint8_t after = 0;

  friend bool operator==(const MemoryDelta&, const MemoryDelta&) = default;
};

struct TraceRecord {
  std::uint16_t address = 0;            // address requested by the sequencer
  std::uint16_t effective_address = 0;  // after match-register redirection
  std::uint8_t slot = 0;
  Microinstruction insn{};
  std::vector<RegisterDelta> registers;
  std::vector<MemoryDelta> memory;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

enum class SequencerAction { NextTriad, Branch, Complete };

struct InsnResult {
  std::optional<Fault> fault;
  std::optional<std::uint16_t> branch_target;  // taken branchCC
  std::optional<std::uint32_t> write_pc;
};

struct StepResult {
  std::optional<Fault> fault;
  SequencerAction action = SequencerAction::NextTriad;
  std::uint16_t target = 0;  // for Branch
  std::optional<std::uint32_t> write_pc;
};

/// Executes one microinstruction. On a fault the state is left unchanged.
/// `memory_log`, when given, receives every byte written.
InsnResult execute_insn(MachineState& state, const MacroContext& ctx, const Microinstruction& insn,
                        std::vector<MemoryDelta>* memory_log = nullptr);

/// Executes slots 0..2 then applies the sequence word. A taken branchCC ends
/// the triad at once and overrides the sequence word.
StepResult step_triad(MachineState& state, const MacroContext& ctx, const Triad& triad,
                      std::vector<TraceRecord>* trace = nullptr, std::uint16_t address = 0,
                      std::uint16_t effective_address = 0);

struct RunOptions {
  std::size_t step_limit = 4096;  // triads
  bool record_trace = false;
};

struct ExecutionOutcome {
  MachineState final_state;
  std::uint32_t next_decode_pc = 0;
  std::optional<Fault> fault;
  std::vector<std::uint16_t> fetched;  // sequencer addresses in fetch order, before redirection
  std::vector<TraceRecord> trace;
  std::size_t triads_executed = 0;
};

/// Resets temps, writes the instruction bytes into memory, and runs from
/// ctx.entry_address. writePC takes effect only on normal completion.
ExecutionOutcome run_macroinstruction(const MicrocodeStore& store, MachineState state, const MacroContext& ctx,
                                      const RunOptions& options = {});

}  // namespace ucode
