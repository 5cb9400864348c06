#pragma once

// Microcode update file: 64-byte header (32 bytes of metadata, 8 match
// registers) followed by `len` triads of 28 bytes each. All fields are
// little-endian.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ucode/uisa.hpp"

namespace ucode {

struct UpdateHeader {
  std::uint32_t date = 0;
  std::uint32_t patch_id = 0;
  std::uint16_t patch_block = 0;
  std::uint8_t len = 0;
  std::uint8_t init = 0;
  std::uint32_t checksum = 0;
  std::uint32_t northbridge_id = 0;
  std::uint32_t southbridge_id = 0;
  std::uint32_t cpuid = 0;
  std::uint32_t magic = 0;

  friend bool operator==(const UpdateHeader&, const UpdateHeader&) = default;
};

// Byte offsets of the header fields.
namespace offsets {
inline constexpr std::size_t kDate = 0;
inline constexpr std::size_t kPatchId = 4;
inline constexpr std::size_t kPatchBlock = 8;
inline constexpr std::size_t kLen = 10;
inline constexpr std::size_t kInit = 11;
inline constexpr std::size_t kChecksum = 12;
inline constexpr std::size_t kNorthbridge = 16;
inline constexpr std::size_t kSouthbridge = 20;
inline constexpr std::size_t kCpuid = 24;
inline constexpr std::size_t kMagic = 28;
inline constexpr std::size_t kMatchRegisters = 32;
inline constexpr std::size_t kTriads = 64;
}  // namespace offsets

inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::size_t kMatchRegisterCount = 8;
inline constexpr std::size_t kMaxTriads = 255;

/// Raw 32-bit match register values; the low 12 bits hold a ROM triad
/// address and 0 means the register is unused.
using MatchRegisterFile = std::array<std::uint32_t, kMatchRegisterCount>;

struct UpdateFile {
  UpdateHeader header{};
  MatchRegisterFile match_registers{};
  std::vector<Triad> triads;

  friend bool operator==(const UpdateFile&, const UpdateFile&) = default;
};

enum class ChecksumMode { Recompute, Keep };

/// Throws Error{Truncated | LengthMismatch}; with `verify` also
/// Error{ChecksumMismatch}.
UpdateFile parse_update(std::span<const std::uint8_t> bytes, bool verify = false);

/// Sets `len` from the triad count. Throws Error{TooManyTriads}.
std::vector<std::uint8_t> serialize_update(const UpdateFile& update,
                                           ChecksumMode mode = ChecksumMode::Recompute);

/// 32-bit wrapping sum of the little-endian words in the triad region.
std::uint32_t compute_checksum(const UpdateFile& update);
std::uint32_t compute_checksum(std::span<const std::uint8_t> triad_region);

using TriadTransform = std::function<void(std::span<std::uint8_t>)>;

/// Applies `transform` to the triad region in place of the real, unpublished
/// deobfuscation. The default (empty) transform leaves the bytes unchanged.
std::vector<std::uint8_t> deobfuscate_triads(std::span<const std::uint8_t> bytes,
                                             const TriadTransform& transform = {});

}  // namespace ucode
