#include "ucode/container.hpp"

#include <fmt/format.h>

#include "ucode/error.hpp"

namespace ucode {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& buf, std::size_t off, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) buf[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(std::span<const std::uint8_t> buf, std::size_t off) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[off + i]) << (8 * i);
  return v;
}

}  // namespace

std::uint32_t compute_checksum(std::span<const std::uint8_t> triad_region) {
  std::uint32_t sum = 0;
  std::size_t i = 0;
  for (; i + 4 <= triad_region.size(); i += 4) sum += get_le<std::uint32_t>(triad_region, i);
  // The region is always a multiple of 4 for well-formed files; a short tail
  // is zero-padded.
  std::uint32_t tail = 0;
  for (std::size_t k = 0; i + k < triad_region.size(); ++k) tail |= std::uint32_t{triad_region[i + k]} << (8 * k);
  return sum + tail;
}

std::uint32_t compute_checksum(const UpdateFile& update) {
  std::vector<std::uint8_t> region(update.triads.size() * kTriadBytes);
  for (std::size_t i = 0; i < update.triads.size(); ++i) {
    write_triad(update.triads[i], std::span<std::uint8_t, kTriadBytes>(region.data() + i * kTriadBytes, kTriadBytes));
  }
  return compute_checksum(region);
}

UpdateFile parse_update(std::span<const std::uint8_t> bytes, bool verify) {
  if (bytes.size() < kHeaderBytes) {
    throw Error(ErrorCode::Truncated,
                fmt::format("update file is {} bytes, header needs {}", bytes.size(), kHeaderBytes));
  }
  UpdateFile u;
  auto& h = u.header;
  h.date = get_le<std::uint32_t>(bytes, offsets::kDate);
  h.patch_id = get_le<std::uint32_t>(bytes, offsets::kPatchId);
  h.patch_block = get_le<std::uint16_t>(bytes, offsets::kPatchBlock);
  h.len = bytes[offsets::kLen];
  h.init = bytes[offsets::kInit];
  h.checksum = get_le<std::uint32_t>(bytes, offsets::kChecksum);
  h.northbridge_id = get_le<std::uint32_t>(bytes, offsets::kNorthbridge);
  h.southbridge_id = get_le<std::uint32_t>(bytes, offsets::kSouthbridge);
  h.cpuid = get_le<std::uint32_t>(bytes, offsets::kCpuid);
  h.magic = get_le<std::uint32_t>(bytes, offsets::kMagic);
  for (std::size_t i = 0; i < kMatchRegisterCount; ++i) {
    u.match_registers[i] = get_le<std::uint32_t>(bytes, offsets::kMatchRegisters + 4 * i);
  }

  const std::size_t expected = kHeaderBytes + kTriadBytes * h.len;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("header declares {} triads ({} bytes) but file has {} bytes", h.len, expected,
                            bytes.size()));
  }

  u.triads.reserve(h.len);
  for (std::size_t i = 0; i < h.len; ++i) {
    u.triads.push_back(read_triad(bytes.subspan(offsets::kTriads + i * kTriadBytes).first<kTriadBytes>()));
  }

  if (verify) {
    const std::uint32_t actual = compute_checksum(bytes.subspan(offsets::kTriads));
    if (actual != h.checksum) {
      throw Error(ErrorCode::ChecksumMismatch,
                  fmt::format("checksum mismatch: header {:#010x}, computed {:#010x}", h.checksum, actual));
    }
  }
  return u;
}

std::vector<std::uint8_t> serialize_update(const UpdateFile& update, ChecksumMode mode) {
  if (update.triads.size() > kMaxTriads) {
    throw Error(ErrorCode::TooManyTriads,
                fmt::format("{} triads do not fit the 8-bit length field", update.triads.size()));
  }
  std::vector<std::uint8_t> out(kHeaderBytes + kTriadBytes * update.triads.size());
  for (std::size_t i = 0; i < update.triads.size(); ++i) {
    write_triad(update.triads[i],
                std::span<std::uint8_t, kTriadBytes>(out.data() + offsets::kTriads + i * kTriadBytes, kTriadBytes));
  }
  const auto& h = update.header;
  const std::uint32_t checksum = mode == ChecksumMode::Recompute
                                     ? compute_checksum(std::span<const std::uint8_t>(out).subspan(offsets::kTriads))
                                     : h.checksum;
  put_le(out, offsets::kDate, h.date);
  put_le(out, offsets::kPatchId, h.patch_id);
  put_le(out, offsets::kPatchBlock, h.patch_block);
  out[offsets::kLen] = static_cast<std::uint8_t>(update.triads.size());
  out[offsets::kInit] = h.init;
  put_le(out, offsets::kChecksum, checksum);
  put_le(out, offsets::kNorthbridge, h.northbridge_id);
  put_le(out, offsets::kSouthbridge, h.southbridge_id);
  put_le(out, offsets::kCpuid, h.cpuid);
  put_le(out, offsets::kMagic, h.magic);
  for (std::size_t i = 0; i < kMatchRegisterCount; ++i) {
    put_le(out, offsets::kMatchRegisters + 4 * i, update.match_registers[i]);
  }
  return out;
}

std::vector<std::uint8_t> deobfuscate_triads(std::span<const std::uint8_t> bytes, const TriadTransform& transform) {
  std::vector<std::uint8_t> out(bytes.begin(), bytes.end());
  if (transform && out.size() > kHeaderBytes) {
    transform(std::span<std::uint8_t>(out).subspan(offsets::kTriads));
  }
  return out;
}

}  // namespace ucode
