#include <doctest.h>

#include <random>

#include "ucode/container.hpp"
#include "ucode/error.hpp"

using namespace ucode;

namespace {

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t off) {
  return b[off] | (b[off + 1] << 8) | (b[off + 2] << 16) | (std::uint32_t{b[off + 3]} << 24);
}

UpdateFile sample() {
  UpdateFile u;
  u.header.date = 0x20170203;
  u.header.patch_id = 0x06000832;
  u.header.patch_block = 0x8001;
  u.header.init = 0x7f;
  u.header.northbridge_id = 0x11223344;
  u.header.southbridge_id = 0x55667788;
  u.header.cpuid = 0x00100f53;
  u.header.magic = 0xaaaaaaaa;
  u.match_registers = {0x7e5, 0, 0, 0, 0, 0, 0, 0x12345678};
  u.triads.push_back(nop_triad(SequenceWord::branch(0x7e6)));
  u.triads.push_back(nop_triad(SequenceWord::complete()));
  return u;
}

}  // namespace

TEST_CASE("header fields land at their byte offsets") {
  const auto bytes = serialize_update(sample());
  REQUIRE(bytes.size() == 64 + 2 * 28);
  CHECK(le32(bytes, 0) == 0x20170203);
  CHECK(le32(bytes, 4) == 0x06000832);
  CHECK((bytes[8] | (bytes[9] << 8)) == 0x8001);
  CHECK(bytes[10] == 2);
  CHECK(bytes[11] == 0x7f);
  CHECK(le32(bytes, 16) == 0x11223344);
  CHECK(le32(bytes, 20) == 0x55667788);
  CHECK(le32(bytes, 24) == 0x00100f53);
  CHECK(le32(bytes, 28) == 0xaaaaaaaa);
  CHECK(le32(bytes, 32) == 0x7e5);
  CHECK(le32(bytes, 60) == 0x12345678);

  std::uint32_t sum = 0;
  for (std::size_t off = 64; off < bytes.size(); off += 4) sum += le32(bytes, off);
  CHECK(le32(bytes, 12) == sum);
}

TEST_CASE("parse inverts serialize") {
  auto u = sample();
  const auto bytes = serialize_update(u);
  const auto back = parse_update(bytes, true);
  CHECK(back.header.len == 2);
  CHECK(back.header.checksum == compute_checksum(u));
  CHECK(serialize_update(back, ChecksumMode::Keep) == bytes);
}

TEST_CASE("container errors") {
  const auto bytes = serialize_update(sample());
  CHECK_THROWS_AS(parse_update(std::span(bytes).first(40)), Error);

  auto short_body = bytes;
  short_body.pop_back();
  try {
    parse_update(short_body);
    FAIL("expected a length mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }

  auto tampered = bytes;
  tampered[70] ^= 1;
  CHECK_NOTHROW(parse_update(tampered, false));
  try {
    parse_update(tampered, true);
    FAIL("expected a checksum mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ChecksumMismatch);
  }

  UpdateFile big;
  big.triads.assign(256, nop_triad());
  try {
    serialize_update(big);
    FAIL("expected too many triads");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyTriads);
  }
}

TEST_CASE("keep mode preserves a stale checksum") {
  auto u = sample();
  u.header.checksum = 0xdeadbeef;
  const auto bytes = serialize_update(u, ChecksumMode::Keep);
  CHECK(le32(bytes, 12) == 0xdeadbeef);
  CHECK(le32(serialize_update(u), 12) == compute_checksum(u));
}

TEST_CASE("deobfuscation hook") {
  const auto bytes = serialize_update(sample());
  CHECK(deobfuscate_triads(bytes) == bytes);
  const auto flipped = deobfuscate_triads(bytes, [](std::span<std::uint8_t> region) {
    for (auto& b : region) b ^= 0xff;
  });
  CHECK(std::equal(bytes.begin(), bytes.begin() + 64, flipped.begin()));
  CHECK(flipped[64] == static_cast<std::uint8_t>(~bytes[64]));
}

TEST_CASE("empty update") {
  UpdateFile u;
  const auto bytes = serialize_update(u);
  CHECK(bytes.size() == 64);
  CHECK(parse_update(bytes, true).triads.empty());
}
