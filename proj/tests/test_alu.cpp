#include <doctest.h>

#include <random>

#include "ucode/alu.hpp"

using namespace ucode;
using tables::OpKind;

namespace {

struct Ref {
  std::uint32_t value;
  Flags flags;
  bool writes;
};

std::int64_t sext(std::uint64_t v, unsigned w) {
  v &= (std::uint64_t{1} << w) - 1;
  return (v >> (w - 1)) ? static_cast<std::int64_t>(v) - (std::int64_t{1} << w) : static_cast<std::int64_t>(v);
}

bool fits_signed(std::int64_t v, unsigned w) {
  return v >= -(std::int64_t{1} << (w - 1)) && v < (std::int64_t{1} << (w - 1));
}

// Written without looking at the production formulas: arithmetic overflow
// comes from signed range checks, shifts and rotates move one bit at a time.
Ref reference(OpKind op, std::uint32_t a32, std::uint32_t b32, unsigned w, Flags in) {
  const std::uint64_t m = (std::uint64_t{1} << w) - 1;
  const std::uint64_t a = a32 & m;
  const std::uint64_t b = b32 & m;
  Flags f = in;
  auto zs = [&](std::uint64_t r) {
    f.zf = (r & m) == 0;
    f.sf = ((r >> (w - 1)) & 1) != 0;
  };
  auto arith_add = [&](std::uint64_t c) {
    const std::uint64_t sum = a + b + c;
    f.cf = sum > m;
    f.of = !fits_signed(sext(a, w) + sext(b, w) + static_cast<std::int64_t>(c), w);
    zs(sum);
    return Ref{static_cast<std::uint32_t>(sum & m), f, true};
  };
  auto arith_sub = [&](std::uint64_t c, bool writes) {
    const std::uint64_t diff = (a - b - c) & m;
    f.cf = a < b + c;
    f.of = !fits_signed(sext(a, w) - sext(b, w) - static_cast<std::int64_t>(c), w);
    zs(diff);
    return Ref{static_cast<std::uint32_t>(diff), f, writes};
  };
  auto logic = [&](std::uint64_t r, bool writes) {
    f.cf = false;
    f.of = false;
    zs(r);
    return Ref{static_cast<std::uint32_t>(r & m), f, writes};
  };
  const unsigned count = static_cast<unsigned>(b % w);
  auto msb = [&](std::uint64_t v) { return ((v >> (w - 1)) & 1) != 0; };

  switch (op) {
    case OpKind::Add: return arith_add(0);
    case OpKind::Adc: return arith_add(in.cf ? 1 : 0);
    case OpKind::Sub: return arith_sub(0, true);
    case OpKind::Sbb: return arith_sub(in.cf ? 1 : 0, true);
    case OpKind::Cmp: return arith_sub(0, false);
    case OpKind::And: return logic(a & b, true);
    case OpKind::Or: return logic(a | b, true);
    case OpKind::Xor: return logic(a ^ b, true);
    case OpKind::Test: return logic(a & b, false);
    case OpKind::Sll:
    case OpKind::Srl: {
      if (count == 0) return {static_cast<std::uint32_t>(a), in, true};
      std::uint64_t r = a;
      for (unsigned i = 0; i < count; ++i) {
        if (op == OpKind::Sll) {
          f.cf = msb(r);
          r = (r << 1) & m;
        } else {
          f.cf = r & 1;
          r >>= 1;
        }
      }
      f.of = count == 1 && (op == OpKind::Sll ? msb(r) != f.cf : msb(a));
      zs(r);
      return {static_cast<std::uint32_t>(r), f, true};
    }
    case OpKind::Rll:
    case OpKind::Rrl: {
      if (count == 0) return {static_cast<std::uint32_t>(a), in, true};
      std::uint64_t r = a;
      for (unsigned i = 0; i < count; ++i) {
        if (op == OpKind::Rll) {
          r = ((r << 1) | (msb(r) ? 1 : 0)) & m;
        } else {
          r = (r >> 1) | ((r & 1) << (w - 1));
        }
      }
      f.cf = op == OpKind::Rll ? (r & 1) != 0 : msb(r);
      if (count == 1) f.of = op == OpKind::Rll ? msb(r) != f.cf : msb(r) != (((r >> (w - 2)) & 1) != 0);
      return {static_cast<std::uint32_t>(r), f, true};
    }
    case OpKind::Mul: {
      const std::uint64_t p = a * b;
      f.cf = f.of = p > m;
      zs(p);
      return {static_cast<std::uint32_t>(p & m), f, true};
    }
    case OpKind::Imul: {
      const std::int64_t p = sext(a, w) * sext(b, w);
      f.cf = f.of = !fits_signed(p, w);
      zs(static_cast<std::uint64_t>(p));
      return {static_cast<std::uint32_t>(static_cast<std::uint64_t>(p) & m), f, true};
    }
    case OpKind::Mov: return {static_cast<std::uint32_t>(b), in, true};
    case OpKind::Not: return {static_cast<std::uint32_t>(~a & m), in, true};
    case OpKind::Bswap: {
      std::uint8_t bytes[4];
      const unsigned n = w / 8;
      for (unsigned i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(a >> (8 * i));
      std::uint32_t r = 0;
      for (unsigned i = 0; i < n; ++i) r = (r << 8) | bytes[i];
      return {r, in, true};
    }
    default: break;
  }
  return {0, in, false};
}

std::uint32_t interesting(std::mt19937& rng) {
  static constexpr std::uint32_t edges[] = {0, 1, 2, 0x7f, 0x80, 0xff, 0x7fff, 0x8000, 0xffff,
                                            0x7fffffff, 0x80000000, 0xffffffff, 7, 8, 15, 16, 31, 32};
  if (rng() % 4 == 0) return edges[rng() % std::size(edges)];
  return rng();
}

}  // namespace

TEST_CASE("ALU matches the reference on random operands") {
  constexpr OpKind ops[] = {OpKind::Add, OpKind::Adc, OpKind::Sub, OpKind::Sbb, OpKind::And, OpKind::Or,
                            OpKind::Xor, OpKind::Cmp, OpKind::Test, OpKind::Rll, OpKind::Rrl, OpKind::Sll,
                            OpKind::Srl, OpKind::Mov, OpKind::Mul, OpKind::Imul, OpKind::Bswap, OpKind::Not};
  std::mt19937 rng(2017);
  for (OpKind op : ops) {
    for (unsigned w : {8u, 16u, 32u}) {
      std::size_t mismatches = 0;
      for (int i = 0; i < 100000; ++i) {
        const auto a = interesting(rng);
        const auto b = interesting(rng);
        const Flags in{(rng() & 1) != 0, (rng() & 2) != 0, (rng() & 4) != 0, (rng() & 8) != 0};
        const auto got = alu_execute(op, a, b, w, in);
        const auto want = reference(op, a, b, w, in);
        if (got.value != want.value || !(got.flags == want.flags) || got.writes_destination != want.writes) {
          ++mismatches;
        }
      }
      CAPTURE(static_cast<int>(op));
      CAPTURE(w);
      CHECK(mismatches == 0);
    }
  }
}

TEST_CASE("condition table") {
  bool valid = false;
  Flags f{};
  CHECK(evaluate_condition(0b00000, f, valid));
  CHECK(valid);
  CHECK_FALSE(evaluate_condition(0b00001, f, valid));
  f.zf = true;
  CHECK(evaluate_condition(0b00010, f, valid));
  CHECK_FALSE(evaluate_condition(0b00011, f, valid));
  f = {false, false, true, false};
  CHECK(evaluate_condition(0b01100, f, valid));  // LT: SF != OF
  CHECK(evaluate_condition(0b01110, f, valid));  // LE
  f = {false, true, false, false};
  CHECK(evaluate_condition(0b01010, f, valid));  // BE
  evaluate_condition(0b10000, f, valid);
  CHECK_FALSE(valid);
}
