#include "ucode/alu.hpp"

namespace ucode {

namespace {

using tables::OpKind;

struct Width {
  unsigned bits;
  std::uint32_t mask;
  std::uint32_t sign;

  explicit Width(unsigned w)
      : bits(w), mask(w >= 32 ? 0xffffffffu : (1u << w) - 1), sign(1u << (w - 1)) {}

  bool msb(std::uint32_t v) const { return (v & sign) != 0; }
  std::int64_t signed_value(std::uint32_t v) const {
    v &= mask;
    return msb(v) ? static_cast<std::int64_t>(v) - (std::int64_t{1} << bits) : static_cast<std::int64_t>(v);
  }
};

void set_zs(Flags& f, std::uint32_t r, const Width& w) {
  f.zf = (r & w.mask) == 0;
  f.sf = w.msb(r);
}

AluResult add(std::uint32_t a, std::uint32_t b, bool carry_in, const Width& w, Flags f) {
  const std::uint64_t full = std::uint64_t{a} + b + (carry_in ? 1 : 0);
  const std::uint32_t r = static_cast<std::uint32_t>(full) & w.mask;
  f.cf = full > w.mask;
  f.of = w.msb((a ^ r) & (b ^ r));
  set_zs(f, r, w);
  return {r, f, true};
}

AluResult sub(std::uint32_t a, std::uint32_t b, bool borrow_in, const Width& w, Flags f) {
  const std::uint64_t subtrahend = std::uint64_t{b} + (borrow_in ? 1 : 0);
  const std::uint32_t r = static_cast<std::uint32_t>(std::uint64_t{a} - subtrahend) & w.mask;
  f.cf = std::uint64_t{a} < subtrahend;
  f.of = w.msb((a ^ b) & (a ^ r));
  set_zs(f, r, w);
  return {r, f, true};
}

AluResult logic(std::uint32_t r, const Width& w, Flags f) {
  r &= w.mask;
  f.cf = false;
  f.of = false;
  set_zs(f, r, w);
  return {r, f, true};
}

}  // namespace

AluResult alu_execute(OpKind op, std::uint32_t a, std::uint32_t b, unsigned width, Flags in) {
  const Width w(width);
  a &= w.mask;
  b &= w.mask;
  const unsigned count = b & (w.bits - 1);

  switch (op) {
    case OpKind::Add:
      return add(a, b, false, w, in);
    case OpKind::Adc:
      return add(a, b, in.cf, w, in);
    case OpKind::Sub:
      return sub(a, b, false, w, in);
    case OpKind::Sbb:
      return sub(a, b, in.cf, w, in);
    case OpKind::Cmp: {
      auto r = sub(a, b, false, w, in);
      r.writes_destination = false;
      return r;
    }
    case OpKind::And:
      return logic(a & b, w, in);
    case OpKind::Or:
      return logic(a | b, w, in);
    case OpKind::Xor:
      return logic(a ^ b, w, in);
    case OpKind::Test: {
      auto r = logic(a & b, w, in);
      r.writes_destination = false;
      return r;
    }

    case OpKind::Sll: {
      if (count == 0) return {a, in, true};
      Flags f = in;
      const std::uint32_t r = (a << count) & w.mask;
      f.cf = ((a >> (w.bits - count)) & 1u) != 0;
      f.of = count == 1 ? (w.msb(r) != f.cf) : false;
      set_zs(f, r, w);
      return {r, f, true};
    }
    case OpKind::Srl: {
      if (count == 0) return {a, in, true};
      Flags f = in;
      const std::uint32_t r = a >> count;
      f.cf = ((a >> (count - 1)) & 1u) != 0;
      f.of = count == 1 ? w.msb(a) : false;
      set_zs(f, r, w);
      return {r, f, true};
    }
    case OpKind::Rll: {
      if (count == 0) return {a, in, true};
      Flags f = in;
      const std::uint32_t r = ((a << count) | (a >> (w.bits - count))) & w.mask;
      f.cf = (r & 1u) != 0;
      if (count == 1) f.of = w.msb(r) != f.cf;
      return {r, f, true};
    }
    case OpKind::Rrl: {
      if (count == 0) return {a, in, true};
      Flags f = in;
      const std::uint32_t r = ((a >> count) | (a << (w.bits - count))) & w.mask;
      f.cf = w.msb(r);
      if (count == 1) f.of = w.msb(r) != w.msb(r << 1);
      return {r, f, true};
    }

    case OpKind::Mul: {
      Flags f = in;
      const std::uint64_t full = std::uint64_t{a} * b;
      const std::uint32_t r = static_cast<std::uint32_t>(full) & w.mask;
      f.cf = f.of = (full >> w.bits) != 0;
      set_zs(f, r, w);
      return {r, f, true};
    }
    case OpKind::Imul: {
      Flags f = in;
      const std::int64_t full = w.signed_value(a) * w.signed_value(b);
      const std::uint32_t r = static_cast<std::uint32_t>(full) & w.mask;
      f.cf = f.of = w.signed_value(r) != full;
      set_zs(f, r, w);
      return {r, f, true};
    }

    case OpKind::Mov:
      return {b, in, true};
    case OpKind::Not:
      return {~a & w.mask, in, true};
    case OpKind::Bswap: {
      std::uint32_t r = 0;
      const unsigned bytes = w.bits / 8;
      for (unsigned i = 0; i < bytes; ++i) r |= ((a >> (8 * i)) & 0xffu) << (8 * (bytes - 1 - i));
      return {r, in, true};
    }

    default:
      break;
  }
  return {a, in, false};
}

bool evaluate_condition(std::uint8_t cc, const Flags& f, bool& valid) {
  valid = true;
  bool result = false;
  switch ((cc >> 1) & 0xf) {
    case 0: result = true; break;
    case 1: result = f.zf; break;
    case 2: result = f.cf; break;
    case 3: result = f.sf; break;
    case 4: result = f.of; break;
    case 5: result = f.cf || f.zf; break;
    case 6: result = f.sf != f.of; break;
    case 7: result = f.zf || (f.sf != f.of); break;
    default: valid = false; return false;
  }
  return (cc & tables::kCcInvertBit) ? !result : result;
}

}  // namespace ucode
