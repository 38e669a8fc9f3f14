// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace mcubes {

/**
 * Exact accumulator for IEEE-754 doubles (a fixed-point superaccumulator).
 *
 * Every finite double is an integer multiple of 2^-1074, so a sum of doubles
 * can be carried in a wide two's-complement register with no rounding at all.
 * Addition is then exact, hence associative and commutative: partial sums may
 * be formed per worker over any batch layout and merged in any order, and the
 * rounded result is bit-identical to a plain serial loop over the same
 * addends.  The sampler's cross-cube reductions are built on this; it is what
 * makes results independent of batch size and thread count.
 *
 * Layout: little-endian 64-bit limbs; bit 64*w + b carries weight
 * 2^(64*w + b - 1074).  The largest finite double tops out at bit 2097, and
 * the remaining headroom absorbs carries for any realistic addend count
 * (< 2^63), so 34 limbs suffice.
 */
class ExactSum {
 public:
  /// Add one finite double, exactly.
  void add(double v) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
    const std::uint64_t be = (bits >> 52) & 0x7ffu;
    if (be == 0x7ffu) throw std::invalid_argument("ExactSum: non-finite addend");
    if ((bits << 1) == 0) return;  // +0.0 or -0.0
    const std::uint64_t frac = bits & ((std::uint64_t{1} << 52) - 1);
    const std::uint64_t mant = be ? (frac | (std::uint64_t{1} << 52)) : frac;
    // LSB of mant has weight 2^(e) with e = be - 1075 for normals (be >= 1)
    // and e = -1074 for subnormals; both give bit position be ? be-1 : 0.
    const unsigned pos = be ? static_cast<unsigned>(be - 1) : 0u;
    const unsigned limb = pos >> 6;
    const unsigned off = pos & 63u;
    const unsigned __int128 wide = static_cast<unsigned __int128>(mant) << off;
    const auto lo = static_cast<std::uint64_t>(wide);
    const auto hi = static_cast<std::uint64_t>(wide >> 64);
    if (bits >> 63) {
      bool b = sub_with_borrow(limbs_[limb], lo, false);
      b = sub_with_borrow(limbs_[limb + 1], hi, b);
      for (unsigned k = limb + 2; b && k < kLimbs; ++k)
        b = sub_with_borrow(limbs_[k], 0, b);
    } else {
      bool c = add_with_carry(limbs_[limb], lo, false);
      c = add_with_carry(limbs_[limb + 1], hi, c);
      for (unsigned k = limb + 2; c && k < kLimbs; ++k)
        c = add_with_carry(limbs_[k], 0, c);
    }
  }

  /// Merge another accumulator, exactly.
  void add(const ExactSum& o) {
    bool c = false;
    for (unsigned k = 0; k < kLimbs; ++k) c = add_with_carry(limbs_[k], o.limbs_[k], c);
    // carry off the top wraps; fine for two's complement within range
  }

  /// Round the exact total to the nearest double (ties to even).
  [[nodiscard]] double value() const {
    std::array<std::uint64_t, kLimbs> mag = limbs_;
    const bool neg = (limbs_[kLimbs - 1] >> 63) != 0;
    if (neg) {
      bool c = true;  // two's-complement negate: ~x + 1
      for (unsigned k = 0; k < kLimbs; ++k) {
        mag[k] = ~mag[k];
        c = add_with_carry(mag[k], 0, c);
      }
    }
    int top = -1;
    for (int w = kLimbs - 1; w >= 0; --w) {
      if (mag[static_cast<unsigned>(w)]) {
        top = 64 * w + 63 - std::countl_zero(mag[static_cast<unsigned>(w)]);
        break;
      }
    }
    if (top < 0) return 0.0;
    if (top <= 52) {
      // fits entirely below 2^(53-1074): an exact (sub)normal double
      const double r = std::ldexp(static_cast<double>(mag[0]), -1074);
      return neg ? -r : r;
    }
    std::uint64_t mant = extract_bits(mag, top - 52);  // bits [top-52, top]
    const int gpos = top - 53;
    const bool guard = ((mag[static_cast<unsigned>(gpos) >> 6] >> (gpos & 63)) & 1) != 0;
    bool sticky = false;
    if (gpos > 0) {
      const unsigned w = static_cast<unsigned>(gpos) >> 6;
      const unsigned b = static_cast<unsigned>(gpos) & 63u;
      if (b) sticky = (mag[w] & ((std::uint64_t{1} << b) - 1)) != 0;
      for (unsigned k = 0; k < w && !sticky; ++k) sticky = mag[k] != 0;
    }
    int e = top - 52 - 1074;
    if (guard && (sticky || (mant & 1))) {
      if (++mant == (std::uint64_t{1} << 53)) {
        mant >>= 1;
        ++e;
      }
    }
    const double r = std::ldexp(static_cast<double>(mant), e);
    return neg ? -r : r;
  }

  [[nodiscard]] bool is_zero() const {
    for (const auto w : limbs_)
      if (w) return false;
    return true;
  }

  friend bool operator==(const ExactSum&, const ExactSum&) = default;

 private:
  static constexpr unsigned kLimbs = 34;

  static bool add_with_carry(std::uint64_t& x, std::uint64_t v, bool cin) {
    const std::uint64_t s = x + v;
    bool c = s < v;
    const std::uint64_t s2 = s + (cin ? 1u : 0u);
    c |= s2 < (cin ? 1u : 0u);
    x = s2;
    return c;
  }

  static bool sub_with_borrow(std::uint64_t& x, std::uint64_t v, bool bin) {
    const std::uint64_t d = x - v;
    bool b = x < v;
    const std::uint64_t d2 = d - (bin ? 1u : 0u);
    b |= d < (bin ? 1u : 0u);
    x = d2;
    return b;
  }

  /// 53-bit window starting at bit position lo (little-endian across limbs).
  static std::uint64_t extract_bits(const std::array<std::uint64_t, kLimbs>& mag, int lo) {
    const unsigned w = static_cast<unsigned>(lo) >> 6;
    const unsigned b = static_cast<unsigned>(lo) & 63u;
    std::uint64_t v = mag[w] >> b;
    if (b && w + 1 < kLimbs) v |= mag[w + 1] << (64 - b);
    return v & ((std::uint64_t{1} << 53) - 1);
  }

  std::array<std::uint64_t, kLimbs> limbs_{};
};

}  // namespace mcubes
