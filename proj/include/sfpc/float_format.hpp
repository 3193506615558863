// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "sfpc/error.hpp"
#include "sfpc/rng.hpp"

namespace sfpc {

enum class FloatKind : std::uint8_t { FP32 = 0, BF16 = 1 };

// FP32 and BF16 share the 8-bit exponent with bias 127; they differ only in
// mantissa width (23 vs 7) and container size (32 vs 16 bits).
struct FloatFormat {
  FloatKind kind;
  int exponent_bits; // 8 for both
  int mantissa_bits; // m
  int bias;          // 127

  static constexpr FloatFormat fp32() { return {FloatKind::FP32, 8, 23, 127}; }
  static constexpr FloatFormat bf16() { return {FloatKind::BF16, 8, 7, 127}; }
  static constexpr FloatFormat from_kind(FloatKind k) {
    return k == FloatKind::FP32 ? fp32() : bf16();
  }

  constexpr int total_bits() const { return 1 + exponent_bits + mantissa_bits; }
  constexpr std::uint32_t mantissa_mask() const {
    return (1u << mantissa_bits) - 1u;
  }
  constexpr std::uint32_t exponent_max() const { return (1u << exponent_bits) - 1u; }

  friend constexpr bool operator==(const FloatFormat&, const FloatFormat&) = default;
};

struct FloatTriple {
  std::uint8_t sign;      // 0 or 1
  std::uint8_t exponent;  // biased, [0, 255]
  std::uint32_t mantissa; // [0, 2^m - 1]

  friend constexpr bool operator==(const FloatTriple&, const FloatTriple&) = default;
};

// Field split per the IEEE-754 / BFloat16 layout. Total over bit patterns;
// NaN payloads are not canonicalized.
constexpr FloatTriple decompose(std::uint32_t raw, const FloatFormat& fmt) {
  const int m = fmt.mantissa_bits;
  return FloatTriple{
      static_cast<std::uint8_t>((raw >> (m + fmt.exponent_bits)) & 1u),
      static_cast<std::uint8_t>((raw >> m) & fmt.exponent_max()),
      raw & fmt.mantissa_mask(),
  };
}

// Exact inverse of decompose. Throws if a field is out of range for fmt.
constexpr std::uint32_t recompose(const FloatTriple& t, const FloatFormat& fmt) {
  if (t.sign > 1) throw std::invalid_argument("recompose: sign out of range");
  if (t.mantissa > fmt.mantissa_mask())
    throw std::invalid_argument("recompose: mantissa out of range");
  const int m = fmt.mantissa_bits;
  return (static_cast<std::uint32_t>(t.sign) << (m + fmt.exponent_bits)) |
         (static_cast<std::uint32_t>(t.exponent) << m) | t.mantissa;
}

constexpr bool is_nonfinite(std::uint32_t raw, const FloatFormat& fmt) {
  return ((raw >> fmt.mantissa_bits) & fmt.exponent_max()) == fmt.exponent_max();
}

// Keep the top n mantissa bits, zero the rest: M & ((2^n - 1) << (m - n)).
constexpr std::uint32_t quantize_mantissa(std::uint32_t mantissa, int n,
                                          const FloatFormat& fmt) {
  const int m = fmt.mantissa_bits;
  if (n < 0 || n > m) throw std::invalid_argument("quantize_mantissa: n out of [0, m]");
  if (n == 0) return 0;
  const std::uint32_t mask = ((1u << n) - 1u) << (m - n);
  return mantissa & mask;
}

// Round a real-valued bitlength to an integer width: floor(n) with
// probability 1 - frac(n), floor(n)+1 with probability frac(n). One draw per
// call; callers choose the granularity (typically one per tensor per batch).
// n < 0 is clipped to 0 and n > m to m before rounding.
inline int stochastic_bitlength(double n, int m, CounterRng& rng) {
  if (n <= 0.0) return 0;
  if (n >= static_cast<double>(m)) return m;
  double fl = std::floor(n);
  double frac = n - fl;
  int w = static_cast<int>(fl);
  if (frac > 0.0 && rng.uniform() < frac) ++w;
  return w;
}

inline std::uint32_t quantize_stochastic(std::uint32_t mantissa, double n,
                                         const FloatFormat& fmt, CounterRng& rng) {
  if (n < 0.0) throw std::invalid_argument("quantize_stochastic: n < 0");
  return quantize_mantissa(mantissa, stochastic_bitlength(n, fmt.mantissa_bits, rng), fmt);
}

enum class NonFinitePolicy : std::uint8_t { Reject, Bypass };

// Value-level truncation: masks the mantissa of a raw pattern at width n.
// Non-finite inputs (exponent all ones) error under Reject; under Bypass they
// pass through untouched at full mantissa width.
inline std::uint32_t quantize_value(std::uint32_t raw, int n, const FloatFormat& fmt,
                                    NonFinitePolicy policy = NonFinitePolicy::Reject) {
  if (is_nonfinite(raw, fmt)) {
    if (policy == NonFinitePolicy::Reject)
      throw NumericError("quantize_value: non-finite input");
    return raw;
  }
  FloatTriple t = decompose(raw, fmt);
  t.mantissa = quantize_mantissa(t.mantissa, n, fmt);
  return recompose(t, fmt);
}

// float <-> raw pattern. BF16 patterns live in the low 16 bits; the
// float->BF16 conversion truncates (drops the low 16 mantissa bits).
inline std::uint32_t to_raw(float v, const FloatFormat& fmt) {
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  return fmt.kind == FloatKind::FP32 ? bits : (bits >> 16);
}

inline float from_raw(std::uint32_t raw, const FloatFormat& fmt) {
  std::uint32_t bits = fmt.kind == FloatKind::FP32 ? raw : (raw << 16);
  return std::bit_cast<float>(bits);
}

// Apply the storage pipeline to a float: narrow to fmt, mask the mantissa at
// width n, widen back. With FP32 and n == 23 this is the identity.
inline float quantize_float(float v, int n, const FloatFormat& fmt,
                            NonFinitePolicy policy = NonFinitePolicy::Reject) {
  return from_raw(quantize_value(to_raw(v, fmt), n, fmt, policy), fmt);
}

} // namespace sfpc
