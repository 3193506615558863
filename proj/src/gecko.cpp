// SPDX-License-Identifier: Apache-2.0
#include "sfpc/gecko.hpp"

#include <bit>
#include <cstdlib>
#include <stdexcept>

#include "sfpc/error.hpp"

namespace sfpc::gecko {

int width_for_magnitude(std::uint32_t mag) {
  return static_cast<int>(std::bit_width(mag));
}

int storage_width(int w) {
  if (w < 0 || w > 8) throw std::invalid_argument("storage_width: w out of [0, 8]");
  return w == 7 ? 8 : w;
}

std::uint8_t code_for_width(int w) {
  if (w == 8) return 7;
  if (w < 0 || w > 6) throw std::invalid_argument("code_for_width: not a storable width");
  return static_cast<std::uint8_t>(w);
}

int width_for_code(std::uint8_t code) {
  if (code > 7) throw std::invalid_argument("width_for_code: code out of [0, 7]");
  return code == 7 ? 8 : code;
}

namespace {

struct SignMag {
  std::uint32_t mag;
  std::uint8_t sign; // 0 for mag == 0
};

SignMag sign_magnitude(int delta) {
  if (delta >= 0) return {static_cast<std::uint32_t>(delta), 0};
  return {static_cast<std::uint32_t>(-delta), 1};
}

void put_row(BitWriter& bw, const SignMag* vals, int count, int width) {
  if (width == 0) return;
  for (int i = 0; i < count; ++i) {
    bw.put(vals[i].mag, width);
    bw.put(vals[i].sign, 1);
  }
}

int apply_delta(int base, std::uint32_t mag, std::uint8_t sign, std::size_t byte_offset) {
  int e = sign ? base - static_cast<int>(mag) : base + static_cast<int>(mag);
  if (e < 0 || e > 255) throw CorruptionError("exponent delta out of range", byte_offset);
  return e;
}

} // namespace

DeltaPlan plan_delta(const std::array<std::uint8_t, kGroupSize>& exps) {
  DeltaPlan plan{};
  for (int c = 0; c < kGroupCols; ++c) plan.bases[c] = exps[c];
  plan.widths[0] = 0;
  plan.payload_bits = 0;
  for (int r = 1; r < kGroupRows; ++r) {
    int wmax = 0;
    for (int c = 0; c < kGroupCols; ++c) {
      int delta = static_cast<int>(exps[r * kGroupCols + c]) - static_cast<int>(plan.bases[c]);
      int w = width_for_magnitude(static_cast<std::uint32_t>(std::abs(delta)));
      if (w > wmax) wmax = w;
    }
    int sw = storage_width(wmax);
    plan.widths[r] = sw;
    if (sw > 0) plan.payload_bits += static_cast<std::size_t>(kGroupCols) * (sw + 1);
  }
  plan.total_bits = kGroupCols * kExponentBits +
                    (kGroupRows - 1) * kWidthCodeBits + plan.payload_bits;
  return plan;
}

FixedPlan plan_fixed(const std::array<std::uint8_t, kFixedGroupSize>& exps, int bias) {
  int wmax = 0;
  for (int i = 0; i < kFixedGroupSize; ++i) {
    int delta = static_cast<int>(exps[i]) - bias;
    int w = width_for_magnitude(static_cast<std::uint32_t>(std::abs(delta)));
    if (w > wmax) wmax = w;
  }
  int sw = storage_width(wmax);
  std::size_t total = kWidthCodeBits;
  if (sw > 0) total += static_cast<std::size_t>(kFixedGroupSize) * (sw + 1);
  return {sw, total};
}

std::array<std::uint8_t, kGroupSize> fill_delta_group(std::span<const std::uint8_t> exps,
                                                      std::size_t group_index,
                                                      std::uint8_t pad_exponent) {
  std::array<std::uint8_t, kGroupSize> out{};
  std::size_t start = group_index * kGroupSize;
  for (int i = 0; i < kGroupSize; ++i) {
    std::size_t idx = start + i;
    if (idx < exps.size()) out[i] = exps[idx];
    else if (i < kGroupCols) out[i] = pad_exponent;
    else out[i] = out[i % kGroupCols]; // replicate column base, delta zero
  }
  return out;
}

std::array<std::uint8_t, kFixedGroupSize> fill_fixed_group(std::span<const std::uint8_t> exps,
                                                           std::size_t group_index,
                                                           std::uint8_t pad_exponent) {
  std::array<std::uint8_t, kFixedGroupSize> out{};
  std::size_t start = group_index * kFixedGroupSize;
  for (int i = 0; i < kFixedGroupSize; ++i) {
    std::size_t idx = start + i;
    out[i] = idx < exps.size() ? exps[idx] : pad_exponent;
  }
  return out;
}

namespace {

void encode_delta(std::span<const std::uint8_t> exps, BitWriter& bw, std::uint8_t pad) {
  std::size_t groups = (exps.size() + kGroupSize - 1) / kGroupSize;
  for (std::size_t g = 0; g < groups; ++g) {
    auto tile = fill_delta_group(exps, g, pad);
    DeltaPlan plan = plan_delta(tile);
    for (int c = 0; c < kGroupCols; ++c) bw.put(plan.bases[c], kExponentBits);
    for (int r = 1; r < kGroupRows; ++r) {
      bw.put(code_for_width(plan.widths[r]), kWidthCodeBits);
      SignMag row[kGroupCols];
      for (int c = 0; c < kGroupCols; ++c)
        row[c] = sign_magnitude(static_cast<int>(tile[r * kGroupCols + c]) -
                                static_cast<int>(plan.bases[c]));
      put_row(bw, row, kGroupCols, plan.widths[r]);
    }
  }
}

void encode_fixed(std::span<const std::uint8_t> exps, BitWriter& bw, int bias,
                  std::uint8_t pad) {
  std::size_t groups = (exps.size() + kFixedGroupSize - 1) / kFixedGroupSize;
  for (std::size_t g = 0; g < groups; ++g) {
    auto tile = fill_fixed_group(exps, g, pad);
    FixedPlan plan = plan_fixed(tile, bias);
    bw.put(code_for_width(plan.width), kWidthCodeBits);
    if (plan.width > 0) {
      SignMag row[kFixedGroupSize];
      for (int i = 0; i < kFixedGroupSize; ++i)
        row[i] = sign_magnitude(static_cast<int>(tile[i]) - bias);
      put_row(bw, row, kFixedGroupSize, plan.width);
    }
  }
}

std::vector<std::uint8_t> decode_delta(BitReader& br, std::size_t count) {
  std::vector<std::uint8_t> out;
  out.reserve(count);
  std::size_t groups = (count + kGroupSize - 1) / kGroupSize;
  for (std::size_t g = 0; g < groups; ++g) {
    std::array<std::uint8_t, kGroupSize> tile{};
    for (int c = 0; c < kGroupCols; ++c)
      tile[c] = static_cast<std::uint8_t>(br.get(kExponentBits));
    for (int r = 1; r < kGroupRows; ++r) {
      int w = width_for_code(static_cast<std::uint8_t>(br.get(kWidthCodeBits)));
      for (int c = 0; c < kGroupCols; ++c) {
        if (w == 0) {
          tile[r * kGroupCols + c] = tile[c];
          continue;
        }
        std::uint32_t mag = static_cast<std::uint32_t>(br.get(w));
        std::uint8_t sign = static_cast<std::uint8_t>(br.get(1));
        tile[r * kGroupCols + c] = static_cast<std::uint8_t>(
            apply_delta(tile[c], mag, sign, br.bit_pos() / 8));
      }
    }
    std::size_t take = std::min<std::size_t>(kGroupSize, count - out.size());
    out.insert(out.end(), tile.begin(), tile.begin() + take);
  }
  return out;
}

std::vector<std::uint8_t> decode_fixed(BitReader& br, std::size_t count, int bias) {
  std::vector<std::uint8_t> out;
  out.reserve(count);
  std::size_t groups = (count + kFixedGroupSize - 1) / kFixedGroupSize;
  for (std::size_t g = 0; g < groups; ++g) {
    std::array<std::uint8_t, kFixedGroupSize> tile{};
    int w = width_for_code(static_cast<std::uint8_t>(br.get(kWidthCodeBits)));
    for (int i = 0; i < kFixedGroupSize; ++i) {
      if (w == 0) {
        tile[i] = static_cast<std::uint8_t>(bias);
        continue;
      }
      std::uint32_t mag = static_cast<std::uint32_t>(br.get(w));
      std::uint8_t sign = static_cast<std::uint8_t>(br.get(1));
      tile[i] = static_cast<std::uint8_t>(apply_delta(bias, mag, sign, br.bit_pos() / 8));
    }
    std::size_t take = std::min<std::size_t>(kFixedGroupSize, count - out.size());
    out.insert(out.end(), tile.begin(), tile.begin() + take);
  }
  return out;
}

} // namespace

void encode(std::span<const std::uint8_t> exps, Variant variant, BitWriter& bw,
            int bias, std::uint8_t pad_exponent) {
  if (variant == Variant::DeltaBase) encode_delta(exps, bw, pad_exponent);
  else encode_fixed(exps, bw, bias, pad_exponent);
}

std::vector<std::uint8_t> decode(BitReader& br, std::size_t count, Variant variant,
                                 int bias) {
  if (variant == Variant::DeltaBase) return decode_delta(br, count);
  return decode_fixed(br, count, bias);
}

double SizeBreakdown::ratio() const {
  if (original_bits == 0)
    throw std::invalid_argument("SizeBreakdown::ratio: no original bits");
  return static_cast<double>(meta_bits + content_bits) /
         static_cast<double>(original_bits);
}

SizeBreakdown measure(std::span<const std::uint8_t> exps, Variant variant, int bias,
                      std::uint8_t pad_exponent) {
  SizeBreakdown out{0, 0, exps.size() * static_cast<std::size_t>(kExponentBits)};
  if (variant == Variant::DeltaBase) {
    std::size_t groups = (exps.size() + kGroupSize - 1) / kGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
      DeltaPlan plan = plan_delta(fill_delta_group(exps, g, pad_exponent));
      out.meta_bits += (kGroupRows - 1) * kWidthCodeBits;
      out.content_bits += kGroupCols * kExponentBits + plan.payload_bits;
    }
  } else {
    std::size_t groups = (exps.size() + kFixedGroupSize - 1) / kFixedGroupSize;
    for (std::size_t g = 0; g < groups; ++g) {
      FixedPlan plan = plan_fixed(fill_fixed_group(exps, g, pad_exponent), bias);
      out.meta_bits += kWidthCodeBits;
      out.content_bits += plan.total_bits - kWidthCodeBits;
    }
  }
  return out;
}

} // namespace sfpc::gecko
