// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sfpc/bitstream.hpp"

namespace sfpc::gecko {

// Exponent codec. Two variants:
//
//  DeltaBase: exponents are tiled row-major into 8x8 groups. Row 0 holds the
//  per-column bases, stored as raw 8-bit values. Rows 1..7 store sign-magnitude
//  deltas against the column base. Each delta row gets one shared magnitude
//  width, announced by a 3-bit code. Width 7 does not exist: code 7 means 8
//  (a 7-bit magnitude is stored in 8 bits). A row whose deltas are all zero
//  has width 0 and stores no payload at all.
//
//  FixedBias: groups of 8 exponents, each stored sign-magnitude against a
//  fixed bias, one 3-bit width code per group. Width 0 means every exponent
//  in the group equals the bias.
//
// Stream layout (LSB-first throughout): DeltaBase groups write the 8 bases
// (8 bits each, column 0..7), then per delta row the width code followed by
// the row payload, columns 0..7, magnitude bits then one sign bit. FixedBias
// groups write the width code then the payload. A stored zero has sign 0.
//
// Partial final groups are padded: unfilled base slots take the declared pad
// exponent, unfilled delta slots replicate their column base (delta zero),
// unfilled FixedBias slots take the pad exponent. Pad bits count toward the
// stream size but padded values do not count as original payload.

enum class Variant : std::uint8_t { DeltaBase = 0, FixedBias = 1 };

inline constexpr int kGroupRows = 8;
inline constexpr int kGroupCols = 8;
inline constexpr int kGroupSize = kGroupRows * kGroupCols;
inline constexpr int kFixedGroupSize = 8;
inline constexpr int kWidthCodeBits = 3;
inline constexpr int kExponentBits = 8;
inline constexpr std::uint8_t kDefaultPadExponent = 127;
inline constexpr int kDefaultBias = 127;

// Minimal bits to hold a magnitude; 0 for 0.
int width_for_magnitude(std::uint32_t mag);

// Storable widths are {0..6, 8}; 7 rounds up to 8.
int storage_width(int w);

std::uint8_t code_for_width(int w);
int width_for_code(std::uint8_t code);

struct DeltaPlan {
  std::array<std::uint8_t, kGroupCols> bases;
  std::array<int, kGroupRows> widths; // widths[0] is always 0 (bases row)
  std::size_t payload_bits;           // delta rows only
  std::size_t total_bits;             // bases + width codes + payload
};

DeltaPlan plan_delta(const std::array<std::uint8_t, kGroupSize>& exps);

struct FixedPlan {
  int width;
  std::size_t total_bits; // width code + payload
};

FixedPlan plan_fixed(const std::array<std::uint8_t, kFixedGroupSize>& exps, int bias);

std::array<std::uint8_t, kGroupSize> fill_delta_group(std::span<const std::uint8_t> exps,
                                                      std::size_t group_index,
                                                      std::uint8_t pad_exponent);
std::array<std::uint8_t, kFixedGroupSize> fill_fixed_group(std::span<const std::uint8_t> exps,
                                                           std::size_t group_index,
                                                           std::uint8_t pad_exponent);

void encode(std::span<const std::uint8_t> exps, Variant variant, BitWriter& bw,
            int bias = kDefaultBias, std::uint8_t pad_exponent = kDefaultPadExponent);

// Decodes exactly `count` exponents; group padding is consumed and dropped.
// Throws CorruptionError on truncation or if a delta leaves [0, 255].
std::vector<std::uint8_t> decode(BitReader& br, std::size_t count, Variant variant,
                                 int bias = kDefaultBias);

struct SizeBreakdown {
  std::size_t meta_bits;     // width codes
  std::size_t content_bits;  // bases and payloads
  std::size_t original_bits; // 8 bits per real (unpadded) exponent
  double ratio() const;      // (meta + content) / original
};

SizeBreakdown measure(std::span<const std::uint8_t> exps, Variant variant,
                      int bias = kDefaultBias,
                      std::uint8_t pad_exponent = kDefaultPadExponent);

} // namespace sfpc::gecko
