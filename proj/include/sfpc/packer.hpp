// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sfpc/float_format.hpp"
#include "sfpc/gecko.hpp"

namespace sfpc::packer {

// Stream composer modelled on an 8-lane pack unit. Values are tiled exactly
// like the exponent codec (8x8 groups for DeltaBase, rows of 8 for
// FixedBias); column c always feeds lane c, so each lane receives one value
// per row and, because a row shares one delta width, every lane fills at the
// same rate.
//
// Per value a lane receives, in order: the exponent field (an 8-bit base on
// row 0 of a DeltaBase group, otherwise magnitude-plus-sign at the row width,
// nothing when the width is zero), the value sign bit (elided in signless
// mode), and the top man_width mantissa bits. Lanes drain in words, 32 bits
// for FP32 and 16 for BF16: at the end each lane is zero-flushed to a whole
// word and the words are emitted round-robin, lane 0 first, each word
// little-endian. Width codes go to a separate metadata stream as packed
// 3-bit codes in group order.
//
// Signless mode drops signs irrecoverably (decode returns +). Non-finite
// values are rejected by default; with bypass they flow through the same
// path, so their mantissa is truncated like any other value and survives
// exactly when man_width is the full mantissa.

struct PackConfig {
  FloatFormat format = FloatFormat::fp32();
  gecko::Variant variant = gecko::Variant::DeltaBase;
  int man_width = 23;
  bool signless = false;
  NonFinitePolicy nonfinite = NonFinitePolicy::Reject;
  int bias = gecko::kDefaultBias;
  std::uint8_t pad_exponent = gecko::kDefaultPadExponent;

  int word_bits() const { return format.kind == FloatKind::FP32 ? 32 : 16; }
  std::size_t group_size() const {
    return variant == gecko::Variant::DeltaBase ? gecko::kGroupSize
                                                : gecko::kFixedGroupSize;
  }
  void validate() const;
};

struct PackedStreams {
  std::vector<std::uint8_t> data; // interleaved lane words
  std::vector<std::uint8_t> meta; // width codes
  std::size_t payload_bits;       // container bits before the word flush
  std::size_t meta_bits;
};

PackedStreams pack(std::span<const std::uint32_t> raw, const PackConfig& cfg);

// Inverse of pack up to the configured loss: signs are zeroed in signless
// mode and mantissas come back truncated to man_width.
std::vector<std::uint32_t> unpack(std::span<const std::uint8_t> data,
                                  std::span<const std::uint8_t> meta,
                                  std::size_t count, const PackConfig& cfg);

// Closed-form size accounting; matches pack() bit for bit without encoding.
struct Footprint {
  std::size_t exponent_bits = 0; // bases and delta fields
  std::size_t sign_bits = 0;
  std::size_t mantissa_bits = 0;
  std::size_t meta_bits = 0;
  std::size_t original_bits = 0; // full-width bits of the real values

  std::size_t payload_bits() const { return exponent_bits + sign_bits + mantissa_bits; }
  std::size_t total_bits() const { return payload_bits() + meta_bits; }
  double ratio() const;
};

Footprint measure(std::span<const std::uint32_t> raw, const PackConfig& cfg);

// The reference per-value transform the pack/unpack pair implements.
std::uint32_t reference_transform(std::uint32_t raw, const PackConfig& cfg);

} // namespace sfpc::packer
