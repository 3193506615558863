// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sfpc/error.hpp"

namespace sfpc {

// LSB-first bit packing: bit i of the stream is (bytes[i/8] >> (i%8)) & 1.
// Values are written least significant bit first.
class BitWriter {
public:
  void put(std::uint64_t value, int nbits) {
    assert(nbits >= 0 && nbits <= 64);
    for (int i = 0; i < nbits; ++i) {
      if (bit_count_ % 8 == 0) bytes_.push_back(0);
      if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(1u << (bit_count_ % 8));
      ++bit_count_;
    }
  }

  // Zero-pad up to the next multiple of nbits.
  void align_to(int nbits) {
    assert(nbits > 0);
    std::size_t rem = bit_count_ % static_cast<std::size_t>(nbits);
    if (rem != 0) put(0, nbits - static_cast<int>(rem));
  }

  std::size_t bit_size() const { return bit_count_; }
  const std::vector<std::uint8_t>& bytes() const { return bytes_; }
  std::vector<std::uint8_t> take() {
    bit_count_ = 0;
    return std::move(bytes_);
  }

private:
  std::vector<std::uint8_t> bytes_;
  std::size_t bit_count_ = 0;
};

class BitReader {
public:
  explicit BitReader(std::span<const std::uint8_t> bytes)
      : bytes_(bytes), bit_limit_(bytes.size() * 8) {}

  BitReader(std::span<const std::uint8_t> bytes, std::size_t bit_limit)
      : bytes_(bytes), bit_limit_(bit_limit) {
    assert(bit_limit <= bytes.size() * 8);
  }

  std::uint64_t get(int nbits) {
    assert(nbits >= 0 && nbits <= 64);
    if (pos_ + static_cast<std::size_t>(nbits) > bit_limit_)
      throw CorruptionError("bit stream truncated", pos_ / 8);
    std::uint64_t v = 0;
    for (int i = 0; i < nbits; ++i, ++pos_)
      v |= static_cast<std::uint64_t>((bytes_[pos_ / 8] >> (pos_ % 8)) & 1u) << i;
    return v;
  }

  std::size_t bit_pos() const { return pos_; }
  std::size_t bits_left() const { return bit_limit_ - pos_; }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t bit_limit_;
  std::size_t pos_ = 0;
};

} // namespace sfpc
