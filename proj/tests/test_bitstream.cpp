// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "sfpc/bitstream.hpp"
#include "sfpc/error.hpp"
#include "sfpc/rng.hpp"

using namespace sfpc;

TEST_SUITE("bitstream") {

TEST_CASE("bits land LSB-first") {
  BitWriter bw;
  bw.put(0b1, 1);
  bw.put(0b10, 2);
  bw.put(0b01101, 5);
  CHECK(bw.bit_size() == 8);
  // bit 0 = 1, bits 1..2 = 10b, bits 3..7 = 01101b
  CHECK(bw.bytes()[0] == std::uint8_t{0b0110'1101});
}

TEST_CASE("multi-byte values split across byte boundaries") {
  BitWriter bw;
  bw.put(0xABCDu, 16);
  bw.put(0x5u, 3);
  REQUIRE(bw.bit_size() == 19);
  BitReader br(bw.bytes(), bw.bit_size());
  CHECK(br.get(16) == 0xABCDu);
  CHECK(br.get(3) == 0x5u);
  CHECK(br.bits_left() == 0);
}

TEST_CASE("align pads with zeros up to the boundary") {
  BitWriter bw;
  bw.put(0b111, 3);
  bw.align_to(8);
  CHECK(bw.bit_size() == 8);
  bw.align_to(8); // already aligned, no-op
  CHECK(bw.bit_size() == 8);
  bw.put(1, 1);
  bw.align_to(32);
  CHECK(bw.bit_size() == 32);
  CHECK(bw.bytes()[0] == 0b111);
  CHECK(bw.bytes()[1] == 1);
  CHECK(bw.bytes()[2] == 0);
  CHECK(bw.bytes()[3] == 0);
}

TEST_CASE("random width round-trip") {
  CounterRng rng(0xB17Eu, 0);
  BitWriter bw;
  std::vector<std::pair<std::uint64_t, int>> fields;
  for (int i = 0; i < 500; ++i) {
    int width = 1 + static_cast<int>(rng.below(32));
    std::uint64_t value = rng.next_u64() & ((width == 64) ? ~0ull : ((1ull << width) - 1));
    fields.emplace_back(value, width);
    bw.put(value, width);
  }
  BitReader br(bw.bytes(), bw.bit_size());
  for (auto [value, width] : fields) CHECK(br.get(width) == value);
}

TEST_CASE("reading past the limit reports the byte offset") {
  BitWriter bw;
  bw.put(0xFFu, 8);
  bw.put(0x3u, 2);
  BitReader br(bw.bytes(), 10);
  br.get(8);
  CHECK(br.bits_left() == 2);
  CHECK_THROWS_AS(br.get(3), CorruptionError);
}

TEST_CASE("bit limit can be shorter than the byte buffer") {
  std::vector<std::uint8_t> buf{0xFF, 0xFF};
  BitReader br(buf, 4);
  CHECK(br.get(4) == 0xF);
  CHECK_THROWS_AS(br.get(1), CorruptionError);
}

} // TEST_SUITE
