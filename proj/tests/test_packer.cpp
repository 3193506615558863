// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <limits>
#include <vector>

#include "sfpc/error.hpp"
#include "sfpc/packer.hpp"
#include "sfpc/rng.hpp"

using namespace sfpc;
using packer::PackConfig;

namespace {

std::vector<std::uint32_t> raw_of(const std::vector<float>& vals, const FloatFormat& fmt) {
  std::vector<std::uint32_t> out;
  out.reserve(vals.size());
  for (float v : vals) out.push_back(to_raw(v, fmt));
  return out;
}

std::vector<std::uint32_t> random_raw(std::size_t n, const FloatFormat& fmt,
                                      CounterRng& rng) {
  std::vector<std::uint32_t> out(n);
  for (auto& r : out) {
    float v = static_cast<float>(rng.normal() * std::pow(2.0, rng.uniform(-6.0, 6.0)));
    r = to_raw(v, fmt);
  }
  return out;
}

void check_roundtrip(const std::vector<std::uint32_t>& raw, const PackConfig& cfg) {
  auto streams = packer::pack(raw, cfg);
  auto back = packer::unpack(streams.data, streams.meta, raw.size(), cfg);
  REQUIRE(back.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    CHECK(back[i] == packer::reference_transform(raw[i], cfg));
  auto fp = packer::measure(raw, cfg);
  CHECK(fp.payload_bits() == streams.payload_bits);
  CHECK(fp.meta_bits == streams.meta_bits);
}

} // namespace

TEST_SUITE("packer") {

TEST_CASE("uniform fp32 tensor hand count") {
  PackConfig cfg; // fp32, DeltaBase, man 23, signed
  std::vector<std::uint32_t> raw(64, to_raw(1.0f, cfg.format));
  auto streams = packer::pack(raw, cfg);
  CHECK(streams.payload_bits == 1600);
  CHECK(streams.meta_bits == 21);
  // 200 bits per lane round up to seven 32-bit words
  CHECK(streams.data.size() == 7 * 8 * 4);
  CHECK(streams.meta.size() == 3);

  auto fp = packer::measure(raw, cfg);
  CHECK(fp.exponent_bits == 64);
  CHECK(fp.sign_bits == 64);
  CHECK(fp.mantissa_bits == 64 * 23);
  CHECK(fp.total_bits() == 1621);
  CHECK(fp.original_bits == 64 * 32);
}

TEST_CASE("signless bf16 at zero mantissa width is exponents only") {
  PackConfig cfg;
  cfg.format = FloatFormat::bf16();
  cfg.man_width = 0;
  cfg.signless = true;
  std::vector<std::uint32_t> raw(64, to_raw(1.0f, cfg.format));
  auto streams = packer::pack(raw, cfg);
  CHECK(streams.payload_bits == 64);
  CHECK(streams.meta_bits == 21);
  // 8 bits per lane round up to one 16-bit word
  CHECK(streams.data.size() == 1 * 8 * 2);
  check_roundtrip(raw, cfg);
}

TEST_CASE("frozen byte layout for a fixed-bias group") {
  PackConfig cfg;
  cfg.variant = gecko::Variant::FixedBias;
  cfg.man_width = 1;
  std::vector<float> vals{1.5f, -1.5f, 1.0f, -1.0f, 1.5f, 1.5f, -1.5f, 1.0f};
  auto raw = raw_of(vals, cfg.format);
  auto streams = packer::pack(raw, cfg);
  CHECK(streams.meta == std::vector<std::uint8_t>{0x00});
  // per lane: sign bit then mantissa top bit, little-endian 32-bit words
  std::vector<std::uint8_t> expect;
  for (std::uint8_t w : {2, 3, 0, 1, 2, 2, 3, 0}) {
    expect.push_back(w);
    expect.push_back(0);
    expect.push_back(0);
    expect.push_back(0);
  }
  CHECK(streams.data == expect);
  check_roundtrip(raw, cfg);
}

TEST_CASE("round-trip equals the per-value reference transform") {
  CounterRng rng(123, 9);
  for (std::size_t n : {1u, 8u, 63u, 64u, 100u, 512u}) {
    PackConfig cfg;
    check_roundtrip(random_raw(n, cfg.format, rng), cfg);

    cfg.man_width = 10;
    check_roundtrip(random_raw(n, cfg.format, rng), cfg);

    PackConfig bf;
    bf.format = FloatFormat::bf16();
    bf.variant = gecko::Variant::FixedBias;
    bf.man_width = 4;
    bf.signless = true;
    check_roundtrip(random_raw(n, bf.format, rng), bf);

    PackConfig df;
    df.format = FloatFormat::bf16();
    df.man_width = 7;
    check_roundtrip(random_raw(n, df.format, rng), df);

    PackConfig fx;
    fx.variant = gecko::Variant::FixedBias;
    fx.man_width = 0;
    check_roundtrip(random_raw(n, fx.format, rng), fx);
  }
}

TEST_CASE("signless mode zeroes signs on the way back") {
  PackConfig cfg;
  cfg.signless = true;
  auto raw = raw_of({-1.5f, -2.0f, 3.0f}, cfg.format);
  auto streams = packer::pack(raw, cfg);
  auto back = packer::unpack(streams.data, streams.meta, raw.size(), cfg);
  CHECK(from_raw(back[0], cfg.format) == 1.5f);
  CHECK(from_raw(back[1], cfg.format) == 2.0f);
  CHECK(from_raw(back[2], cfg.format) == 3.0f);
}

TEST_CASE("non-finite values are rejected unless bypassed") {
  PackConfig cfg;
  auto raw = raw_of({1.0f, std::numeric_limits<float>::infinity()}, cfg.format);
  CHECK_THROWS_AS(packer::pack(raw, cfg), NumericError);

  cfg.nonfinite = NonFinitePolicy::Bypass;
  auto streams = packer::pack(raw, cfg);
  auto back = packer::unpack(streams.data, streams.meta, raw.size(), cfg);
  CHECK(back == raw); // full mantissa width keeps the payload intact
}

TEST_CASE("stream tampering is detected") {
  PackConfig cfg;
  CounterRng rng(5, 5);
  auto raw = random_raw(128, cfg.format, rng);
  auto streams = packer::pack(raw, cfg);

  auto short_data = streams.data;
  short_data.pop_back();
  CHECK_THROWS_AS(packer::unpack(short_data, streams.meta, raw.size(), cfg),
                  CorruptionError);

  auto short_meta = streams.meta;
  short_meta.pop_back();
  CHECK_THROWS_AS(packer::unpack(streams.data, short_meta, raw.size(), cfg),
                  CorruptionError);

  // forcing every width code wide changes the expected data length (and
  // tramples the metadata padding bits)
  auto bad_meta = streams.meta;
  for (auto& b : bad_meta) b = 0xFF;
  CHECK_THROWS_AS(packer::unpack(streams.data, bad_meta, raw.size(), cfg),
                  CorruptionError);
}

TEST_CASE("man_width outside the format is a contract error") {
  PackConfig cfg;
  cfg.format = FloatFormat::bf16();
  cfg.man_width = 8;
  std::vector<std::uint32_t> raw{0x3F80};
  CHECK_THROWS_AS(packer::pack(raw, cfg), std::invalid_argument);
}

} // TEST_SUITE
