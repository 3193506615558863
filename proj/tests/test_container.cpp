// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <vector>

#include "sfpc/container.hpp"
#include "sfpc/error.hpp"
#include "sfpc/rng.hpp"

using namespace sfpc;
using packer::PackConfig;

namespace {

std::vector<std::uint32_t> sample_raw(std::size_t n, const FloatFormat& fmt) {
  CounterRng rng(42, 11);
  std::vector<std::uint32_t> out(n);
  for (auto& r : out) r = to_raw(static_cast<float>(rng.normal()), fmt);
  return out;
}

} // namespace

TEST_SUITE("container") {

TEST_CASE("serialize and parse are inverse") {
  PackConfig cfg;
  cfg.man_width = 12;
  auto raw = sample_raw(200, cfg.format);
  std::vector<std::uint64_t> dims{10, 20};
  Container c = pack_container(raw, dims, cfg);
  CHECK(c.header.value_count == 200);
  CHECK(c.header.group_count == 4);  // ceil(200 / 64)
  CHECK(c.header.pad_count == 56);
  CHECK(c.header.dims == dims);

  auto bytes = serialize(c);
  Container p = parse_container(bytes);
  CHECK(p.header.value_count == c.header.value_count);
  CHECK(p.header.man_width == c.header.man_width);
  CHECK(p.header.dims == dims);
  CHECK(p.meta == c.meta);
  CHECK(p.data == c.data);

  auto back = unpack_container(p);
  REQUIRE(back.size() == raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i)
    CHECK(back[i] == packer::reference_transform(raw[i], cfg));
}

TEST_CASE("config survives the header round-trip") {
  PackConfig cfg;
  cfg.format = FloatFormat::bf16();
  cfg.variant = gecko::Variant::FixedBias;
  cfg.man_width = 3;
  cfg.signless = true;
  cfg.nonfinite = NonFinitePolicy::Bypass;
  cfg.bias = 120;
  cfg.pad_exponent = 100;
  auto raw = sample_raw(17, cfg.format);
  Container c = pack_container(raw, {}, cfg, true);
  CHECK((c.header.flags & kFlagStochastic) != 0);
  PackConfig rt = config_from_header(c.header);
  CHECK(rt.format == cfg.format);
  CHECK(rt.variant == cfg.variant);
  CHECK(rt.man_width == cfg.man_width);
  CHECK(rt.signless == cfg.signless);
  CHECK(rt.nonfinite == NonFinitePolicy::Bypass);
  CHECK(rt.bias == cfg.bias);
  CHECK(rt.pad_exponent == cfg.pad_exponent);
}

TEST_CASE("header corruption is caught field by field") {
  PackConfig cfg;
  auto raw = sample_raw(64, cfg.format);
  auto bytes = serialize(pack_container(raw, {}, cfg));

  auto mutate = [&](std::size_t off, std::uint8_t val) {
    auto b = bytes;
    b[off] = val;
    return b;
  };
  CHECK_THROWS_AS(parse_container(mutate(0, 'X')), CorruptionError);   // magic
  CHECK_THROWS_AS(parse_container(mutate(4, 9)), CorruptionError);     // version
  CHECK_THROWS_AS(parse_container(mutate(5, 2)), CorruptionError);     // format
  CHECK_THROWS_AS(parse_container(mutate(6, 7)), CorruptionError);     // variant
  CHECK_THROWS_AS(parse_container(mutate(8, 0xFF)), CorruptionError);  // flags
  CHECK_THROWS_AS(parse_container(mutate(9, 24)), CorruptionError);    // man_width
  CHECK_THROWS_AS(parse_container(mutate(10, 9)), CorruptionError);    // ndim
  CHECK_THROWS_AS(parse_container(mutate(12, 65)), CorruptionError);   // value_count
  CHECK_THROWS_AS(parse_container(mutate(20, 1)), CorruptionError);    // pad_count
  CHECK_THROWS_AS(parse_container(mutate(24, 2)), CorruptionError);    // group_count

  auto truncated = bytes;
  truncated.resize(bytes.size() - 1);
  CHECK_THROWS_AS(parse_container(truncated), CorruptionError);

  auto extended = bytes;
  extended.push_back(0);
  CHECK_THROWS_AS(parse_container(extended), CorruptionError);

  auto tiny = bytes;
  tiny.resize(20);
  CHECK_THROWS_AS(parse_container(tiny), CorruptionError);
}

TEST_CASE("dims must cover the value count") {
  PackConfig cfg;
  auto raw = sample_raw(64, cfg.format);
  std::vector<std::uint64_t> bad{9, 9};
  CHECK_THROWS_AS(pack_container(raw, bad, cfg), std::invalid_argument);
}

TEST_CASE("file round-trip") {
  PackConfig cfg;
  cfg.man_width = 5;
  auto raw = sample_raw(130, cfg.format);
  std::vector<std::uint64_t> dims{130};
  Container c = pack_container(raw, dims, cfg);
  auto path = (std::filesystem::temp_directory_path() / "sfpc_container_rt.sfpc").string();
  write_container_file(path, c);
  Container r = read_container_file(path);
  CHECK(r.header.value_count == 130);
  CHECK(unpack_container(r) == unpack_container(c));
  std::remove(path.c_str());
}

} // TEST_SUITE
