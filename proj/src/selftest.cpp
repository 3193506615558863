// SPDX-License-Identifier: Apache-2.0
#include "sfpc/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sfpc/bitchop.hpp"
#include "sfpc/bitlearn.hpp"
#include "sfpc/container.hpp"
#include "sfpc/error.hpp"
#include "sfpc/float_format.hpp"
#include "sfpc/gecko.hpp"
#include "sfpc/packer.hpp"
#include "sfpc/perf.hpp"
#include "sfpc/rng.hpp"
#include "sfpc/stats.hpp"

namespace sfpc::cli {

namespace {

struct Reporter {
  std::ostream& out;
  int failures = 0;

  void check(const std::string& name, bool ok, const std::string& detail = {}) {
    if (ok) {
      out << "PASS " << name << '\n';
    } else {
      ++failures;
      out << "FAIL " << name;
      if (!detail.empty()) out << " (" << detail << ")";
      out << '\n';
    }
  }
};

std::vector<std::uint32_t> random_finite(std::size_t n, const FloatFormat& fmt,
                                         CounterRng& rng) {
  std::vector<std::uint32_t> raw(n);
  for (auto& v : raw) {
    FloatTriple t;
    t.sign = static_cast<std::uint8_t>(rng.next_u64() & 1);
    t.exponent = static_cast<std::uint8_t>(rng.next_u64() % 255); // finite only
    t.mantissa = static_cast<std::uint32_t>(rng.next_u64()) & fmt.mantissa_mask();
    v = recompose(t, fmt);
  }
  return raw;
}

void roundtrip_checks(Reporter& r) {
  CounterRng rng(7701, 1);
  {
    const auto fmt = FloatFormat::fp32();
    const auto raw = random_finite(100000, fmt, rng);
    packer::PackConfig pc;
    pc.format = fmt;
    pc.man_width = fmt.mantissa_bits;
    const std::uint64_t dims[] = {100000};
    const auto c = pack_container(raw, dims, pc);
    const auto back = unpack_container(parse_container(serialize(c)));
    r.check("roundtrip fp32 random 1e5", std::equal(raw.begin(), raw.end(), back.begin(),
                                                    back.end()));
  }
  {
    const auto fmt = FloatFormat::bf16();
    std::vector<std::uint32_t> raw;
    raw.reserve(65536);
    for (std::uint32_t v = 0; v < 65536; ++v)
      if (!is_nonfinite(v, fmt)) raw.push_back(v);
    packer::PackConfig pc;
    pc.format = fmt;
    pc.variant = gecko::Variant::FixedBias;
    pc.man_width = fmt.mantissa_bits;
    const auto c = pack_container(raw, {}, pc);
    const auto back = unpack_container(parse_container(serialize(c)));
    r.check("roundtrip bf16 all finite patterns",
            std::equal(raw.begin(), raw.end(), back.begin(), back.end()));
  }
}

void oracle_checks(Reporter& r) {
  CounterRng rng(7702, 1);
  bool delta_ok = true, fixed_ok = true;
  for (int trial = 0; trial < 1000 && (delta_ok || fixed_ok); ++trial) {
    const std::size_t n = 1 + rng.next_u64() % 300;
    std::vector<std::uint8_t> exps(n);
    const bool tight = (trial % 2) == 0;
    for (auto& e : exps)
      e = tight ? static_cast<std::uint8_t>(120 + rng.next_u64() % 16)
                : static_cast<std::uint8_t>(rng.next_u64() % 256);
    const auto dm = gecko::measure(exps, gecko::Variant::DeltaBase);
    if (dm.meta_bits + dm.content_bits != stats::oracle_delta_bits(exps)) delta_ok = false;
    const auto fm = gecko::measure(exps, gecko::Variant::FixedBias);
    if (fm.meta_bits + fm.content_bits != stats::oracle_fixed_bits(exps)) fixed_ok = false;
  }
  r.check("exponent encoder matches exhaustive size oracle (delta)", delta_ok);
  r.check("exponent encoder matches exhaustive size oracle (fixed)", fixed_ok);
}

void truncation_checks(Reporter& r) {
  const auto fmt = FloatFormat::bf16();
  bool idem = true, nest = true;
  for (std::uint32_t v = 0; v < 65536 && (idem || nest); ++v) {
    if (is_nonfinite(v, fmt)) continue;
    for (int a = 0; a <= 7; ++a) {
      const auto qa = quantize_value(v, a, fmt);
      if (quantize_value(qa, a, fmt) != qa) idem = false;
      for (int b = 0; b <= 7; ++b)
        if (quantize_value(qa, b, fmt) != quantize_value(v, std::min(a, b), fmt)) nest = false;
    }
  }
  r.check("truncation idempotent over every finite bf16 pattern", idem);
  r.check("nested truncation equals the narrower width", nest);

  CounterRng rng(7703, 1);
  const double n = 3.25;
  const std::size_t draws = 100000;
  double sum = 0;
  for (std::size_t i = 0; i < draws; ++i) sum += stochastic_bitlength(n, 23, rng);
  const double mean = sum / static_cast<double>(draws);
  // 3 sigma of a Bernoulli(0.25) mean over 1e5 draws.
  const double band = 3.0 * std::sqrt(0.25 * 0.75 / static_cast<double>(draws));
  std::ostringstream detail;
  detail << "mean " << mean << " target 3.25 +- " << band;
  r.check("stochastic width mean lands within 3 sigma", std::abs(mean - n) <= band,
          detail.str());
}

void packer_checks(Reporter& r) {
  CounterRng rng(7704, 1);
  bool size_ok = true, value_ok = true;
  for (int trial = 0; trial < 24; ++trial) {
    packer::PackConfig pc;
    pc.format = (trial & 1) ? FloatFormat::bf16() : FloatFormat::fp32();
    pc.variant = (trial & 2) ? gecko::Variant::FixedBias : gecko::Variant::DeltaBase;
    pc.signless = (trial & 4) != 0;
    pc.man_width = static_cast<int>(rng.next_u64() % (pc.format.mantissa_bits + 1));
    const std::size_t n = 1 + rng.next_u64() % 500;
    auto raw = random_finite(n, pc.format, rng);
    if (pc.signless)
      for (auto& v : raw) v = recompose({0, decompose(v, pc.format).exponent,
                                         decompose(v, pc.format).mantissa}, pc.format);
    const auto streams = packer::pack(raw, pc);
    const auto fp = packer::measure(raw, pc);
    if (streams.payload_bits != fp.payload_bits() || streams.meta_bits != fp.meta_bits)
      size_ok = false;
    const auto back = packer::unpack(streams.data, streams.meta, raw.size(), pc);
    for (std::size_t i = 0; i < raw.size(); ++i)
      if (back[i] != packer::reference_transform(raw[i], pc)) value_ok = false;
  }
  r.check("closed-form footprint equals the packed stream", size_ok);
  r.check("unpack inverts pack up to the configured loss", value_ok);
}

void container_checks(Reporter& r) {
  CounterRng rng(7705, 1);
  packer::PackConfig pc;
  const auto raw = random_finite(513, pc.format, rng);
  auto bytes = serialize(pack_container(raw, {}, pc));

  bool magic_ok = false;
  auto tampered = bytes;
  tampered[0] ^= 0xFF;
  try {
    parse_container(tampered);
  } catch (const CorruptionError&) {
    magic_ok = true;
  }
  r.check("magic tamper raises a corruption error", magic_ok);

  bool trunc_ok = false;
  try {
    parse_container(std::span<const std::uint8_t>(bytes.data(), bytes.size() - 5));
  } catch (const CorruptionError&) {
    trunc_ok = true;
  }
  r.check("truncated container raises a corruption error", trunc_ok);

  bool field_ok = false;
  tampered = bytes;
  tampered[40] ^= 0x01; // stored payload size no longer matches the streams
  try {
    parse_container(tampered);
  } catch (const CorruptionError&) {
    field_ok = true;
  }
  r.check("inconsistent stored size raises a corruption error", field_ok);
}

void perf_checks(Reporter& r) {
  CounterRng rng(7706, 1);
  perf::HardwareConfig hw;
  bool bound_ok = true, energy_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<perf::LayerTraffic> layers(1 + rng.next_u64() % 6);
    int li = 0;
    for (auto& l : layers) {
      l.name = "l" + std::to_string(li++);
      l.macs = 1e6 + static_cast<double>(rng.next_u64() % 1000000000ull);
      l.bytes_raw = 1e3 + static_cast<double>(rng.next_u64() % 100000000ull);
      l.bytes_compressed = l.bytes_raw * (0.1 + 1.4 * rng.uniform());
    }
    const auto rep = perf::run_report(layers, hw);
    if (rep.speedup > 1.0 / rep.traffic_ratio + 1e-9) bound_ok = false;
    if (std::abs(rep.energy_ratio - rep.traffic_ratio) > 1e-12) energy_ok = false;
  }
  r.check("speedup never beats the traffic ratio bound", bound_ok);
  r.check("with link-only energy the energy ratio equals the traffic ratio", energy_ok);
}

void controller_checks(Reporter& r) {
  {
    bitchop::ChopState s;
    s.width = 10;
    bitchop::fold(s, 0.1, 1.0); // first fold: mavg = 1, rel_ema = 0
    const bool drop = bitchop::decide(s, 0.9, 23) == 9;
    const bool grow = bitchop::decide(s, 1.1, 23) == 11;
    const bool hold = bitchop::decide(s, 1.0, 23) == 10;
    r.check("loss EMA heuristic drops, grows, and holds on hand cases",
            drop && grow && hold);

    bitchop::ChopState fresh;
    fresh.width = 5;
    const bool pre = bitchop::decide(fresh, 123.0, 23) == 5; // no EMA yet
    r.check("loss EMA heuristic holds before the first fold", pre);
  }
  {
    const auto fmt = FloatFormat::fp32();
    bitlearn::BitlengthParam p;
    p.element_count = 4;
    p.lambda = 0.5;
    p.n = 23.0;
    const std::uint32_t raw[] = {0x3F800000u};
    const float grads[] = {1.0f};
    // Data term saturates at full width, leaving only the size penalty.
    const double g = bitlearn::gradient(p, raw, grads, fmt, 0.2);
    r.check("width gradient reduces to gamma * lambda at full width",
            std::abs(g - 0.1) < 1e-15);

    bitlearn::BitlengthParam q;
    q.n = 0.005;
    bitlearn::step(q, 1.0, 0.01, 23);
    const bool clip_lo = q.n == 0.0;
    q.n = 22.999;
    bitlearn::step(q, -1.0, 0.01, 23);
    const bool clip_hi = q.n == 23.0;
    r.check("width steps clip to the representable range", clip_lo && clip_hi);
  }
}

void js_checks(Reporter& r) {
  const std::vector<std::uint32_t> zeros(100, 0);
  const bool zero_ok = stats::js_size_bits(zeros, FloatFormat::bf16()) == 100;
  const std::vector<std::uint32_t> mixed = {0, 0x3F800000u, 0x40000000u, 0};
  const bool mixed_ok = stats::js_size_bits(mixed, FloatFormat::fp32()) == 4 + 2 * 32;
  r.check("zero-suppression baseline sizes match hand counts", zero_ok && mixed_ok);
}

} // namespace

int selftest(std::ostream& out) {
  Reporter r{out};
  roundtrip_checks(r);
  oracle_checks(r);
  truncation_checks(r);
  packer_checks(r);
  container_checks(r);
  perf_checks(r);
  controller_checks(r);
  js_checks(r);
  out << (r.failures == 0 ? "selftest: all checks passed"
                          : "selftest: " + std::to_string(r.failures) + " check(s) failed")
      << '\n';
  return r.failures == 0 ? kExitOk : kExitUsage;
}

} // namespace sfpc::cli
