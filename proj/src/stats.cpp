// SPDX-License-Identifier: Apache-2.0
#include "sfpc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "sfpc/packer.hpp"

namespace sfpc::stats {

namespace {

constexpr int kStorableWidths[] = {0, 1, 2, 3, 4, 5, 6, 8};

// Cheapest storable width that can carry every magnitude in the row, found
// by trying them all; 3-bit code plus sign-magnitude payload when non-zero.
std::size_t min_row_bits(std::span<const std::uint32_t> mags) {
  std::size_t best = SIZE_MAX;
  for (int w : kStorableWidths) {
    bool fits = true;
    for (std::uint32_t mag : mags)
      if (mag >= (1u << w)) { fits = false; break; }
    if (!fits) continue;
    const std::size_t cost =
        gecko::kWidthCodeBits +
        (w == 0 ? 0 : mags.size() * (static_cast<std::size_t>(w) + 1));
    best = std::min(best, cost);
  }
  if (best == SIZE_MAX) throw std::logic_error("no storable width fits");
  return best;
}

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::vector<std::uint8_t> uniform_exponents(std::size_t n, CounterRng& rng) {
  std::vector<std::uint8_t> out(n);
  for (auto& e : out) e = static_cast<std::uint8_t>(rng.below(256));
  return out;
}

std::vector<std::uint8_t> gaussian_exponents(std::size_t n, double mean, double sigma,
                                             CounterRng& rng) {
  if (sigma < 0) throw std::invalid_argument("sigma must be non-negative");
  std::vector<std::uint8_t> out(n);
  for (auto& e : out) {
    const double v = std::round(mean + sigma * rng.normal());
    e = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return out;
}

std::size_t oracle_delta_bits(std::span<const std::uint8_t> exps, std::uint8_t pad_exponent) {
  if (exps.empty()) return 0;
  const std::size_t groups = (exps.size() + gecko::kGroupSize - 1) / gecko::kGroupSize;
  std::size_t total = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const auto tile = gecko::fill_delta_group(exps, g, pad_exponent);
    total += static_cast<std::size_t>(gecko::kGroupCols) * gecko::kExponentBits;
    for (int r = 1; r < gecko::kGroupRows; ++r) {
      std::array<std::uint32_t, gecko::kGroupCols> mags{};
      for (int c = 0; c < gecko::kGroupCols; ++c) {
        const int delta = static_cast<int>(tile[static_cast<std::size_t>(r) * gecko::kGroupCols + c]) -
                          static_cast<int>(tile[static_cast<std::size_t>(c)]);
        mags[static_cast<std::size_t>(c)] = static_cast<std::uint32_t>(std::abs(delta));
      }
      total += min_row_bits(mags);
    }
  }
  return total;
}

std::size_t oracle_fixed_bits(std::span<const std::uint8_t> exps, int bias,
                              std::uint8_t pad_exponent) {
  if (exps.empty()) return 0;
  if (bias < 0 || bias > 255) throw std::invalid_argument("bias must fit an exponent");
  const std::size_t groups = (exps.size() + gecko::kFixedGroupSize - 1) / gecko::kFixedGroupSize;
  std::size_t total = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const auto tile = gecko::fill_fixed_group(exps, g, pad_exponent);
    std::array<std::uint32_t, gecko::kFixedGroupSize> mags{};
    for (int c = 0; c < gecko::kFixedGroupSize; ++c)
      mags[static_cast<std::size_t>(c)] =
          static_cast<std::uint32_t>(std::abs(static_cast<int>(tile[static_cast<std::size_t>(c)]) - bias));
    total += min_row_bits(mags);
  }
  return total;
}

std::vector<RatioRow> ratio_sweep(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sweep needs at least one exponent");
  std::vector<RatioRow> rows;
  CounterRng master(seed);
  auto add = [&rows](const std::string& label, std::span<const std::uint8_t> exps) {
    RatioRow row;
    row.label = label;
    row.delta_ratio = gecko::measure(exps, gecko::Variant::DeltaBase).ratio();
    row.fixed_ratio = gecko::measure(exps, gecko::Variant::FixedBias).ratio();
    rows.push_back(std::move(row));
  };
  {
    CounterRng rng = master.split(1);
    add("uniform", uniform_exponents(n, rng));
  }
  int stream = 2;
  for (double sigma : {1.0, 2.0, 4.0, 8.0}) {
    CounterRng rng = master.split(static_cast<std::uint64_t>(stream++));
    char label[32];
    std::snprintf(label, sizeof label, "gauss_sigma%g", sigma);
    add(label, gaussian_exponents(n, 127.0, sigma, rng));
  }
  return rows;
}

std::string ratio_sweep_csv(const std::vector<RatioRow>& rows) {
  std::string out = "distribution,delta_ratio,fixed_ratio\n";
  for (const auto& r : rows)
    out += r.label + "," + fmt_g(r.delta_ratio) + "," + fmt_g(r.fixed_ratio) + "\n";
  return out;
}

std::vector<double> width_cdf(std::span<const std::uint8_t> exps) {
  std::vector<std::uint64_t> counts(9, 0);
  std::uint64_t total = 0;
  const std::size_t groups = (exps.size() + gecko::kGroupSize - 1) / gecko::kGroupSize;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * gecko::kGroupSize;
    const std::size_t have = std::min<std::size_t>(gecko::kGroupSize, exps.size() - begin);
    const auto tile = gecko::fill_delta_group(exps, g, gecko::kDefaultPadExponent);
    for (std::size_t i = gecko::kGroupCols; i < have; ++i) {
      const int c = static_cast<int>(i % gecko::kGroupCols);
      const int delta = static_cast<int>(tile[i]) - static_cast<int>(tile[static_cast<std::size_t>(c)]);
      const int w = gecko::width_for_magnitude(static_cast<std::uint32_t>(std::abs(delta)));
      ++counts[static_cast<std::size_t>(w)];
      ++total;
    }
  }
  std::vector<double> cdf(9, 1.0);
  if (total == 0) return cdf; // degenerate: everything is a base value
  std::uint64_t acc = 0;
  for (std::size_t w = 0; w < 9; ++w) {
    acc += counts[w];
    cdf[w] = static_cast<double>(acc) / static_cast<double>(total);
  }
  return cdf;
}

std::string width_cdf_csv(std::span<const double> cdf) {
  std::string out = "width,fraction\n";
  for (std::size_t w = 0; w < cdf.size(); ++w)
    out += std::to_string(w) + "," + fmt_g(cdf[w]) + "\n";
  return out;
}

std::size_t js_size_bits(std::span<const std::uint32_t> raw, const FloatFormat& fmt) {
  std::size_t nonzero = 0;
  for (std::uint32_t v : raw) {
    const auto t = decompose(v, fmt);
    if (t.exponent != 0 || t.mantissa != 0) ++nonzero;
  }
  return raw.size() + nonzero * fmt.total_bits();
}

ReplayStats replay_trace(const trace::TraceFile& tf, gecko::Variant variant) {
  ReplayStats out;
  std::map<std::uint32_t, ReplayEpoch> per_epoch;
  const FloatFormat fmt = FloatFormat::from_kind(tf.fmt);
  for (const auto& rec : tf.records) {
    packer::PackConfig pc;
    pc.format = fmt;
    pc.variant = variant;
    pc.man_width = rec.width;
    pc.signless = (rec.flags & trace::kFlagSignless) != 0;
    const auto fp = packer::measure(rec.raw, pc);
    out.bits += fp.total_bits();
    out.original_bits += fp.original_bits;
    auto& e = per_epoch[rec.epoch];
    e.epoch = rec.epoch;
    e.bits += fp.total_bits();
    e.original_bits += fp.original_bits;
  }
  out.ratio = out.original_bits
                  ? static_cast<double>(out.bits) / static_cast<double>(out.original_bits)
                  : 0.0;
  for (auto& [_, e] : per_epoch) {
    e.ratio = e.original_bits ? static_cast<double>(e.bits) / static_cast<double>(e.original_bits)
                              : 0.0;
    out.epochs.push_back(e);
  }
  return out;
}

} // namespace sfpc::stats
