// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sfpc/float_format.hpp"
#include "sfpc/gecko.hpp"
#include "sfpc/rng.hpp"
#include "sfpc/trace.hpp"

namespace sfpc::stats {

// Measurement utilities around the exponent codec: synthetic exponent
// distributions, a brute-force minimal-size oracle, ratio sweeps, and
// replay of recorded training traces.

std::vector<std::uint8_t> uniform_exponents(std::size_t n, CounterRng& rng);

// Rounded normal draws clamped to [0, 255].
std::vector<std::uint8_t> gaussian_exponents(std::size_t n, double mean, double sigma,
                                             CounterRng& rng);

// Minimal encoded size found by trying every storable width row by row;
// includes bases and width codes, pads partial groups like the encoder.
std::size_t oracle_delta_bits(std::span<const std::uint8_t> exps,
                              std::uint8_t pad_exponent = gecko::kDefaultPadExponent);
std::size_t oracle_fixed_bits(std::span<const std::uint8_t> exps,
                              int bias = gecko::kDefaultBias,
                              std::uint8_t pad_exponent = gecko::kDefaultPadExponent);

struct RatioRow {
  std::string label;
  double delta_ratio = 0;
  double fixed_ratio = 0;
};

// Exponent-stream compression ratio over a reference distribution family:
// uniform plus centred Gaussians of width 1, 2, 4, 8.
std::vector<RatioRow> ratio_sweep(std::size_t n, std::uint64_t seed);
std::string ratio_sweep_csv(const std::vector<RatioRow>& rows);

// cdf[w] = fraction of non-base values whose delta against the column base
// needs at most w magnitude bits; length 9 (w = 0..8).
std::vector<double> width_cdf(std::span<const std::uint8_t> exps);
std::string width_cdf_csv(std::span<const double> cdf);

// Zero-suppression baseline: a presence bit per value plus full-width
// payload for the non-zero ones. Zero means exponent and mantissa all zero.
std::size_t js_size_bits(std::span<const std::uint32_t> raw, const FloatFormat& fmt);

struct ReplayEpoch {
  std::uint32_t epoch = 0;
  std::uint64_t bits = 0;
  std::uint64_t original_bits = 0;
  double ratio = 0;
};

struct ReplayStats {
  std::uint64_t bits = 0;
  std::uint64_t original_bits = 0;
  double ratio = 0;
  std::vector<ReplayEpoch> epochs;
};

// Recomputes packed sizes for every record of a recorded run.
ReplayStats replay_trace(const trace::TraceFile& tf, gecko::Variant variant);

} // namespace sfpc::stats
