// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sfpc/float_format.hpp"
#include "sfpc/rng.hpp"

namespace sfpc::bitlearn {

// Gradient-learned per-tensor mantissa bitlengths. Each controlled tensor
// carries a real-valued width n in [0, m]. Training minimizes
// task_loss + gamma * sum(lambda_i * n_i), with lambda weighting tensors by
// element count (normalized to sum 1). During training the effective integer
// width is drawn stochastically between floor(n) and floor(n)+1, one draw per
// tensor per batch; finalize() rounds every n up and freezes it.

enum class TensorKind : std::uint8_t { Weights = 0, Activations = 1 };

struct BitlengthParam {
  std::string name;
  TensorKind kind = TensorKind::Weights;
  std::size_t element_count = 0;
  double n = 0;       // learnable width
  double lambda = 0;  // footprint weight, filled by normalize_lambdas
  bool frozen = false;
};

// lambda_i = element_count_i / total elements.
void normalize_lambdas(std::vector<BitlengthParam>& params);

double augmented_loss(double task_loss, std::span<const BitlengthParam> params,
                      double gamma);

// d(task_loss)/dn for one tensor via the straight-through estimator: the
// value moves by the mantissa bits that floor(n)+1 reveals over floor(n),
// scaled onto the value axis. raw must hold the stored (unquantized)
// patterns; grads holds dL/dvalue at the points the forward pass used.
// Subnormals scale as exponent 1; non-finite values contribute nothing.
// Saturates to 0 once floor(n) reaches m.
double gradient_data_term(std::span<const std::uint32_t> raw,
                          std::span<const float> grads, double n,
                          const FloatFormat& fmt);

double gradient(const BitlengthParam& p, std::span<const std::uint32_t> raw,
                std::span<const float> grads, const FloatFormat& fmt, double gamma);

// n <- clip(n - lr * grad, 0, m); no-op when frozen.
void step(BitlengthParam& p, double grad, double lr, int mantissa_bits);

// n <- ceil(n), frozen; widths become deterministic afterwards.
void finalize(std::vector<BitlengthParam>& params);

struct GammaPoint {
  int epoch;
  double gamma;
};

// Value of the most recent point at or before `epoch`; 0 before any point.
double gamma_at(std::span<const GammaPoint> schedule, int epoch);

struct Config {
  double lr = 0.01;
  std::vector<GammaPoint> schedule;
  int finalize_epoch = 0;

  // 0.1 / 0.01 / 0.001 stepping down at thirds of the run.
  static std::vector<GammaPoint> default_schedule(int total_epochs);
};

class Controller {
public:
  Controller(Config cfg, std::vector<BitlengthParam> params, const FloatFormat& fmt);

  const std::vector<BitlengthParam>& params() const { return params_; }
  const Config& config() const { return cfg_; }
  double gamma(int epoch) const { return gamma_at(cfg_.schedule, epoch); }
  bool finalized() const { return finalized_; }

  // Integer width for this batch: stochastic before finalize, ceil(n) after.
  int draw_width(std::size_t i, CounterRng& rng) const;

  void update(std::size_t i, std::span<const std::uint32_t> raw,
              std::span<const float> grads, int epoch);

  // Finalizes once epoch reaches the configured finalize_epoch.
  void maybe_finalize(int epoch);

  double penalty(int epoch) const; // gamma * sum(lambda * n)
  double mean_bitlength() const;

private:
  Config cfg_;
  std::vector<BitlengthParam> params_;
  FloatFormat fmt_;
  bool finalized_ = false;
};

} // namespace sfpc::bitlearn
