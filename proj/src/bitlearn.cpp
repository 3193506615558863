// SPDX-License-Identifier: Apache-2.0
#include "sfpc/bitlearn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfpc::bitlearn {

void normalize_lambdas(std::vector<BitlengthParam>& params) {
  std::size_t total = 0;
  for (const auto& p : params) total += p.element_count;
  if (total == 0)
    throw std::invalid_argument("normalize_lambdas: no elements to weight");
  for (auto& p : params)
    p.lambda = static_cast<double>(p.element_count) / static_cast<double>(total);
}

double augmented_loss(double task_loss, std::span<const BitlengthParam> params,
                      double gamma) {
  double penalty = 0;
  for (const auto& p : params) penalty += p.lambda * p.n;
  return task_loss + gamma * penalty;
}

double gradient_data_term(std::span<const std::uint32_t> raw,
                          std::span<const float> grads, double n,
                          const FloatFormat& fmt) {
  if (raw.size() != grads.size())
    throw std::invalid_argument("gradient_data_term: raw/grads size mismatch");
  const int m = fmt.mantissa_bits;
  const int fl = std::clamp(static_cast<int>(std::floor(n)), 0, m);
  if (fl >= m) return 0.0;
  double acc = 0;
  for (std::size_t j = 0; j < raw.size(); ++j) {
    FloatTriple t = decompose(raw[j], fmt);
    if (t.exponent == fmt.exponent_max()) continue;
    std::uint32_t delta = quantize_mantissa(t.mantissa, fl + 1, fmt) -
                          quantize_mantissa(t.mantissa, fl, fmt);
    if (delta == 0) continue;
    int exp_unbiased = (t.exponent == 0 ? 1 : t.exponent) - fmt.bias - m;
    double dv = std::ldexp(static_cast<double>(delta), exp_unbiased);
    acc += static_cast<double>(grads[j]) * (t.sign ? -dv : dv);
  }
  return acc;
}

double gradient(const BitlengthParam& p, std::span<const std::uint32_t> raw,
                std::span<const float> grads, const FloatFormat& fmt, double gamma) {
  return gradient_data_term(raw, grads, p.n, fmt) + gamma * p.lambda;
}

void step(BitlengthParam& p, double grad, double lr, int mantissa_bits) {
  if (lr <= 0) throw std::invalid_argument("step: lr must be positive");
  if (p.frozen) return;
  p.n = std::clamp(p.n - lr * grad, 0.0, static_cast<double>(mantissa_bits));
}

void finalize(std::vector<BitlengthParam>& params) {
  for (auto& p : params) {
    p.n = std::ceil(p.n);
    p.frozen = true;
  }
}

double gamma_at(std::span<const GammaPoint> schedule, int epoch) {
  double g = 0;
  for (const auto& pt : schedule)
    if (pt.epoch <= epoch) g = pt.gamma;
  return g;
}

std::vector<GammaPoint> Config::default_schedule(int total_epochs) {
  return {{0, 0.1}, {total_epochs / 3, 0.01}, {2 * total_epochs / 3, 0.001}};
}

Controller::Controller(Config cfg, std::vector<BitlengthParam> params,
                       const FloatFormat& fmt)
    : cfg_(std::move(cfg)), params_(std::move(params)), fmt_(fmt) {
  for (auto& p : params_) p.n = static_cast<double>(fmt_.mantissa_bits);
  normalize_lambdas(params_);
}

int Controller::draw_width(std::size_t i, CounterRng& rng) const {
  const BitlengthParam& p = params_.at(i);
  if (p.frozen) return static_cast<int>(p.n);
  return stochastic_bitlength(p.n, fmt_.mantissa_bits, rng);
}

void Controller::update(std::size_t i, std::span<const std::uint32_t> raw,
                        std::span<const float> grads, int epoch) {
  BitlengthParam& p = params_.at(i);
  if (p.frozen) return;
  step(p, gradient(p, raw, grads, fmt_, gamma(epoch)), cfg_.lr, fmt_.mantissa_bits);
}

void Controller::maybe_finalize(int epoch) {
  if (!finalized_ && epoch >= cfg_.finalize_epoch) {
    finalize(params_);
    finalized_ = true;
  }
}

double Controller::penalty(int epoch) const {
  return augmented_loss(0.0, params_, gamma(epoch));
}

double Controller::mean_bitlength() const {
  if (params_.empty()) return 0;
  double sum = 0;
  for (const auto& p : params_) sum += p.n;
  return sum / static_cast<double>(params_.size());
}

} // namespace sfpc::bitlearn
