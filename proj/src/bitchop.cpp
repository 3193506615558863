// SPDX-License-Identifier: Apache-2.0
#include "sfpc/bitchop.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfpc::bitchop {

double update_ema(double mavg, double alpha, double loss) {
  return mavg + alpha * (loss - mavg);
}

double epsilon_of(const ChopState& s) {
  if (s.periods == 0) return std::numeric_limits<double>::infinity();
  if (s.mavg <= 0)
    throw NumericError("epsilon_of: loss average is not positive");
  return s.mavg * s.rel_ema;
}

int decide(const ChopState& s, double loss, int mantissa_bits) {
  double eps = epsilon_of(s);
  if (s.periods == 0) return s.width;
  int next = s.width;
  if (s.mavg > loss + eps) --next;      // improving, drop a bit
  else if (s.mavg < loss - eps) ++next; // worsening, restore a bit
  return std::clamp(next, 0, mantissa_bits);
}

void fold(ChopState& s, double alpha, double loss) {
  if (s.periods == 0) {
    s.mavg = loss;
    s.rel_ema = 0;
  } else {
    if (s.mavg <= 0) throw NumericError("fold: loss average is not positive");
    double rel = std::abs(loss - s.mavg) / s.mavg;
    s.rel_ema = update_ema(s.rel_ema, alpha, rel);
    s.mavg = update_ema(s.mavg, alpha, loss);
  }
  ++s.periods;
}

Controller::Controller(const Config& cfg, int mantissa_bits)
    : cfg_(cfg), mantissa_bits_(mantissa_bits) {
  if (cfg.alpha <= 0 || cfg.alpha > 1)
    throw std::invalid_argument("bitchop: alpha must be in (0, 1]");
  if (cfg.period < 1) throw std::invalid_argument("bitchop: period must be >= 1");
  if (cfg.cooldown < 0) throw std::invalid_argument("bitchop: cooldown must be >= 0");
  state_.width = mantissa_bits;
}

void Controller::observe(double loss) {
  if (!std::isfinite(loss)) throw NumericError("bitchop: non-finite loss");
  if (bypass_left_ > 0) {
    --bypass_left_;
    return;
  }
  period_sum_ += loss;
  if (++period_count_ < cfg_.period) return;
  double mean = period_sum_ / period_count_;
  period_sum_ = 0;
  period_count_ = 0;
  state_.width = decide(state_, mean, mantissa_bits_);
  fold(state_, cfg_.alpha, mean);
}

} // namespace sfpc::bitchop
