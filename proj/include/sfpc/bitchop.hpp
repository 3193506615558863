// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>

#include "sfpc/error.hpp"

namespace sfpc::bitchop {

// Network-wide mantissa width heuristic driven by an exponential moving
// average of the training loss. Once per period (default one batch) the
// controller compares the EMA with the fresh loss: if the loss sits more
// than a tolerance epsilon below the average, training is improving and one
// mantissa bit is dropped; more than epsilon above, one bit comes back;
// otherwise the width holds. epsilon is the EMA of the relative deviation
// |L - Mavg| / Mavg (same decay factor), scaled by the current Mavg. The
// decision is taken against the pre-update average, and only then is the
// loss folded in.
//
// Learning-rate changes make the loss jumpy, so notify_lr_change() bypasses
// the controller for that batch plus a cooldown: the full mantissa width is
// emitted and the state is frozen (bypassed batches are dropped entirely).

struct ChopState {
  int width = 0;       // current bitlength n
  double mavg = 0;     // loss EMA, valid once periods > 0
  double rel_ema = 0;  // EMA of |L - mavg| / mavg
  long periods = 0;    // completed (folded) periods
};

// mavg + alpha * (loss - mavg)
double update_ema(double mavg, double alpha, double loss);

// +infinity before the first fold (forces "unchanged"); afterwards
// mavg * rel_ema. Throws NumericError if mavg is not positive.
double epsilon_of(const ChopState& s);

// New width per the comparison above, clamped to [0, m]. Never mutates s.
int decide(const ChopState& s, double loss, int mantissa_bits);

// Folds one period loss: relative deviation first (against the pre-update
// average), then the loss EMA. The first fold initializes mavg = loss and
// rel_ema = 0.
void fold(ChopState& s, double alpha, double loss);

struct Config {
  double alpha = 0.1;
  int period = 1;              // batches per decision
  int cooldown = 100;          // extra bypassed batches after an LR change
  bool include_weights = false; // widen scope from activations to weights too
};

class Controller {
public:
  Controller(const Config& cfg, int mantissa_bits);

  int width() const { return state_.width; }
  // Width the pipeline should use right now: m while bypassed.
  int effective_width() const { return bypass_left_ > 0 ? mantissa_bits_ : state_.width; }
  bool bypassed() const { return bypass_left_ > 0; }
  const ChopState& state() const { return state_; }

  // Bypass this batch plus the configured cooldown.
  void notify_lr_change() { bypass_left_ = 1 + cfg_.cooldown; }

  // One call per batch with that batch's training loss.
  void observe(double loss);

private:
  Config cfg_;
  int mantissa_bits_;
  ChopState state_;
  int bypass_left_ = 0;
  double period_sum_ = 0;
  int period_count_ = 0;
};

} // namespace sfpc::bitchop
