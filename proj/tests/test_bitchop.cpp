// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "sfpc/bitchop.hpp"
#include "sfpc/rng.hpp"

using namespace sfpc;
using namespace sfpc::bitchop;

TEST_SUITE("bitchop") {

TEST_CASE("ema formula") {
  CHECK(update_ema(2.0, 0.1, 1.0) == doctest::Approx(1.9));
  CHECK(update_ema(2.0, 1.0, 1.0) == 1.0);
  double mavg = 5.0;
  double prev_gap = std::abs(mavg - 1.0);
  for (int i = 0; i < 70; ++i) {
    mavg = update_ema(mavg, 0.1, 1.0);
    double gap = std::abs(mavg - 1.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(mavg == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("epsilon scales the relative deviation history") {
  ChopState s;
  s.periods = 10;
  s.mavg = 2.0;
  s.rel_ema = 0.05;
  CHECK(epsilon_of(s) == doctest::Approx(0.1));

  s.rel_ema = 0;
  CHECK(epsilon_of(s) == 0.0);

  ChopState fresh;
  CHECK(std::isinf(epsilon_of(fresh)));

  s.mavg = -1.0;
  CHECK_THROWS_AS(epsilon_of(s), NumericError);
}

TEST_CASE("decide direction and clamping") {
  ChopState s;
  s.width = 10;
  s.periods = 5;
  s.mavg = 1.0;
  s.rel_ema = 0.05; // epsilon 0.05
  CHECK(decide(s, 0.8, 23) == 9);   // loss well below average: shrink
  CHECK(decide(s, 0.98, 23) == 10); // within tolerance: hold
  CHECK(decide(s, 1.2, 23) == 11);  // loss above average: grow

  s.width = 0;
  CHECK(decide(s, 0.5, 23) == 0);
  s.width = 23;
  CHECK(decide(s, 2.0, 23) == 23);

  ChopState first;
  first.width = 7;
  CHECK(decide(first, 123.0, 23) == 7); // no history yet
}

TEST_CASE("first fold initializes, later folds decay") {
  ChopState s;
  fold(s, 0.1, 4.0);
  CHECK(s.periods == 1);
  CHECK(s.mavg == 4.0);
  CHECK(s.rel_ema == 0.0);
  // second fold records the relative deviation against the old average
  fold(s, 0.1, 2.0);
  CHECK(s.rel_ema == doctest::Approx(0.1 * 0.5));
  CHECK(s.mavg == doctest::Approx(4.0 + 0.1 * (2.0 - 4.0)));
}

TEST_CASE("zero-deviation history makes any difference move the width") {
  Config cfg;
  Controller ctl(cfg, 23);
  ctl.observe(1.0); // first period only initializes
  CHECK(ctl.width() == 23);
  ctl.observe(1.0); // identical loss: hold
  CHECK(ctl.width() == 23);
  ctl.observe(0.999); // epsilon still 0: shrink
  CHECK(ctl.width() == 22);
}

TEST_CASE("steadily improving loss drives the width to zero") {
  Config cfg;
  Controller ctl(cfg, 23);
  double loss = 1000.0;
  int batches = 0;
  while (ctl.width() > 0 && batches < 200) {
    ctl.observe(loss);
    loss *= 0.5;
    ++batches;
  }
  CHECK(ctl.width() == 0);
  CHECK(batches <= 24); // first period holds, then one bit per period
}

TEST_CASE("noisy but flat loss keeps the width bounded") {
  Config cfg;
  Controller ctl(cfg, 23);
  CounterRng rng(99, 0);
  for (int i = 0; i < 2000; ++i) {
    ctl.observe(1.0 + 0.2 * rng.uniform());
    CHECK(ctl.width() >= 0);
    CHECK(ctl.width() <= 23);
  }
}

TEST_CASE("identical loss streams give identical width trajectories") {
  Config cfg;
  cfg.period = 2;
  Controller a(cfg, 23);
  Controller b(cfg, 23);
  CounterRng rng(512, 0);
  std::vector<double> losses;
  for (int i = 0; i < 300; ++i) losses.push_back(2.0 * std::exp(-i / 50.0) + rng.uniform());
  for (double l : losses) {
    a.observe(l);
    b.observe(l);
    CHECK(a.width() == b.width());
  }
}

TEST_CASE("period batching decides on the period mean") {
  Config cfg;
  cfg.period = 3;
  Controller ctl(cfg, 23);
  ctl.observe(1.0);
  ctl.observe(2.0);
  CHECK(ctl.state().periods == 0); // mid-period
  ctl.observe(3.0);
  CHECK(ctl.state().periods == 1);
  CHECK(ctl.state().mavg == doctest::Approx(2.0));
}

TEST_CASE("lr change bypasses the controller and freezes state") {
  Config cfg;
  cfg.cooldown = 3;
  Controller ctl(cfg, 23);
  for (double l : {8.0, 4.0, 2.0, 1.0}) ctl.observe(l);
  int width_before = ctl.width();
  ChopState state_before = ctl.state();
  REQUIRE(width_before < 23);

  ctl.notify_lr_change();
  for (int i = 0; i < 4; ++i) { // drop batch + cooldown 3
    CHECK(ctl.bypassed());
    CHECK(ctl.effective_width() == 23);
    ctl.observe(1000.0); // wild losses are ignored while bypassed
  }
  CHECK_FALSE(ctl.bypassed());
  CHECK(ctl.effective_width() == width_before);
  CHECK(ctl.state().mavg == state_before.mavg);
  CHECK(ctl.state().periods == state_before.periods);

  // next real loss is processed again
  ctl.observe(0.25);
  CHECK(ctl.state().periods == state_before.periods + 1);
}

TEST_CASE("degenerate losses raise numeric errors") {
  Config cfg;
  Controller ctl(cfg, 23);
  CHECK_THROWS_AS(ctl.observe(std::numeric_limits<double>::quiet_NaN()), NumericError);
  CHECK_THROWS_AS(ctl.observe(std::numeric_limits<double>::infinity()), NumericError);

  Controller neg(cfg, 23);
  neg.observe(-1.0); // first fold takes any finite value
  CHECK_THROWS_AS(neg.observe(-1.0), NumericError);
}

} // TEST_SUITE
