// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sfpc/bitlearn.hpp"
#include "sfpc/rng.hpp"

using namespace sfpc;
using namespace sfpc::bitlearn;

TEST_SUITE("bitlearn") {

TEST_CASE("augmented loss arithmetic") {
  std::vector<BitlengthParam> ps(2);
  ps[0].lambda = 0.5;
  ps[0].n = 2;
  ps[1].lambda = 0.5;
  ps[1].n = 4;
  CHECK(augmented_loss(1.0, ps, 0.1) == doctest::Approx(1.3));
  CHECK(augmented_loss(1.0, ps, 0.0) == 1.0);
}

TEST_CASE("footprint weights normalize by element count") {
  std::vector<BitlengthParam> ps(2);
  ps[0].element_count = 300;
  ps[1].element_count = 100;
  normalize_lambdas(ps);
  CHECK(ps[0].lambda == doctest::Approx(0.75));
  CHECK(ps[1].lambda == doctest::Approx(0.25));
  CHECK(ps[0].lambda == doctest::Approx(3.0 * ps[1].lambda));

  std::vector<BitlengthParam> empty(1);
  CHECK_THROWS_AS(normalize_lambdas(empty), std::invalid_argument);
}

TEST_CASE("hand-computed single-value gradient") {
  auto bf16 = FloatFormat::bf16();
  // mantissa 0b1011011: bit 4 appears when going from 3 to 4 kept bits
  std::uint32_t raw = recompose({0, 127, 0b1011011}, bf16);
  std::vector<std::uint32_t> rv{raw};
  std::vector<float> g{1.0f};
  // delta = 0b0001000 = 8, value scale 2^(127-127-7)
  double expect = 8.0 * std::ldexp(1.0, -7);
  CHECK(gradient_data_term(rv, g, 3.5, bf16) == doctest::Approx(expect));
  // negative value flips the contribution
  rv[0] = recompose({1, 127, 0b1011011}, bf16);
  CHECK(gradient_data_term(rv, g, 3.5, bf16) == doctest::Approx(-expect));
  // doubling the exponent scale doubles the gradient
  rv[0] = recompose({0, 128, 0b1011011}, bf16);
  CHECK(gradient_data_term(rv, g, 3.5, bf16) == doctest::Approx(2 * expect));
}

TEST_CASE("subnormals scale like exponent one") {
  auto fp32 = FloatFormat::fp32();
  std::vector<std::uint32_t> rv{recompose({0, 0, 0x600000}, fp32)};
  std::vector<float> g{1.0f};
  // floor(n)=1 reveals mantissa bit 2: delta 2^21, scale 2^(1-127-23)
  double expect = std::ldexp(1.0, 21) * std::ldexp(1.0, 1 - 127 - 23);
  CHECK(gradient_data_term(rv, g, 1.25, fp32) == doctest::Approx(expect));
}

TEST_CASE("gradient saturates at the format width") {
  auto fp32 = FloatFormat::fp32();
  std::vector<std::uint32_t> rv{to_raw(1.9999999f, fp32)};
  std::vector<float> g{5.0f};
  CHECK(gradient_data_term(rv, g, 23.0, fp32) == 0.0);
  // values exact at floor(n) bits contribute nothing
  std::vector<std::uint32_t> exact{to_raw(1.5f, fp32)};
  CHECK(gradient_data_term(exact, g, 4.0, fp32) == 0.0);
  BitlengthParam p;
  p.lambda = 0.25;
  p.n = 23.0;
  CHECK(gradient(p, exact, g, fp32, 0.1) == doctest::Approx(0.025));
}

TEST_CASE("two-point expectation matches the analytic slope") {
  auto fp32 = FloatFormat::fp32();
  CounterRng rng(808, 0);
  const int n_vals = 64;
  std::vector<std::uint32_t> rv(n_vals);
  std::vector<float> coef(n_vals);
  for (int i = 0; i < n_vals; ++i) {
    rv[i] = to_raw(static_cast<float>(rng.normal() * 4.0), fp32);
    coef[i] = static_cast<float>(rng.normal());
  }
  auto loss_at = [&](int w) {
    double s = 0;
    for (int i = 0; i < n_vals; ++i)
      s += coef[i] * from_raw(quantize_value(rv[i], w, fp32), fp32);
    return s;
  };
  double n = 3.5;
  // linear loss: E[L](n) interpolates the two integer widths, so the exact
  // slope is L(4) - L(3)
  double exact_slope = loss_at(4) - loss_at(3);
  CHECK(gradient_data_term(rv, coef, n, fp32) == doctest::Approx(exact_slope));

  // Monte-Carlo finite difference over the stochastic width draw
  auto mc_loss = [&](double nn, int draws, std::uint64_t stream) {
    CounterRng r(4242, stream);
    double acc = 0;
    for (int d = 0; d < draws; ++d) acc += loss_at(stochastic_bitlength(nn, 23, r));
    return acc / draws;
  };
  double fd = (mc_loss(n + 0.25, 20000, 1) - mc_loss(n - 0.25, 20000, 1)) / 0.5;
  CHECK(fd == doctest::Approx(exact_slope).epsilon(0.1));
}

TEST_CASE("step clips and respects freezing") {
  BitlengthParam p;
  p.n = 0.05;
  step(p, 100.0, 0.1, 23);
  CHECK(p.n == 0.0);
  p.n = 1.5;
  step(p, -1.0, 0.1, 23);
  CHECK(p.n == doctest::Approx(1.6));
  step(p, 0.0, 0.1, 23);
  CHECK(p.n == doctest::Approx(1.6));
  p.n = 22.8;
  step(p, -100.0, 1.0, 23);
  CHECK(p.n == 23.0);
  p.frozen = true;
  step(p, 100.0, 1.0, 23);
  CHECK(p.n == 23.0);
  CHECK_THROWS_AS(step(p, 1.0, 0.0, 23), std::invalid_argument);
}

TEST_CASE("finalize rounds up and freezes") {
  std::vector<BitlengthParam> ps(3);
  ps[0].n = 1.2;
  ps[1].n = 3.0;
  ps[2].n = 0.0;
  finalize(ps);
  CHECK(ps[0].n == 2.0);
  CHECK(ps[1].n == 3.0);
  CHECK(ps[2].n == 0.0);
  for (const auto& p : ps) CHECK(p.frozen);
}

TEST_CASE("gamma schedule steps down at thirds") {
  auto sched = Config::default_schedule(90);
  CHECK(gamma_at(sched, 0) == 0.1);
  CHECK(gamma_at(sched, 29) == 0.1);
  CHECK(gamma_at(sched, 30) == 0.01);
  CHECK(gamma_at(sched, 59) == 0.01);
  CHECK(gamma_at(sched, 60) == 0.001);
  CHECK(gamma_at(sched, 89) == 0.001);
  CHECK(gamma_at({}, 5) == 0.0);
}

TEST_CASE("controller drives widths from full precision downwards") {
  Config cfg;
  cfg.lr = 1.0;
  cfg.schedule = {{0, 0.1}};
  cfg.finalize_epoch = 10;
  std::vector<BitlengthParam> ps(2);
  ps[0].name = "a";
  ps[0].element_count = 100;
  ps[1].name = "b";
  ps[1].element_count = 300;
  auto fp32 = FloatFormat::fp32();
  Controller ctl(cfg, ps, fp32);
  CHECK(ctl.params()[0].n == 23.0);

  CounterRng rng(1, 0);
  CHECK(ctl.draw_width(0, rng) == 23);

  // pure penalty pressure shrinks n by lr * gamma * lambda per step
  std::vector<std::uint32_t> rv{to_raw(1.0f, fp32)};
  std::vector<float> g{0.0f};
  ctl.update(0, rv, g, 0);
  CHECK(ctl.params()[0].n == doctest::Approx(23.0 - 1.0 * 0.1 * 0.25));
  ctl.update(1, rv, g, 0);
  CHECK(ctl.params()[1].n == doctest::Approx(23.0 - 1.0 * 0.1 * 0.75));

  ctl.maybe_finalize(5);
  CHECK_FALSE(ctl.finalized());
  ctl.maybe_finalize(10);
  CHECK(ctl.finalized());
  CHECK(ctl.params()[0].n == 23.0); // ceil(22.975)
  double before = ctl.params()[0].n;
  ctl.update(0, rv, g, 11);
  CHECK(ctl.params()[0].n == before);
  CHECK(ctl.draw_width(0, rng) == 23);
}

} // TEST_SUITE
