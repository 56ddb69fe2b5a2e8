#include <cmath>
#include <map>

#include "doctest.h"
#include "gwdual/embedding.hpp"

using namespace gwdual;

namespace {

RateSchedule rates(double lambda, double mu) {
  return RateSchedule{PiecewiseConstantRate::constant(lambda),
                      PiecewiseConstantRate::constant(mu)};
}

}  // namespace

TEST_CASE("closed-form parameter checks") {
  // Pure birth over a unit interval.
  const auto yule = kendall_params(rates(1.0, 0.0), 0.0, 1.0);
  CHECK(yule.q == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(yule.p == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  // Pure death with rate mu over [0, t]: survival e^{-mu t}.
  const double mu = 0.7, t = 1.3;
  const auto death = kendall_params(rates(0.0, mu), 0.0, t);
  CHECK(death.q == doctest::Approx(std::exp(-mu * t)).epsilon(1e-10));
  CHECK(death.p == doctest::Approx(1.0).epsilon(1e-10));

  // Critical case: q = p = 1 / (1 + mu t), no singularity.
  const auto critical = kendall_params(rates(0.8, 0.8), 0.0, 2.0);
  CHECK(critical.rho == doctest::Approx(0.0));
  CHECK(critical.q == doctest::Approx(1.0 / (1.0 + 0.8 * 2.0)).epsilon(1e-10));
  CHECK(critical.p == doctest::Approx(critical.q).epsilon(1e-12));

  CHECK_THROWS_AS(kendall_params(rates(-1.0, 0.0), 0.0, 1.0), InvalidRates);
}

TEST_CASE("piecewise rates integrate exactly") {
  // mu jumps from 1 to 2 at t = 0.5, lambda = 0: closed-form survival.
  RateSchedule sched;
  sched.birth = PiecewiseConstantRate::constant(0.0);
  sched.death = PiecewiseConstantRate::parse("0:1.0,0.5:2.0");
  const auto kp = kendall_params(sched, 0.0, 1.0);
  CHECK(kp.rho == doctest::Approx(0.5 + 1.0).epsilon(1e-12));
  CHECK(kp.q == doctest::Approx(std::exp(-1.5)).epsilon(1e-10));
  CHECK(kp.p == doctest::Approx(1.0).epsilon(1e-10));

  CHECK(sched.death.at(-5.0) == 1.0);  // first value extends left
  CHECK(sched.death.at(0.75) == 2.0);
  CHECK_THROWS_AS(PiecewiseConstantRate::parse("0:1.0,0.5:-2"), InvalidRates);
}

TEST_CASE("invariants and quadrature convergence") {
  for (const auto& [lambda, mu] : {std::pair{1.0, 0.5}, std::pair{0.3, 0.9}}) {
    const auto sched = rates(lambda, mu);
    const auto kp = kendall_params(sched, 0.0, 1.7);
    CHECK(kp.p == doctest::Approx(std::exp(kp.rho) * kp.q).epsilon(1e-12));
    CHECK(kp.q > 0.0);
    CHECK(kp.q <= 1.0);
    CHECK(kp.p <= 1.0 + 1e-12);
    const auto doubled = kendall_params(sched, 0.0, 1.7, 8192);
    CHECK(std::abs(doubled.q - kp.q) < 1e-10);
  }
}

TEST_CASE("composition of unit steps matches the two-unit interval") {
  RateSchedule sched;
  sched.birth = PiecewiseConstantRate::parse("0:1.2,1.3:0.4");
  sched.death = PiecewiseConstantRate::parse("0:0.3,0.8:0.9");
  const auto step1 = kendall_params(sched, 0.0, 1.0).lf();
  const auto step2 = kendall_params(sched, 1.0, 2.0).lf();
  const auto both = kendall_params(sched, 0.0, 2.0).lf();
  for (double s = 0.0; s <= 1.0001; s += 0.125) {
    CHECK(step1.pgf(step2.pgf(s)) == doctest::Approx(both.pgf(s)).epsilon(1e-9));
  }
}

TEST_CASE("event-driven simulation hits closed-form laws") {
  // Absorbing start.
  RngStream rng(9);
  CHECK(simulate_bd(rates(1.0, 1.0), 0.0, 5.0, 0, rng).count == 0);

  // Pure death survival within four standard errors.
  const double mu = 0.9, t = 1.1;
  const int n = 40000;
  int alive = 0;
  for (int i = 0; i < n; ++i) {
    RngStream stream = RngStream::from_words(77, stream_tag::kBirthDeath, i, 0);
    alive += simulate_bd(rates(0.0, mu), 0.0, t, 1, stream).count == 1 ? 1 : 0;
  }
  const double expected = std::exp(-mu * t);
  const double se = std::sqrt(expected * (1.0 - expected) / n);
  CHECK(std::abs(static_cast<double>(alive) / n - expected) <= 4.0 * se);

  // Pure birth over a unit interval: geometric with success e^{-1}.
  std::map<Rank, int> counts;
  for (int i = 0; i < n; ++i) {
    RngStream stream = RngStream::from_words(78, stream_tag::kBirthDeath, i, 0);
    counts[simulate_bd(rates(1.0, 0.0), 0.0, 1.0, 1, stream).count] += 1;
  }
  const double p = std::exp(-1.0);
  for (Rank k = 1; k <= 5; ++k) {
    const double pk = p * std::pow(1.0 - p, static_cast<double>(k - 1));
    const double observed = static_cast<double>(counts[k]) / n;
    const double se_k = std::sqrt(pk * (1.0 - pk) / n);
    CHECK(std::abs(observed - pk) <= 4.0 * se_k);
  }

  RngStream burst(10);
  CHECK_THROWS_AS(simulate_bd(rates(50.0, 0.0), 0.0, 2.0, 5, burst, 32), SimOverflow);

  // The event log records the exact population path.
  RngStream logged(11);
  const auto run = simulate_bd(rates(1.0, 0.6), 0.0, 2.0, 3, logged, 1000000, true);
  Rank pop = 3;
  for (const auto& [when, delta] : run.events) {
    CHECK(when >= 0.0);
    CHECK(when <= 2.0);
    pop = delta > 0 ? pop + 1 : pop - 1;
  }
  CHECK(pop == run.count);
}

TEST_CASE("unit birth-death steps match their embedded law") {
  RateSchedule sched;
  sched.birth = PiecewiseConstantRate::constant(0.8);
  sched.death = PiecewiseConstantRate::constant(0.5);
  const auto steps = embedded_lf_grid(sched, 0, 3);
  CHECK(steps.size() == 3);
  for (const auto& kp : steps) {
    CHECK(kp.q == doctest::Approx(steps.front().q).epsilon(1e-12));  // homogeneous
  }
  const LfParams lf = steps.front().lf();

  const int n = 40000;
  std::map<Rank, int> counts;
  for (int i = 0; i < n; ++i) {
    RngStream stream = RngStream::from_words(79, stream_tag::kBirthDeath, i, 0);
    counts[simulate_bd(sched, 0.0, 1.0, 1, stream).count] += 1;
  }
  for (Rank k = 0; k <= 5; ++k) {
    const double pk = lf.prob(k);
    const double observed = static_cast<double>(counts[k]) / n;
    const double se = std::sqrt(pk * (1.0 - pk) / n);
    CHECK(std::abs(observed - pk) <= 4.0 * se + 1e-9);
  }

  const auto law = embedded_lf_law(sched, 0, 3);
  CHECK(law.family() == "linear_fractional");
  CHECK(law.pgf(1, 1, 0.5) == doctest::Approx(lf.pgf(0.5)).epsilon(1e-12));
}
