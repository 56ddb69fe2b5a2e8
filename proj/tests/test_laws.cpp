#include <cmath>
#include <map>

#include "doctest.h"
#include "gwdual/grid.hpp"
#include "gwdual/laws.hpp"

using namespace gwdual;

namespace {

ProbTable table_of(std::vector<double> p, double tail = 0.0) {
  ProbTable t;
  t.probs = std::move(p);
  t.tail_ratio = tail;
  return t;
}

std::vector<OffspringLawSpec> all_families() {
  return {
      OffspringLawSpec::iid_gw(table_of({0.3, 0.4, 0.2, 0.1})),
      OffspringLawSpec::iid_gw(table_of({0.5, 0.25}, 0.5)),
      OffspringLawSpec::linear_fractional(0.6, 0.8),
      OffspringLawSpec::parity_lf(0.5),
      OffspringLawSpec::pure_death(0.35),
      OffspringLawSpec::bounded_gw(table_of({0.2, 0.5, 0.3}), {3, 2, 4}, 0),
      OffspringLawSpec::eternal_particle(table_of({0.0, 0.6, 0.4}), table_of({0.4, 0.6})),
      OffspringLawSpec::carrying_capacity({2.0, 1.5, 1.2, 0.9, 0.6, 0.5},
                                          CarryingCapacityLaw::Kind::Poisson),
      OffspringLawSpec::carrying_capacity({2.0, 1.5, 0.8, 0.5},
                                          CarryingCapacityLaw::Kind::LinearFractional),
  };
}

}  // namespace

TEST_CASE("pgf closed forms") {
  const auto lf = OffspringLawSpec::linear_fractional(0.5, 1.0);
  CHECK(lf.pgf(0, 1, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const auto lf2 = OffspringLawSpec::linear_fractional(0.7, 0.4);
  CHECK(lf2.pgf(0, 1, 0.0) == doctest::Approx(0.6).epsilon(1e-12));
  for (const auto& law : all_families()) {
    for (Rank x : {Rank{1}, Rank{2}, Rank{5}}) {
      CHECK(law.pgf(0, x, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
      // Non-decreasing and convex on a spot grid.
      double prev = law.pgf(0, x, 0.0);
      double prev_slope = -1e300;
      for (double s = 0.1; s <= 0.9001; s += 0.1) {
        const double cur = law.pgf(0, x, s);
        CHECK(cur >= prev - 1e-12);
        const double slope = (cur - prev) / 0.1;
        CHECK(slope >= prev_slope - 1e-9);
        prev_slope = slope;
        prev = cur;
      }
    }
  }
  CHECK_THROWS_AS(lf.pgf(0, 1, 1.5), DomainError);
  CHECK_THROWS_AS(lf.pgf(0, 1, -0.1), DomainError);
}

TEST_CASE("deterministic sampling special cases") {
  RngStream rng(77);
  const auto dead = OffspringLawSpec::pure_death(1.0);
  const auto parity = OffspringLawSpec::parity_lf(0.3);
  for (int i = 0; i < 200; ++i) {
    CHECK(dead.sample(0, 1, rng) == 0);
    CHECK(parity.sample(0, 2, rng) == 0);
    CHECK(parity.sample(0, 4, rng) == 0);
    CHECK(parity.sample(0, 3, rng) >= 1);
  }
  const auto eternal =
      OffspringLawSpec::eternal_particle(table_of({0.0, 0.6, 0.4}), table_of({0.4, 0.6}));
  for (int i = 0; i < 200; ++i) CHECK(eternal.sample(0, 1, rng) >= 1);
}

TEST_CASE("linear-fractional sampler matches its mass function") {
  const auto lf = OffspringLawSpec::linear_fractional(0.5, 1.0);
  const int n = 100000;
  std::map<Rank, int> counts;
  RngStream rng(2024);
  for (int i = 0; i < n; ++i) counts[lf.sample(0, 1, rng)] += 1;
  for (Rank k = 1; k <= 6; ++k) {
    const double expected = std::pow(0.5, static_cast<double>(k));
    const double observed = static_cast<double>(counts[k]) / n;
    const double se = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::abs(observed - expected) <= 3.0 * se + 1e-9);
  }
}

TEST_CASE("sampled means match pgf derivatives at one") {
  const int n = 100000;
  for (const auto& law : all_families()) {
    for (Rank x : {Rank{1}, Rank{2}, Rank{3}}) {
      RngStream rng(4096 + x);
      double sum = 0.0, sumsq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double v = static_cast<double>(law.sample(1, x, rng));
        sum += v;
        sumsq += v * v;
      }
      const double mean = sum / n;
      const double sd = std::sqrt(std::max(sumsq / n - mean * mean, 1e-12));
      const double analytic = law.mean(1, x);
      CHECK(std::abs(mean - analytic) <= 4.0 * sd / std::sqrt(double(n)) + 1e-9);
    }
  }
}

TEST_CASE("geometric-tail tables behave like their closed forms") {
  const auto t = table_of({0.5, 0.25}, 0.5);  // P_k = 0.5^{k+1}
  t.validate();
  CHECK(t.prob(3) == doctest::Approx(0.0625).epsilon(1e-12));
  CHECK(t.mean() == doctest::Approx(1.0).epsilon(1e-12));
  // This law is linear-fractional with p = q = 0.5.
  const LfParams lf{0.5, 0.5};
  for (double s = 0.0; s <= 1.0001; s += 0.25) {
    CHECK(t.pgf(s) == doctest::Approx(lf.pgf(s)).epsilon(1e-12));
  }
  RngStream rng(555);
  double sum = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) sum += static_cast<double>(t.sample(rng));
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("varying-environment composition") {
  const auto identity = OffspringLawSpec::identity_law();
  CHECK(ve_pgf_compose(identity, 0, 5, 0.3, 2) == doctest::Approx(0.09).epsilon(1e-12));

  const auto lf = OffspringLawSpec::linear_fractional(0.5, 1.0);
  CHECK(ve_pgf_compose(lf, 0, 1, 0.4, 1) == doctest::Approx(lf.pgf(0, 1, 0.4)).epsilon(1e-12));
  // Two steps at s = 0: f(f(0)) = f(0) = 0 because the law has no mass at 0.
  CHECK(ve_pgf_compose(lf, 0, 2, 0.0, 1) == doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(ve_pgf_compose(OffspringLawSpec::parity_lf(0.5), 0, 2, 0.5, 1),
                  NotRankIndependent);
}

TEST_CASE("trajectories agree with the composed pgf in varying environment") {
  const auto law = OffspringLawSpec::iid_gw(table_of({0.4, 0.3, 0.3}));
  const Time horizon = 4;
  const Rank z = 2;
  const int n = 30000;
  for (double s : {0.2, 0.5, 0.8}) {
    double sum = 0.0, sumsq = 0.0;
    int used = 0;
    for (int i = 0; i < n; ++i) {
      const auto grid = sample_grid(law, 0, horizon, 48, 900000 + i);
      const auto traj = simulate_trajectory(grid, 0, z, horizon);
      if (traj.truncated) continue;  // negligible at this width
      const double v = std::pow(s, static_cast<double>(traj.final_state()));
      sum += v;
      sumsq += v * v;
      ++used;
    }
    const double mean = sum / used;
    const double sd = std::sqrt(std::max(sumsq / used - mean * mean, 1e-12));
    const double predicted = ve_pgf_compose(law, 0, horizon, s, z);
    CHECK(std::abs(mean - predicted) <= 4.0 * sd / std::sqrt(double(used)) + 1e-9);
  }
}

TEST_CASE("carrying capacity is computed and validated") {
  const auto law = OffspringLawSpec::carrying_capacity({2.0, 1.5, 1.2, 0.9, 0.6, 0.5},
                                                       CarryingCapacityLaw::Kind::Poisson);
  const auto& cc = std::get<CarryingCapacityLaw>(law.variant());
  CHECK(cc.capacity == 7);
  // Defining inequalities on both sides of the capacity.
  double cum = 0.0;
  for (Rank x = 1; x <= cc.capacity + 5; ++x) {
    cum += cc.mean_at(x);
    if (x <= cc.capacity) {
      CHECK(cum >= static_cast<double>(x));
    } else {
      CHECK(cum < static_cast<double>(x));
    }
  }
  const auto in_schedule =
      OffspringLawSpec::carrying_capacity({1.5, 0.4, 0.4}, CarryingCapacityLaw::Kind::Poisson);
  CHECK(std::get<CarryingCapacityLaw>(in_schedule.variant()).capacity == 1);

  CHECK_THROWS_AS(
      OffspringLawSpec::carrying_capacity({0.9, 0.5}, CarryingCapacityLaw::Kind::Poisson),
      InvalidLaw);
  CHECK_THROWS_AS(
      OffspringLawSpec::carrying_capacity({2.0, 2.5}, CarryingCapacityLaw::Kind::Poisson),
      InvalidLaw);
  CHECK_THROWS_AS(
      OffspringLawSpec::carrying_capacity({2.0, 1.5}, CarryingCapacityLaw::Kind::Poisson),
      InvalidLaw);
}

TEST_CASE("bounded reproduction switches off above the bound") {
  const auto law = OffspringLawSpec::bounded_gw(table_of({0.2, 0.5, 0.3}), {3, 2}, 0);
  for (double s : {0.0, 0.5, 1.0}) {
    CHECK(law.pgf(0, 3, s) == doctest::Approx(table_of({0.2, 0.5, 0.3}).pgf(s)));
    CHECK(law.pgf(0, 4, s) == doctest::Approx(1.0));
    CHECK(law.pgf(1, 3, s) == doctest::Approx(1.0));  // bound drops to 2 at t = 1
  }
  RngStream rng(31);
  for (int i = 0; i < 100; ++i) CHECK(law.sample(1, 3, rng) == 0);
}

TEST_CASE("eternal-particle rank-1 pgf is s times the immigrant pgf") {
  const auto law =
      OffspringLawSpec::eternal_particle(table_of({0.0, 0.7, 0.3}), table_of({0.4, 0.6}));
  const auto g = table_of({0.7, 0.3});
  for (double s = 0.0; s <= 1.0001; s += 0.2) {
    CHECK(law.pgf(0, 1, s) == doctest::Approx(s * g.pgf(s)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(
      OffspringLawSpec::eternal_particle(table_of({0.1, 0.6, 0.3}), table_of({0.4, 0.6})),
      InvalidLaw);
}

TEST_CASE("law specs round-trip through json") {
  for (const auto& law : all_families()) {
    const Json j = law.to_json();
    const auto back = OffspringLawSpec::from_json(j);
    CHECK(back.to_json().dump() == j.dump());  // normalization is idempotent
    CHECK(back.family() == law.family());
  }
  CHECK_THROWS_AS(OffspringLawSpec::iid_gw(table_of({0.5, 0.4})), InvalidLaw);
  CHECK_THROWS_AS(OffspringLawSpec::linear_fractional(0.0, 0.5), InvalidLaw);
}

TEST_CASE("rank independence classification") {
  CHECK(OffspringLawSpec::iid_gw(table_of({0.5, 0.5})).rank_independent(0));
  CHECK(OffspringLawSpec::linear_fractional(0.5, 0.5).rank_independent(3));
  CHECK(!OffspringLawSpec::parity_lf(0.5).rank_independent(0));
  CHECK(OffspringLawSpec::pure_death(0.2).rank_independent(0));
  CHECK(!OffspringLawSpec::pure_death_ranks({0.2, 0.3}).rank_independent(0));
  CHECK(!OffspringLawSpec::bounded_gw(table_of({0.5, 0.5}), {4}, 0).rank_independent(0));
}
