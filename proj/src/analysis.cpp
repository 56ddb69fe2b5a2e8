#include "gwdual/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gwdual/parallel.hpp"
#include "gwdual/rng.hpp"

namespace gwdual {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

/// P(Bin(trials, psucc) <= x - 1), evaluated in log space.
double binomial_lt(std::size_t trials, double psucc, Rank x) {
  if (psucc >= 1.0) return x > trials ? 1.0 : 0.0;
  if (psucc <= 0.0) return 1.0;
  const double n = static_cast<double>(trials);
  const double lp = std::log(psucc);
  const double lq = std::log1p(-psucc);
  double total = 0.0;
  for (Rank j = 0; j < x && j <= trials; ++j) {
    const double k = static_cast<double>(j);
    const double lchoose =
        std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
    total += std::exp(lchoose + k * lp + (n - k) * lq);
  }
  return total;
}

/// Smallest window so that fewer than max_rank positive draws among the
/// window's cells has probability below target.
std::size_t size_window(double p_positive, Rank max_rank, double target) {
  if (p_positive <= 0.0) throw DegenerateLaw("law never produces offspring");
  std::size_t w = std::max<std::size_t>(max_rank, 8);
  const std::size_t limit = 1u << 21;
  while (w < limit && binomial_lt(w, p_positive, max_rank) >= target) w *= 2;
  if (binomial_lt(w, p_positive, max_rank) >= target) {
    throw WindowTooSmall("cannot reach the truncation target within the window limit");
  }
  std::size_t lo = std::max<std::size_t>(max_rank, 8), hi = w;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (binomial_lt(mid, p_positive, max_rank) < target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return hi;
}

/// Dual values v(1..m) of an offspring prefix whose cumulative sums reach
/// level m (naive minimum scan, independent of the duality module).
std::vector<Rank> dualize_prefix(const std::vector<Rank>& u, Rank m) {
  std::vector<Rank> v(m);
  Rank y = 0;
  Rank cum = 0;
  Rank prev = 0;
  for (Rank level = 1; level <= m; ++level) {
    while (cum < level) {
      cum += u[y];
      ++y;
    }
    v[level - 1] = y - prev;
    prev = y;
  }
  return v;
}

CheckResult chi_check(const std::string& claim, const GofResult& gof, double alpha) {
  CheckResult r;
  r.claim = claim;
  r.kind = "chi_square";
  r.statistic = gof.statistic;
  r.dof = gof.dof;
  r.p_value = gof.p_value;
  r.pass = gof.degenerate ? gof.p_value == 1.0 : gof.p_value >= alpha;
  return r;
}

CheckResult stderr_check(const std::string& claim, double observed, double expected,
                         std::uint64_t n, bool gated = true) {
  CheckResult r;
  r.claim = claim;
  r.kind = "stderr";
  r.observed = observed;
  r.expected = expected;
  r.gated = gated;
  const double se = std::sqrt(std::max(expected * (1.0 - expected), 0.0) /
                              static_cast<double>(n));
  r.tolerance = 4.0 * se + 1e-9;
  r.pass = std::abs(observed - expected) <= *r.tolerance;
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// q_hat recursion and the closed-form dual marginal

QHatSchedule qhat_recursion(const GwLawTable& law, Rank max_rank) {
  law.validate();
  const double p0 = law.p0();
  if (p0 >= 1.0 - kProbTol) throw DegenerateLaw("recursion undefined when P_0 = 1");
  QHatSchedule schedule;
  schedule.values.resize(max_rank);
  schedule.values[0] = 1.0;
  for (Rank x = 2; x <= max_rank; ++x) {
    double sum = 0.0;
    for (Rank k = 1; k < x; ++k) {
      sum += law.prob(k) * schedule.values[x - k - 1];
    }
    schedule.values[x - 1] = sum / (1.0 - p0);
  }
  return schedule;
}

double dual_marginal_prob(double p0, double qhat_x, Rank k) {
  if (k == 0) return 1.0 - qhat_x;
  if (k == 1) return qhat_x * (1.0 - p0);
  return qhat_x * (1.0 - p0) * std::pow(p0, static_cast<double>(k - 1));
}

// ---------------------------------------------------------------------------
// Brute-force oracle

double BruteForceDualPmf::marginal(Rank x, Rank k) const {
  const auto& m = marginals.at(x - 1);
  const auto it = m.find(k);
  return it == m.end() ? 0.0 : it->second;
}

double BruteForceDualPmf::joint_pair(Rank i, Rank ki, Rank j, Rank kj) const {
  double total = 0.0;
  for (const auto& [tuple, prob] : joint) {
    if (tuple.at(i - 1) == ki && tuple.at(j - 1) == kj) total += prob;
  }
  return total;
}

BruteForceDualPmf brute_force_dual_pmf(const GwLawTable& law, Rank max_rank,
                                       std::size_t window) {
  law.validate();
  if (!law.finite_support()) {
    throw EnumerationOverflow("enumeration requires a finite-support table");
  }
  if (max_rank < 1 || window < 1) throw DomainError("enumeration needs max_rank, window >= 1");
  const std::size_t k_max = law.probs.size() - 1;
  const double states = std::pow(static_cast<double>(k_max + 1),
                                 static_cast<double>(window));
  if (states > 1e7) {
    throw EnumerationOverflow("enumeration would need " + fmt(states) + " states");
  }

  BruteForceDualPmf result;
  result.max_rank = max_rank;
  result.window = window;
  result.marginals.resize(max_rank);
  result.accounted.assign(max_rank, 0.0);

  std::vector<Rank> prefix;
  prefix.reserve(window);

  // Depth-first walk over offspring tuples. Once the cumulative sum reaches
  // max_rank the remaining coordinates cannot change v(1..max_rank), so the
  // subtree's entire mass is attributed at once.
  auto record = [&](double prob, Rank cum) {
    const Rank m = std::min<Rank>(max_rank, cum);
    if (m == 0) return;
    const std::vector<Rank> v = dualize_prefix(prefix, m);
    for (Rank x = 1; x <= m; ++x) {
      result.marginals[x - 1][v[x - 1]] += prob;
      result.accounted[x - 1] += prob;
    }
    if (m == max_rank) {
      result.joint[v] += prob;
      result.joint_accounted += prob;
    }
  };

  auto walk = [&](auto&& self, double prob, Rank cum) -> void {
    if (cum >= max_rank || prefix.size() == window) {
      record(prob, cum);
      return;
    }
    for (Rank k = 0; k <= k_max; ++k) {
      const double pk = law.probs[k];
      if (pk == 0.0) continue;
      prefix.push_back(k);
      self(self, prob * pk, cum + k);
      prefix.pop_back();
    }
  };
  walk(walk, 1.0, 0);
  return result;
}

// ---------------------------------------------------------------------------
// Monte Carlo dual marginals

McDualMarginals mc_dual_marginals(const GwLawTable& law, Rank max_rank, std::uint64_t n,
                                  std::uint64_t seed, double trunc_target) {
  law.validate();
  if (n < 10000) throw DomainError("mc_dual_marginals needs at least 10^4 samples");
  if (max_rank < 1) throw DomainError("mc_dual_marginals needs max_rank >= 1");
  const double p_positive = 1.0 - law.p0();
  const std::size_t window = size_window(p_positive, max_rank, trunc_target);

  McDualMarginals mc;
  mc.max_rank = max_rank;
  mc.window = window;
  mc.counts.resize(max_rank);

  struct Tally {
    std::uint64_t kept = 0;
    std::uint64_t discarded = 0;
    std::vector<std::map<Rank, std::uint64_t>> counts;
    std::map<std::pair<Rank, Rank>, std::uint64_t> j13, j23, j24;
  };
  const std::size_t chunks =
      std::min<std::size_t>(static_cast<std::size_t>(thread_limit()) * 4,
                            std::max<std::size_t>(1, n / 4096));
  const std::uint64_t per_chunk = (n + chunks - 1) / chunks;
  std::vector<Tally> tallies(chunks);

  parallel_for(chunks, [&](std::size_t c) {
    Tally& tally = tallies[c];
    tally.counts.resize(max_rank);
    const std::uint64_t lo = c * per_chunk;
    const std::uint64_t hi = std::min<std::uint64_t>(n, lo + per_chunk);
    std::vector<Rank> u;
    u.reserve(window);
    for (std::uint64_t rep = lo; rep < hi; ++rep) {
      RngStream rng = RngStream::from_words(seed, stream_tag::kReplicate, rep, 0);
      u.clear();
      Rank cum = 0;
      while (cum < max_rank && u.size() < window) {
        const Rank k = law.sample(rng);
        u.push_back(k);
        cum += k;
      }
      if (cum < max_rank) {
        ++tally.discarded;
        continue;
      }
      ++tally.kept;
      const std::vector<Rank> v = dualize_prefix(u, max_rank);
      for (Rank x = 1; x <= max_rank; ++x) tally.counts[x - 1][v[x - 1]] += 1;
      if (max_rank >= 3) {
        tally.j13[{v[0], v[2]}] += 1;
        tally.j23[{v[1], v[2]}] += 1;
      }
      if (max_rank >= 4) tally.j24[{v[1], v[3]}] += 1;
    }
  });

  for (const Tally& tally : tallies) {
    mc.kept += tally.kept;
    mc.discarded += tally.discarded;
    for (Rank x = 1; x <= max_rank; ++x) {
      for (const auto& [k, c] : tally.counts[x - 1]) mc.counts[x - 1][k] += c;
    }
    for (const auto& [k, c] : tally.j13) mc.joint13[k] += c;
    for (const auto& [k, c] : tally.j23) mc.joint23[k] += c;
    for (const auto& [k, c] : tally.j24) mc.joint24[k] += c;
  }
  if (mc.discarded * 100 > n) {
    throw WindowTooSmall("more than 1% of samples truncated at window " +
                         std::to_string(window));
  }
  return mc;
}

// ---------------------------------------------------------------------------
// Reports

Json CheckResult::to_json() const {
  Json j;
  j["claim"] = claim;
  j["kind"] = kind;
  if (statistic) j["statistic"] = *statistic;
  if (dof) j["dof"] = *dof;
  if (p_value) j["p_value"] = *p_value;
  if (observed) j["observed"] = *observed;
  if (expected) j["expected"] = *expected;
  if (tolerance) j["tolerance"] = *tolerance;
  j["gated"] = gated;
  j["pass"] = pass;
  return j;
}

void AnalysisReport::add(CheckResult r) {
  if (r.gated) pass = pass && r.pass;
  checks.push_back(std::move(r));
}

Json AnalysisReport::to_json() const {
  Json j;
  j["name"] = name;
  j["params"] = params;
  Json arr = Json::array();
  for (const auto& c : checks) arr.push_back(c.to_json());
  j["checks"] = std::move(arr);
  j["pass"] = pass;
  return j;
}

// ---------------------------------------------------------------------------
// Statistical suites

AnalysisReport theorem2_check(double p, double q, Rank max_rank, std::uint64_t n,
                              std::uint64_t seed, double alpha) {
  LfParams lf{p, q};
  lf.validate();
  if (max_rank < 4) throw DomainError("theorem2_check needs max_rank >= 4");

  AnalysisReport report;
  report.name = "theorem2";
  const McDualMarginals mc = mc_dual_marginals(lf.to_table(), max_rank, n, seed, 1e-6);
  const int m = static_cast<int>(max_rank) + 2;  // fits + two independence tests
  const double alpha_b = alpha / m;
  report.params = Json{{"p", p},        {"q", q},           {"samples", n},
                       {"seed", seed},  {"alpha", alpha},   {"bonferroni_tests", m},
                       {"window", mc.window}, {"discarded", mc.discarded}};

  const LfParams dual_v1{q, 1.0};  // geometric on {1,2,...} with success q
  report.add(chi_check("v(1) fits the geometric law with success q",
                       chi_square_gof(mc.counts[0],
                                      [&](Rank k) { return dual_v1.prob(k); }, mc.kept),
                       alpha_b));
  const LfParams dual_vx{q, p};  // mass 1-p at zero, then geometric(q)
  for (Rank x = 2; x <= max_rank; ++x) {
    report.add(chi_check("v(" + std::to_string(x) + ") fits the linear-fractional dual law",
                         chi_square_gof(mc.counts[x - 1],
                                        [&](Rank k) { return dual_vx.prob(k); }, mc.kept),
                         alpha_b));
  }

  for (const auto& [claim, joint] :
       {std::pair{"(v(2),v(3)) are independent", &mc.joint23},
        std::pair{"(v(2),v(4)) are independent", &mc.joint24}}) {
    const IndependenceResult ind = chi_square_independence(*joint, mc.kept);
    CheckResult r;
    r.claim = claim;
    r.kind = "chi_square";
    r.statistic = ind.statistic;
    r.dof = ind.dof;
    r.p_value = ind.p_value;
    r.pass = ind.dof == 0 || ind.p_value >= alpha_b;
    report.add(std::move(r));
  }
  return report;
}

AnalysisReport dual_independence_check(const GwLawTable& law, std::uint64_t n,
                                       std::uint64_t seed, double alpha) {
  AnalysisReport report;
  report.name = "dual_independence";
  const McDualMarginals mc = mc_dual_marginals(law, 3, n, seed, 1e-6);
  report.params = Json{{"samples", n}, {"seed", seed}, {"alpha", alpha},
                       {"window", mc.window}, {"discarded", mc.discarded}};
  const IndependenceResult ind = chi_square_independence(mc.joint23, mc.kept);
  CheckResult r;
  r.claim = "(v(2),v(3)) are independent";
  r.kind = "chi_square";
  r.statistic = ind.statistic;
  r.dof = ind.dof;
  r.p_value = ind.p_value;
  r.pass = ind.p_value >= alpha;
  report.add(std::move(r));
  return report;
}

AnalysisReport dual_marginals_check(const GwLawTable& law, Rank max_rank, std::uint64_t n,
                                    std::uint64_t seed) {
  AnalysisReport report;
  report.name = "dual_marginals";
  const QHatSchedule qhat = qhat_recursion(law, max_rank);
  const McDualMarginals mc = mc_dual_marginals(law, max_rank, n, seed, 1e-6);
  report.params = Json{{"samples", n}, {"seed", seed}, {"window", mc.window},
                       {"discarded", mc.discarded}};
  const double p0 = law.p0();
  for (Rank x = 1; x <= max_rank; ++x) {
    // Compare cells with enough expected mass; the remainder is pooled.
    double max_z = 0.0;
    double pooled_expected = 0.0;
    std::uint64_t pooled_observed = mc.kept;
    for (Rank k = 0;; ++k) {
      const double expected = dual_marginal_prob(p0, qhat.at(x), k);
      if (expected * static_cast<double>(mc.kept) < 25.0) {
        pooled_expected = 1.0;
        for (Rank kk = 0; kk < k; ++kk) {
          pooled_expected -= dual_marginal_prob(p0, qhat.at(x), kk);
        }
        break;
      }
      const auto it = mc.counts[x - 1].find(k);
      const std::uint64_t count = it == mc.counts[x - 1].end() ? 0 : it->second;
      pooled_observed -= count;
      const double observed = static_cast<double>(count) / static_cast<double>(mc.kept);
      const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(mc.kept));
      max_z = std::max(max_z, std::abs(observed - expected) / std::max(se, 1e-300));
    }
    if (pooled_expected * static_cast<double>(mc.kept) >= 5.0) {
      const double observed =
          static_cast<double>(pooled_observed) / static_cast<double>(mc.kept);
      const double se =
          std::sqrt(pooled_expected * (1.0 - pooled_expected) / static_cast<double>(mc.kept));
      max_z = std::max(max_z, std::abs(observed - pooled_expected) / std::max(se, 1e-300));
    }
    CheckResult r;
    r.claim = "v(" + std::to_string(x) + ") marginal matches the closed-form dual law";
    r.kind = "stderr";
    r.statistic = max_z;
    r.tolerance = 4.0;
    r.pass = max_z <= 4.0;
    report.add(std::move(r));
  }
  return report;
}

AnalysisReport birthdeath_subcases_check(double p0, double p1, double p2, std::uint64_t n,
                                         std::uint64_t seed, double alpha) {
  if (p0 < 0 || p1 < 0 || p2 < 0 || std::abs(p0 + p1 + p2 - 1.0) > kProbTol) {
    throw InvalidLaw("birth-death weights must be non-negative and sum to 1");
  }
  GwLawTable table;
  table.probs = {p0, p1, p2};

  AnalysisReport report;
  report.name = "birthdeath_subcases";
  report.params = Json{{"p0", p0}, {"p1", p1}, {"p2", p2}, {"samples", n}, {"seed", seed},
                       {"alpha", alpha}};

  if (p2 == 0.0) {
    report.params["subcase"] = "p2=0";
    const McDualMarginals mc = mc_dual_marginals(table, 3, n, seed, 1e-6);
    const LfParams shifted{1.0 - p0, 1.0};  // P(v = k) = p0^{k-1} (1 - p0)
    const double alpha_b = alpha / 3.0;
    for (Rank x = 1; x <= 3; ++x) {
      report.add(chi_check(
          "v(" + std::to_string(x) + ") fits the shifted-geometric law with ratio p0",
          chi_square_gof(mc.counts[x - 1], [&](Rank k) { return shifted.prob(k); }, mc.kept),
          alpha_b));
    }
    return report;
  }

  if (p1 == 0.0) {
    report.params["subcase"] = "p1=0";
    const McDualMarginals mc = mc_dual_marginals(table, 4, n, seed, 1e-6);
    const LfParams odd_law{1.0 - p0, 1.0};
    const double alpha_b = alpha / 2.0;
    for (Rank x : {Rank{1}, Rank{3}}) {
      report.add(chi_check(
          "v(" + std::to_string(x) + ") fits the odd-rank parity law (success 1 - p0)",
          chi_square_gof(mc.counts[x - 1], [&](Rank k) { return odd_law.prob(k); }, mc.kept),
          alpha_b));
    }
    for (Rank x : {Rank{2}, Rank{4}}) {
      CheckResult r;
      r.claim = "v(" + std::to_string(x) + ") is exactly zero";
      r.kind = "exact";
      std::uint64_t nonzero = 0;
      for (const auto& [k, c] : mc.counts[x - 1]) {
        if (k != 0) nonzero += c;
      }
      r.observed = static_cast<double>(nonzero);
      r.expected = 0.0;
      r.pass = nonzero == 0;
      report.add(std::move(r));
    }
    return report;
  }

  if (p0 == 0.0) {
    report.params["subcase"] = "p0=0";
    const McDualMarginals mc = mc_dual_marginals(table, 3, n, seed, 1e-6);
    const auto joint = [&](const std::map<std::pair<Rank, Rank>, std::uint64_t>& m, Rank a,
                           Rank b) {
      const auto it = m.find({a, b});
      return it == m.end() ? 0.0
                           : static_cast<double>(it->second) / static_cast<double>(mc.kept);
    };
    CheckResult eternal;
    eternal.claim = "v(1) = 1 with probability one";
    eternal.kind = "exact";
    std::uint64_t off = 0;
    for (const auto& [k, c] : mc.counts[0]) {
      if (k != 1) off += c;
    }
    eternal.observed = static_cast<double>(off);
    eternal.expected = 0.0;
    eternal.pass = off == 0;
    report.add(std::move(eternal));

    report.add(stderr_check("P(v(2)=0, v(3)=1) = p2", joint(mc.joint23, 0, 1), p2, mc.kept));
    report.add(stderr_check("P(v(2)=1, v(3)=0) = p1*p2", joint(mc.joint23, 1, 0), p1 * p2,
                            mc.kept));
    // Quoted joint value, reported as stated but ungated: it cannot hold
    // alongside P(v(1)=1) = 1. The measurable counterpart with v(2) in place
    // of v(1) follows it, also ungated.
    report.add(stderr_check("P(v(1)=0, v(3)=1) = p1^2", joint(mc.joint13, 0, 1), p1 * p1,
                            mc.kept, /*gated=*/false));
    report.add(stderr_check("P(v(2)=1, v(3)=1) = p1^2", joint(mc.joint23, 1, 1), p1 * p1,
                            mc.kept, /*gated=*/false));
    return report;
  }

  report.params["subcase"] = "generic";
  AnalysisReport generic = dual_marginals_check(table, 4, n, seed);
  for (auto& c : generic.checks) report.add(std::move(c));
  return report;
}

}  // namespace gwdual
