#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gwdual/laws.hpp"
#include "gwdual/stats.hpp"

namespace gwdual {

using GwLawTable = ProbTable;

/// q_hat(x) = P(v(x) > 0) for the dual of an iid reproduction law.
struct QHatSchedule {
  std::vector<double> values;  // values[x-1] = q_hat(x)

  double at(Rank x) const { return values.at(x - 1); }
};

/// Exact evaluation of q_hat(1) = 1,
/// q_hat(x) = (1 - P_0)^{-1} sum_{k=1}^{x-1} P_k q_hat(x-k) for x >= 2.
/// Geometric tails are evaluated in closed form inside the sum, so tabled
/// laws with a tail need no truncation. Throws DegenerateLaw when P_0 = 1.
QHatSchedule qhat_recursion(const GwLawTable& law, Rank max_rank);

/// Closed-form marginal of the dual offspring v(x) for an iid primary law:
/// mass 1 - q_hat(x) at zero and, conditionally on a positive value, a
/// shifted geometric with ratio P_0, i.e. P(v(x) = k) = q_hat(x) (1-P_0)
/// P_0^{k-1}. (Equivalently a linear-fractional law with parameters
/// (1 - P_0, q_hat(x)).)
double dual_marginal_prob(double p0, double qhat_x, Rank k);

/// Exact enumeration oracle: walks every primary offspring tuple on a window
/// of `window` ranks, dualizes each tuple by brute force, and accumulates
/// the joint law of (v(1), ..., v(max_rank)) together with the per-rank
/// marginals. Tuples whose cumulative sums never reach level x leave v(x)
/// undetermined; their mass is the (exactly known) per-rank deficit.
struct BruteForceDualPmf {
  Rank max_rank = 0;
  std::size_t window = 0;
  std::map<std::vector<Rank>, double> joint;  // fully determined tuples only
  double joint_accounted = 0.0;
  std::vector<std::map<Rank, double>> marginals;  // [x-1] -> pmf of v(x)
  std::vector<double> accounted;                  // [x-1]

  double marginal(Rank x, Rank k) const;
  double deficit(Rank x) const { return 1.0 - accounted.at(x - 1); }
  /// Exact P(v(i) = ki, v(j) = kj) on the accounted event.
  double joint_pair(Rank i, Rank ki, Rank j, Rank kj) const;
};

/// Requires finite support and (K+1)^window <= 10^7 enumeration states.
BruteForceDualPmf brute_force_dual_pmf(const GwLawTable& law, Rank max_rank,
                                       std::size_t window);

/// Monte Carlo dual marginals: samples primary rows, dualizes them, and
/// tallies v(1..max_rank) plus the (v(2),v(3)) and (v(2),v(4)) joints. The
/// rank window is sized so the truncation probability stays below
/// trunc_target; truncated samples are discarded and counted, and more than
/// 1% of them raises WindowTooSmall. Requires n >= 10^4.
struct McDualMarginals {
  Rank max_rank = 0;
  std::size_t window = 0;
  std::uint64_t kept = 0;
  std::uint64_t discarded = 0;
  std::vector<std::map<Rank, std::uint64_t>> counts;  // [x-1]
  std::map<std::pair<Rank, Rank>, std::uint64_t> joint13;
  std::map<std::pair<Rank, Rank>, std::uint64_t> joint23;
  std::map<std::pair<Rank, Rank>, std::uint64_t> joint24;
};

McDualMarginals mc_dual_marginals(const GwLawTable& law, Rank max_rank, std::uint64_t n,
                                  std::uint64_t seed, double trunc_target = 1e-3);

/// One verdict inside an analysis report. Chi-square checks carry a
/// statistic/dof/p-value; exact and standard-error checks carry observed vs
/// expected. Ungated checks are informational and do not affect the overall
/// verdict.
struct CheckResult {
  std::string claim;
  std::string kind;  // "chi_square" | "exact" | "stderr"
  bool pass = true;
  bool gated = true;
  std::optional<double> statistic;
  std::optional<int> dof;
  std::optional<double> p_value;
  std::optional<double> observed;
  std::optional<double> expected;
  std::optional<double> tolerance;

  Json to_json() const;
};

struct AnalysisReport {
  std::string name;
  Json params;
  std::vector<CheckResult> checks;
  bool pass = true;

  void add(CheckResult r);
  Json to_json() const;
};

/// Dual of a linear-fractional law: fits v(1) to the geometric law with
/// success q, fits each v(x), x >= 2, to the linear-fractional law with
/// parameters (q, p), and tests pairwise independence of (v(2),v(3)) and
/// (v(2),v(4)). Chi-square acceptance at significance `alpha` with a
/// Bonferroni split across the sub-tests.
AnalysisReport theorem2_check(double p, double q, Rank max_rank, std::uint64_t n,
                              std::uint64_t seed, double alpha = 0.01);

/// Independence of (v(2),v(3)) for an arbitrary iid law; used as the
/// negative control against tables whose dual offspring are dependent.
AnalysisReport dual_independence_check(const GwLawTable& law, std::uint64_t n,
                                       std::uint64_t seed, double alpha = 0.01);

/// Dispatches on the zero pattern of a two-child reproduction law
/// (p0, p1, p2):
///   p2 = 0: every dual offspring is shifted-geometric with ratio p0;
///   p1 = 0: odd dual ranks are shifted-geometric with ratio p0, even dual
///           ranks are exactly zero (the parity linear-fractional law);
///   p0 = 0: joint values P(v(1)=1) = 1, P(v(2)=0,v(3)=1) = p2,
///           P(v(2)=1,v(3)=0) = p1*p2 are gated; a fourth quoted value,
///           P(v(1)=0,v(3)=1) = p1^2, is reported ungated (it conflicts with
///           P(v(1)=1) = 1; the measurable counterpart is
///           P(v(2)=1,v(3)=1) = p1^2, also reported ungated).
/// With no zero among the three, falls back to comparing Monte Carlo
/// marginals against the closed-form dual law.
AnalysisReport birthdeath_subcases_check(double p0, double p1, double p2, std::uint64_t n,
                                         std::uint64_t seed, double alpha = 0.01);

/// Monte Carlo marginals of v(1..max_rank) against the closed-form dual law
/// within four standard errors per cell.
AnalysisReport dual_marginals_check(const GwLawTable& law, Rank max_rank, std::uint64_t n,
                                    std::uint64_t seed);

}  // namespace gwdual
