#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gwdual/errors.hpp"
#include "gwdual/mapping.hpp"
#include "gwdual/rng.hpp"

namespace gwdual {

using Json = nlohmann::ordered_json;

inline constexpr double kProbTol = 1e-12;
inline constexpr Rank kDefaultOffspringCap = 0xFFFFFFFFull;  // 2^32 - 1

/// Discrete law on {0, 1, ...}: explicit probabilities P_0..P_K, optionally
/// continued by a geometric tail P_k = P_K * r^(k-K) for k > K.
struct ProbTable {
  std::vector<double> probs;
  double tail_ratio = 0.0;  // 0 disables the tail; otherwise r in (0, 1)

  void validate() const;
  double prob(Rank k) const;
  double p0() const { return probs.empty() ? 0.0 : probs.front(); }
  Rank max_explicit() const { return probs.size() - 1; }
  bool finite_support() const { return tail_ratio == 0.0; }
  double mean() const;
  double pgf(double s) const;
  Rank sample(RngStream& rng) const;  // single-uniform inversion, tail included

  Json to_json() const;
  static ProbTable from_json(const Json& j);
};

/// Linear-fractional offspring law: mass 1-q at zero, and conditionally on a
/// positive count, geometric on {1,2,...} with success probability p. The pgf
/// is 1 - q + q*p*s / (1 - (1-p)s); the mean is q/p.
struct LfParams {
  double p = 1.0;
  double q = 1.0;

  void validate() const;
  double pgf(double s) const { return 1.0 - q + q * p * s / (1.0 - (1.0 - p) * s); }
  double mean() const { return q / p; }
  double prob(Rank k) const;
  Rank sample(RngStream& rng) const;  // Bernoulli(q), then geometric(p)
  ProbTable to_table() const;         // {1-q, q*p} with tail ratio 1-p
};

struct IidGwLaw {
  ProbTable table;
};

/// Rank-independent linear-fractional law, optionally varying over time.
struct LinearFractionalLaw {
  std::vector<LfParams> schedule;  // size 1 means time-constant
  Time t0 = 0;                     // schedule[t - t0] when size > 1

  const LfParams& at(Time t) const;
};

/// Odd ranks reproduce geometrically (success p_t, at least one child); even
/// ranks have no offspring.
struct ParityLfLaw {
  std::vector<double> p;  // size 1 means time-constant
  Time t0 = 0;

  double p_at(Time t) const;
};

/// Offspring in {0, 1}: each particle dies with probability death(t, x),
/// otherwise keeps exactly one descendant.
struct PureDeathLaw {
  double constant = -1.0;                      // used when >= 0
  std::vector<double> per_rank;                // else indexed by x (clamped)
  std::vector<std::vector<double>> per_time;   // else [t - t0][x-1] (clamped)
  Time t0 = 0;

  double death_prob(Time t, Rank x) const;
};

/// Stationary base law for ranks up to B_t; ranks above the bound produce
/// nothing.
struct BoundedGwLaw {
  ProbTable base;
  std::vector<Rank> bounds;  // B_t = bounds[t - t0], clamped at the ends
  Time t0 = 0;

  Rank bound_at(Time t) const;
};

/// Rank 1 follows its own law with no mass at zero (it never dies out); all
/// other ranks share the base law. Covers immigration (rank-1 law s*g(s)) and
/// emigration-style models with a free rank-1 table.
struct EternalParticleLaw {
  ProbTable rank1;
  ProbTable base;
};

/// Rank-dependent means m_1 > 1 decreasing across ranks; the capacity K is
/// the last rank with m_1 + ... + m_x >= x.
struct CarryingCapacityLaw {
  enum class Kind { Poisson, LinearFractional };

  std::vector<double> means;  // m_x = means[x-1], clamped beyond the end
  Kind kind = Kind::Poisson;
  Rank capacity = 0;  // computed by validate()

  double mean_at(Rank x) const;
  LfParams lf_at(Rank x) const;  // mean-matched LF parameters
};

/// Declarative offspring law f_{t,x}: family plus parameters, with exact pgf
/// evaluation and a deterministic sampler per cell stream.
class OffspringLawSpec {
 public:
  using Variant = std::variant<IidGwLaw, LinearFractionalLaw, ParityLfLaw, PureDeathLaw,
                               BoundedGwLaw, EternalParticleLaw, CarryingCapacityLaw>;

  OffspringLawSpec() : OffspringLawSpec(Variant(IidGwLaw{ProbTable{{1.0}, 0.0}})) {}
  explicit OffspringLawSpec(Variant law, Rank cap = kDefaultOffspringCap);

  const std::string& family() const { return family_; }
  const Variant& variant() const { return law_; }
  Rank offspring_cap() const { return cap_; }

  /// One draw from f_{t,x}. Throws OffspringCapExceeded past the cap.
  Rank sample(Time t, Rank x, RngStream& rng) const;

  /// E s^{u_t(x)} for s in [0, 1]; closed form wherever the family has one.
  double pgf(Time t, Rank x, double s) const;

  double mean(Time t, Rank x) const;

  bool rank_independent(Time t) const;

  Json to_json() const;
  static OffspringLawSpec from_json(const Json& j);

  static OffspringLawSpec iid_gw(ProbTable table);
  static OffspringLawSpec linear_fractional(double p, double q);
  static OffspringLawSpec linear_fractional_schedule(std::vector<LfParams> schedule, Time t0);
  static OffspringLawSpec parity_lf(double p);
  static OffspringLawSpec pure_death(double death_prob);
  static OffspringLawSpec pure_death_ranks(std::vector<double> per_rank);
  static OffspringLawSpec bounded_gw(ProbTable base, std::vector<Rank> bounds, Time t0);
  static OffspringLawSpec eternal_particle(ProbTable rank1, ProbTable base);
  static OffspringLawSpec carrying_capacity(std::vector<double> means,
                                            CarryingCapacityLaw::Kind kind);

  /// Every particle keeps exactly one descendant (u == 1).
  static OffspringLawSpec identity_law() { return pure_death(0.0); }

 private:
  void validate();

  Variant law_;
  Rank cap_;
  std::string family_;
};

/// Composed pgf of a varying-environment (rank-independent) stretch:
/// E(s^{Z_t} | Z_a = z) = (f_a o ... o f_{t-1}(s))^z.
/// Throws NotRankIndependent if any step's law depends on the rank.
double ve_pgf_compose(const OffspringLawSpec& law, Time a, Time t, double s, Rank z);

}  // namespace gwdual
