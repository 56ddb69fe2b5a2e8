#include "gwdual/laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gwdual {

namespace {

Rank sample_poisson(double mean, RngStream& rng) {
  const double u = rng.next_u01();
  double p = std::exp(-mean);
  double cum = p;
  Rank k = 0;
  while (u >= cum) {
    ++k;
    p *= mean / static_cast<double>(k);
    cum += p;
    if (p == 0.0) break;  // underflow guard; the offspring cap trips first
  }
  return k;
}

void check_probability(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw InvalidLaw(std::string(what) + " must lie in [0, 1], got " + std::to_string(v));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// ProbTable

void ProbTable::validate() const {
  if (probs.empty()) throw InvalidLaw("probability table is empty");
  for (double v : probs) check_probability(v, "table entry");
  if (tail_ratio != 0.0) {
    if (!(tail_ratio > 0.0 && tail_ratio < 1.0)) {
      throw InvalidLaw("geometric tail ratio must lie in (0, 1)");
    }
    if (probs.back() <= 0.0) {
      throw InvalidLaw("geometric tail requires a positive last table entry");
    }
  }
  double total = 0.0;
  for (double v : probs) total += v;
  if (tail_ratio != 0.0) total += probs.back() * tail_ratio / (1.0 - tail_ratio);
  if (std::abs(total - 1.0) > kProbTol) {
    throw InvalidLaw("probability table sums to " + std::to_string(total) + ", expected 1");
  }
}

double ProbTable::prob(Rank k) const {
  if (k < probs.size()) return probs[k];
  if (tail_ratio == 0.0) return 0.0;
  return probs.back() * std::pow(tail_ratio, static_cast<double>(k - max_explicit()));
}

double ProbTable::mean() const {
  double m = 0.0;
  for (std::size_t k = 1; k < probs.size(); ++k) m += static_cast<double>(k) * probs[k];
  if (tail_ratio != 0.0) {
    const double r = tail_ratio;
    const double k0 = static_cast<double>(max_explicit());
    m += probs.back() * (k0 * r / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
  }
  return m;
}

double ProbTable::pgf(double s) const {
  double acc = 0.0;
  double sk = 1.0;
  for (double v : probs) {
    acc += v * sk;
    sk *= s;
  }
  if (tail_ratio != 0.0) {
    // sum_{k > K} P_K r^{k-K} s^k = P_K s^K rs / (1 - rs)
    const double rs = tail_ratio * s;
    acc += probs.back() * std::pow(s, static_cast<double>(max_explicit())) * rs / (1.0 - rs);
  }
  return acc;
}

Rank ProbTable::sample(RngStream& rng) const {
  const double u = rng.next_u01();
  double cum = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    cum += probs[k];
    if (u < cum) return k;
  }
  if (tail_ratio == 0.0) return max_explicit();
  // Invert the geometric tail: residual mass R = u - cum over entries
  // P_K r, P_K r^2, ... with partial sums P_K r (1 - r^j) / (1 - r).
  const double r = tail_ratio;
  const double residual = u - cum;
  const double arg = 1.0 - residual * (1.0 - r) / (probs.back() * r);
  if (arg <= 0.0) return max_explicit() + 64;  // beyond double resolution
  const double j = std::floor(std::log(arg) / std::log(r)) + 1.0;
  return max_explicit() + std::max<Rank>(1, static_cast<Rank>(j));
}

Json ProbTable::to_json() const {
  Json j;
  j["probabilities"] = probs;
  if (tail_ratio != 0.0) j["tail_ratio"] = tail_ratio;
  return j;
}

ProbTable ProbTable::from_json(const Json& j) {
  ProbTable t;
  t.probs = j.at("probabilities").get<std::vector<double>>();
  if (j.contains("tail_ratio")) t.tail_ratio = j.at("tail_ratio").get<double>();
  return t;
}

// ---------------------------------------------------------------------------
// LfParams

void LfParams::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidLaw("linear-fractional p must lie in (0, 1]");
  if (!(q > 0.0 && q <= 1.0)) throw InvalidLaw("linear-fractional q must lie in (0, 1]");
}

double LfParams::prob(Rank k) const {
  if (k == 0) return 1.0 - q;
  return q * p * std::pow(1.0 - p, static_cast<double>(k - 1));
}

Rank LfParams::sample(RngStream& rng) const {
  if (!rng.bernoulli(q)) return 0;
  return rng.geometric_from_one(p);
}

ProbTable LfParams::to_table() const {
  ProbTable t;
  t.probs = {1.0 - q, q * p};
  t.tail_ratio = (p < 1.0) ? 1.0 - p : 0.0;
  return t;
}

// ---------------------------------------------------------------------------
// Family helpers

const LfParams& LinearFractionalLaw::at(Time t) const {
  if (schedule.size() == 1) return schedule.front();
  const Time i = t - t0;
  if (i < 0 || i >= static_cast<Time>(schedule.size())) {
    throw WindowError("linear-fractional schedule does not cover time " + std::to_string(t));
  }
  return schedule[static_cast<std::size_t>(i)];
}

double ParityLfLaw::p_at(Time t) const {
  if (p.size() == 1) return p.front();
  const Time i = t - t0;
  if (i < 0 || i >= static_cast<Time>(p.size())) {
    throw WindowError("parity schedule does not cover time " + std::to_string(t));
  }
  return p[static_cast<std::size_t>(i)];
}

double PureDeathLaw::death_prob(Time t, Rank x) const {
  if (constant >= 0.0) return constant;
  if (!per_time.empty()) {
    const Time i = std::clamp<Time>(t - t0, 0, static_cast<Time>(per_time.size()) - 1);
    const auto& row = per_time[static_cast<std::size_t>(i)];
    const std::size_t xi = std::min<std::size_t>(x >= 1 ? x - 1 : 0, row.size() - 1);
    return row[xi];
  }
  const std::size_t xi = std::min<std::size_t>(x >= 1 ? x - 1 : 0, per_rank.size() - 1);
  return per_rank[xi];
}

Rank BoundedGwLaw::bound_at(Time t) const {
  const Time i = std::clamp<Time>(t - t0, 0, static_cast<Time>(bounds.size()) - 1);
  return bounds[static_cast<std::size_t>(i)];
}

double CarryingCapacityLaw::mean_at(Rank x) const {
  const std::size_t i = std::min<std::size_t>(x >= 1 ? x - 1 : 0, means.size() - 1);
  return means[i];
}

LfParams CarryingCapacityLaw::lf_at(Rank x) const {
  const double m = mean_at(x);
  if (m >= 1.0) return LfParams{1.0 / m, 1.0};
  return LfParams{1.0, m};
}

// ---------------------------------------------------------------------------
// OffspringLawSpec

OffspringLawSpec::OffspringLawSpec(Variant law, Rank cap) : law_(std::move(law)), cap_(cap) {
  static const char* kNames[] = {"iid_gw",           "linear_fractional", "parity_lf",
                                 "pure_death",       "bounded_gw",        "eternal_particle",
                                 "carrying_capacity"};
  family_ = kNames[law_.index()];
  validate();
}

void OffspringLawSpec::validate() {
  std::visit(
      [this](auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, IidGwLaw>) {
          law.table.validate();
        } else if constexpr (std::is_same_v<T, LinearFractionalLaw>) {
          if (law.schedule.empty()) throw InvalidLaw("linear-fractional schedule is empty");
          for (const auto& lf : law.schedule) lf.validate();
        } else if constexpr (std::is_same_v<T, ParityLfLaw>) {
          if (law.p.empty()) throw InvalidLaw("parity schedule is empty");
          for (double v : law.p) {
            if (!(v > 0.0 && v <= 1.0)) throw InvalidLaw("parity p must lie in (0, 1]");
          }
        } else if constexpr (std::is_same_v<T, PureDeathLaw>) {
          const bool has_const = law.constant >= 0.0;
          const bool has_rank = !law.per_rank.empty();
          const bool has_time = !law.per_time.empty();
          if (int(has_const) + int(has_rank) + int(has_time) != 1) {
            throw InvalidLaw("pure-death law needs exactly one of constant/per_rank/per_time");
          }
          if (has_const) check_probability(law.constant, "death probability");
          for (double v : law.per_rank) check_probability(v, "death probability");
          for (const auto& row : law.per_time) {
            if (row.empty()) throw InvalidLaw("pure-death per_time row is empty");
            for (double v : row) check_probability(v, "death probability");
          }
        } else if constexpr (std::is_same_v<T, BoundedGwLaw>) {
          law.base.validate();
          if (law.bounds.empty()) throw InvalidLaw("bounded law needs a bound schedule");
        } else if constexpr (std::is_same_v<T, EternalParticleLaw>) {
          law.rank1.validate();
          law.base.validate();
          if (law.rank1.p0() != 0.0) {
            throw InvalidLaw("eternal rank-1 law must put zero mass at zero offspring");
          }
        } else if constexpr (std::is_same_v<T, CarryingCapacityLaw>) {
          if (law.means.empty()) throw InvalidLaw("carrying-capacity law needs a mean schedule");
          for (double m : law.means) {
            if (!(m >= 0.0)) throw InvalidLaw("offspring means must be non-negative");
            if (law.kind == CarryingCapacityLaw::Kind::LinearFractional && m <= 0.0) {
              throw InvalidLaw("linear-fractional means must be positive");
            }
          }
          if (!(law.means.front() > 1.0)) throw InvalidLaw("carrying capacity needs m_1 > 1");
          for (std::size_t i = 1; i < law.means.size(); ++i) {
            if (law.means[i] > law.means[i - 1] + kProbTol) {
              throw InvalidLaw("offspring means must be non-increasing");
            }
          }
          // Capacity: the last rank x with m_1 + ... + m_x >= x. Means are
          // non-increasing, so the crossing is unique once it happens.
          double cum = 0.0;
          Rank capacity = 0;
          bool crossed = false;
          for (std::size_t i = 0; i < law.means.size(); ++i) {
            cum += law.means[i];
            if (cum < static_cast<double>(i + 1)) {
              capacity = static_cast<Rank>(i);
              crossed = true;
              break;
            }
          }
          if (!crossed) {
            const double m_last = law.means.back();
            if (m_last >= 1.0) {
              throw InvalidLaw("mean schedule never drops the cumulative sum below the rank");
            }
            // Beyond the schedule the sum grows by m_last per rank; solve
            // cum + (x - len) * m_last < x for the first failing rank.
            const double len = static_cast<double>(law.means.size());
            const double c = (cum - len * m_last) / (1.0 - m_last);
            capacity = static_cast<Rank>(std::floor(c + kProbTol));
          }
          if (capacity < 1) throw InvalidLaw("carrying capacity is empty");
          law.capacity = capacity;
        }
      },
      law_);
}

Rank OffspringLawSpec::sample(Time t, Rank x, RngStream& rng) const {
  const Rank value = std::visit(
      [&](const auto& law) -> Rank {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, IidGwLaw>) {
          return law.table.sample(rng);
        } else if constexpr (std::is_same_v<T, LinearFractionalLaw>) {
          return law.at(t).sample(rng);
        } else if constexpr (std::is_same_v<T, ParityLfLaw>) {
          if (x % 2 == 0) return 0;
          return rng.geometric_from_one(law.p_at(t));
        } else if constexpr (std::is_same_v<T, PureDeathLaw>) {
          return rng.bernoulli(law.death_prob(t, x)) ? 0 : 1;
        } else if constexpr (std::is_same_v<T, BoundedGwLaw>) {
          if (x > law.bound_at(t)) return 0;
          return law.base.sample(rng);
        } else if constexpr (std::is_same_v<T, EternalParticleLaw>) {
          return x == 1 ? law.rank1.sample(rng) : law.base.sample(rng);
        } else {
          if (law.kind == CarryingCapacityLaw::Kind::Poisson) {
            return sample_poisson(law.mean_at(x), rng);
          }
          return law.lf_at(x).sample(rng);
        }
      },
      law_);
  if (value > cap_) {
    throw OffspringCapExceeded("sampled offspring count " + std::to_string(value) +
                               " exceeds cap " + std::to_string(cap_));
  }
  return value;
}

double OffspringLawSpec::pgf(Time t, Rank x, double s) const {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("pgf argument must lie in [0, 1], got " + std::to_string(s));
  }
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, IidGwLaw>) {
          return law.table.pgf(s);
        } else if constexpr (std::is_same_v<T, LinearFractionalLaw>) {
          return law.at(t).pgf(s);
        } else if constexpr (std::is_same_v<T, ParityLfLaw>) {
          if (x % 2 == 0) return 1.0;
          return LfParams{law.p_at(t), 1.0}.pgf(s);
        } else if constexpr (std::is_same_v<T, PureDeathLaw>) {
          const double d = law.death_prob(t, x);
          return d + (1.0 - d) * s;
        } else if constexpr (std::is_same_v<T, BoundedGwLaw>) {
          return x > law.bound_at(t) ? 1.0 : law.base.pgf(s);
        } else if constexpr (std::is_same_v<T, EternalParticleLaw>) {
          return x == 1 ? law.rank1.pgf(s) : law.base.pgf(s);
        } else {
          if (law.kind == CarryingCapacityLaw::Kind::Poisson) {
            return std::exp(law.mean_at(x) * (s - 1.0));
          }
          return law.lf_at(x).pgf(s);
        }
      },
      law_);
}

double OffspringLawSpec::mean(Time t, Rank x) const {
  return std::visit(
      [&](const auto& law) -> double {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, IidGwLaw>) {
          return law.table.mean();
        } else if constexpr (std::is_same_v<T, LinearFractionalLaw>) {
          return law.at(t).mean();
        } else if constexpr (std::is_same_v<T, ParityLfLaw>) {
          return x % 2 == 0 ? 0.0 : 1.0 / law.p_at(t);
        } else if constexpr (std::is_same_v<T, PureDeathLaw>) {
          return 1.0 - law.death_prob(t, x);
        } else if constexpr (std::is_same_v<T, BoundedGwLaw>) {
          return x > law.bound_at(t) ? 0.0 : law.base.mean();
        } else if constexpr (std::is_same_v<T, EternalParticleLaw>) {
          return x == 1 ? law.rank1.mean() : law.base.mean();
        } else {
          return law.mean_at(x);
        }
      },
      law_);
}

bool OffspringLawSpec::rank_independent(Time t) const {
  return std::visit(
      [&](const auto& law) -> bool {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, IidGwLaw> || std::is_same_v<T, LinearFractionalLaw>) {
          return true;
        } else if constexpr (std::is_same_v<T, ParityLfLaw>) {
          return false;
        } else if constexpr (std::is_same_v<T, PureDeathLaw>) {
          if (law.constant >= 0.0) return true;
          if (!law.per_time.empty()) {
            const double d0 = law.death_prob(t, 1);
            const Time i = std::clamp<Time>(t - law.t0, 0,
                                            static_cast<Time>(law.per_time.size()) - 1);
            for (double v : law.per_time[static_cast<std::size_t>(i)]) {
              if (v != d0) return false;
            }
            return true;
          }
          for (double v : law.per_rank) {
            if (v != law.per_rank.front()) return false;
          }
          return true;
        } else if constexpr (std::is_same_v<T, BoundedGwLaw>) {
          return false;
        } else if constexpr (std::is_same_v<T, EternalParticleLaw>) {
          return law.rank1.probs == law.base.probs && law.rank1.tail_ratio == law.base.tail_ratio;
        } else {
          for (double m : law.means) {
            if (m != law.means.front()) return false;
          }
          return true;
        }
      },
      law_);
}

Json OffspringLawSpec::to_json() const {
  Json params;
  std::visit(
      [&](const auto& law) {
        using T = std::decay_t<decltype(law)>;
        if constexpr (std::is_same_v<T, IidGwLaw>) {
          params = law.table.to_json();
        } else if constexpr (std::is_same_v<T, LinearFractionalLaw>) {
          if (law.schedule.size() == 1) {
            params["p"] = law.schedule.front().p;
            params["q"] = law.schedule.front().q;
          } else {
            params["t0"] = law.t0;
            Json sched = Json::array();
            for (const auto& lf : law.schedule) sched.push_back({lf.p, lf.q});
            params["schedule"] = sched;
          }
        } else if constexpr (std::is_same_v<T, ParityLfLaw>) {
          if (law.p.size() == 1) {
            params["p"] = law.p.front();
          } else {
            params["t0"] = law.t0;
            params["schedule"] = law.p;
          }
        } else if constexpr (std::is_same_v<T, PureDeathLaw>) {
          if (law.constant >= 0.0) {
            params["death_prob"] = law.constant;
          } else if (!law.per_time.empty()) {
            params["t0"] = law.t0;
            params["per_time"] = law.per_time;
          } else {
            params["per_rank"] = law.per_rank;
          }
        } else if constexpr (std::is_same_v<T, BoundedGwLaw>) {
          params["base"] = law.base.to_json();
          params["t0"] = law.t0;
          params["bounds"] = law.bounds;
        } else if constexpr (std::is_same_v<T, EternalParticleLaw>) {
          params["rank1"] = law.rank1.to_json();
          params["base"] = law.base.to_json();
        } else {
          params["means"] = law.means;
          params["offspring"] =
              law.kind == CarryingCapacityLaw::Kind::Poisson ? "poisson" : "linear_fractional";
          params["capacity"] = law.capacity;
        }
      },
      law_);
  Json j;
  j["family"] = family_;
  j["params"] = params;
  j["offspring_cap"] = cap_;
  return j;
}

OffspringLawSpec OffspringLawSpec::from_json(const Json& j) {
  const std::string family = j.at("family").get<std::string>();
  const Json& params = j.at("params");
  Rank cap = kDefaultOffspringCap;
  if (j.contains("offspring_cap")) cap = j.at("offspring_cap").get<Rank>();

  Variant v;
  if (family == "iid_gw") {
    v = IidGwLaw{ProbTable::from_json(params)};
  } else if (family == "linear_fractional") {
    LinearFractionalLaw law;
    if (params.contains("schedule")) {
      law.t0 = params.at("t0").get<Time>();
      for (const auto& pq : params.at("schedule")) {
        law.schedule.push_back(LfParams{pq.at(0).get<double>(), pq.at(1).get<double>()});
      }
    } else {
      law.schedule.push_back(LfParams{params.at("p").get<double>(), params.at("q").get<double>()});
    }
    v = std::move(law);
  } else if (family == "parity_lf") {
    ParityLfLaw law;
    if (params.contains("schedule")) {
      law.t0 = params.at("t0").get<Time>();
      law.p = params.at("schedule").get<std::vector<double>>();
    } else {
      law.p = {params.at("p").get<double>()};
    }
    v = std::move(law);
  } else if (family == "pure_death") {
    PureDeathLaw law;
    if (params.contains("death_prob")) {
      law.constant = params.at("death_prob").get<double>();
    } else if (params.contains("per_time")) {
      law.t0 = params.at("t0").get<Time>();
      law.per_time = params.at("per_time").get<std::vector<std::vector<double>>>();
    } else {
      law.per_rank = params.at("per_rank").get<std::vector<double>>();
    }
    v = std::move(law);
  } else if (family == "bounded_gw") {
    BoundedGwLaw law;
    law.base = ProbTable::from_json(params.at("base"));
    law.t0 = params.at("t0").get<Time>();
    law.bounds = params.at("bounds").get<std::vector<Rank>>();
    v = std::move(law);
  } else if (family == "eternal_particle") {
    v = EternalParticleLaw{ProbTable::from_json(params.at("rank1")),
                           ProbTable::from_json(params.at("base"))};
  } else if (family == "carrying_capacity") {
    CarryingCapacityLaw law;
    law.means = params.at("means").get<std::vector<double>>();
    const std::string kind = params.at("offspring").get<std::string>();
    if (kind == "poisson") {
      law.kind = CarryingCapacityLaw::Kind::Poisson;
    } else if (kind == "linear_fractional") {
      law.kind = CarryingCapacityLaw::Kind::LinearFractional;
    } else {
      throw InvalidLaw("unknown carrying-capacity offspring kind: " + kind);
    }
    v = std::move(law);
  } else {
    throw InvalidLaw("unknown law family: " + family);
  }
  return OffspringLawSpec(std::move(v), cap);
}

OffspringLawSpec OffspringLawSpec::iid_gw(ProbTable table) {
  return OffspringLawSpec(Variant(IidGwLaw{std::move(table)}));
}

OffspringLawSpec OffspringLawSpec::linear_fractional(double p, double q) {
  return OffspringLawSpec(Variant(LinearFractionalLaw{{LfParams{p, q}}, 0}));
}

OffspringLawSpec OffspringLawSpec::linear_fractional_schedule(std::vector<LfParams> schedule,
                                                              Time t0) {
  return OffspringLawSpec(Variant(LinearFractionalLaw{std::move(schedule), t0}));
}

OffspringLawSpec OffspringLawSpec::parity_lf(double p) {
  return OffspringLawSpec(Variant(ParityLfLaw{{p}, 0}));
}

OffspringLawSpec OffspringLawSpec::pure_death(double death_prob) {
  PureDeathLaw law;
  law.constant = death_prob;
  return OffspringLawSpec(Variant(std::move(law)));
}

OffspringLawSpec OffspringLawSpec::pure_death_ranks(std::vector<double> per_rank) {
  PureDeathLaw law;
  law.per_rank = std::move(per_rank);
  return OffspringLawSpec(Variant(std::move(law)));
}

OffspringLawSpec OffspringLawSpec::bounded_gw(ProbTable base, std::vector<Rank> bounds, Time t0) {
  return OffspringLawSpec(Variant(BoundedGwLaw{std::move(base), std::move(bounds), t0}));
}

OffspringLawSpec OffspringLawSpec::eternal_particle(ProbTable rank1, ProbTable base) {
  return OffspringLawSpec(Variant(EternalParticleLaw{std::move(rank1), std::move(base)}));
}

OffspringLawSpec OffspringLawSpec::carrying_capacity(std::vector<double> means,
                                                     CarryingCapacityLaw::Kind kind) {
  CarryingCapacityLaw law;
  law.means = std::move(means);
  law.kind = kind;
  return OffspringLawSpec(Variant(std::move(law)));
}

double ve_pgf_compose(const OffspringLawSpec& law, Time a, Time t, double s, Rank z) {
  if (!(s >= 0.0 && s <= 1.0)) {
    throw DomainError("pgf argument must lie in [0, 1], got " + std::to_string(s));
  }
  if (a > t) throw WindowError("ve_pgf_compose needs a <= t");
  for (Time tau = a; tau < t; ++tau) {
    if (!law.rank_independent(tau)) {
      throw NotRankIndependent("law depends on the rank at time " + std::to_string(tau));
    }
  }
  double cur = s;
  for (Time tau = t - 1; tau >= a; --tau) {
    cur = law.pgf(tau, 1, cur);
  }
  return std::pow(cur, static_cast<double>(z));
}

}  // namespace gwdual
