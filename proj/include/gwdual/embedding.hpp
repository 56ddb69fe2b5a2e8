#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gwdual/laws.hpp"
#include "gwdual/rng.hpp"

namespace gwdual {

/// Piecewise-constant non-negative rate: `initial` before the first
/// breakpoint, then steps[i].second on [steps[i].first, steps[i+1].first).
struct PiecewiseConstantRate {
  double initial = 0.0;
  std::vector<std::pair<double, double>> steps;

  void validate() const;
  double at(double t) const;

  static PiecewiseConstantRate constant(double v) { return {v, {}}; }
  /// Parses "1.0" (constant) or "0:1.0,2:0.5" (breakpoint:value list).
  static PiecewiseConstantRate parse(const std::string& text);
};

struct RateSchedule {
  PiecewiseConstantRate birth;  // lambda(t)
  PiecewiseConstantRate death;  // mu(t)

  void validate() const;
};

/// Linear-fractional parameters of a linear birth-death process over
/// [t0, t1]:
///   rho = integral of (mu - lambda),
///   q   = 1 / (1 + integral of e^{rho(t0,u)} mu(u) du),
///   p   = e^{rho} q.
struct KendallParams {
  double rho = 0.0;
  double q = 1.0;
  double p = 1.0;

  LfParams lf() const { return LfParams{p, q}; }
};

/// rho by exact piecewise integration; the inner integral by composite
/// Simpson with `panels` total panels split at rate breakpoints.
KendallParams kendall_params(const RateSchedule& rates, double t0, double t1,
                             int panels = 4096);

double rho_exact(const RateSchedule& rates, double t0, double t1);

struct BdResult {
  Rank count = 0;
  std::vector<std::pair<double, int>> events;  // (time, +1 birth / -1 death)
};

/// Exact event-driven simulation of the linear birth-death process; each
/// individual carries rate lambda + mu inside a constant piece, so no
/// thinning is needed. Throws SimOverflow past `cap` individuals.
BdResult simulate_bd(const RateSchedule& rates, double t0, double t1, Rank z0,
                     RngStream& rng, Rank cap = 1000000, bool record_events = false);

/// Kendall parameters of each unit step [t, t+1] for t in [t_start, t_end).
std::vector<KendallParams> embedded_lf_grid(const RateSchedule& rates, Time t_start,
                                            Time t_end, int panels = 4096);

/// Same steps packaged as a linear-fractional offspring law schedule.
OffspringLawSpec embedded_lf_law(const RateSchedule& rates, Time t_start, Time t_end,
                                 int panels = 4096);

}  // namespace gwdual
