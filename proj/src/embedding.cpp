#include "gwdual/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gwdual {

void PiecewiseConstantRate::validate() const {
  if (initial < 0.0) throw InvalidRates("rates must be non-negative");
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& [t, v] : steps) {
    if (v < 0.0) throw InvalidRates("rates must be non-negative");
    if (t <= prev) throw InvalidRates("rate breakpoints must be strictly increasing");
    prev = t;
  }
}

double PiecewiseConstantRate::at(double t) const {
  double value = initial;
  for (const auto& [bp, v] : steps) {
    if (t < bp) break;
    value = v;
  }
  return value;
}

PiecewiseConstantRate PiecewiseConstantRate::parse(const std::string& text) {
  PiecewiseConstantRate rate;
  if (text.find(':') == std::string::npos) {
    rate.initial = std::stod(text);
    return rate;
  }
  std::stringstream ss(text);
  std::string token;
  bool first = true;
  while (std::getline(ss, token, ',')) {
    const auto colon = token.find(':');
    if (colon == std::string::npos) throw InvalidRates("expected breakpoint:value, got " + token);
    const double bp = std::stod(token.substr(0, colon));
    const double value = std::stod(token.substr(colon + 1));
    if (first) {
      rate.initial = value;  // the first value also extends left of its breakpoint
      first = false;
    }
    rate.steps.emplace_back(bp, value);
  }
  rate.validate();
  return rate;
}

void RateSchedule::validate() const {
  birth.validate();
  death.validate();
}

namespace {

/// Breakpoints of either rate inside (t0, t1), plus the endpoints.
std::vector<double> segment_points(const RateSchedule& rates, double t0, double t1) {
  std::vector<double> pts{t0};
  for (const auto& [bp, v] : rates.birth.steps) {
    (void)v;
    if (bp > t0 && bp < t1) pts.push_back(bp);
  }
  for (const auto& [bp, v] : rates.death.steps) {
    (void)v;
    if (bp > t0 && bp < t1) pts.push_back(bp);
  }
  pts.push_back(t1);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double rho_exact(const RateSchedule& rates, double t0, double t1) {
  const std::vector<double> pts = segment_points(rates, t0, t1);
  double rho = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    rho += (rates.death.at(mid) - rates.birth.at(mid)) * (pts[i + 1] - pts[i]);
  }
  return rho;
}

KendallParams kendall_params(const RateSchedule& rates, double t0, double t1, int panels) {
  rates.validate();
  if (t0 > t1) throw InvalidRates("kendall_params needs t0 <= t1");
  if (panels < 2) throw InvalidRates("kendall_params needs at least 2 panels");

  KendallParams out;
  out.rho = rho_exact(rates, t0, t1);
  if (t0 == t1) {
    out.q = 1.0;
    out.p = 1.0;
    return out;
  }

  // Composite Simpson on each constant piece; within a piece the integrand
  // e^{rho(t0,u)} mu(u) is smooth, and rho itself is evaluated exactly.
  const std::vector<double> pts = segment_points(rates, t0, t1);
  const double span = t1 - t0;
  double integral = 0.0;
  double rho_at_lo = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = pts[i];
    const double hi = pts[i + 1];
    const double mid = 0.5 * (lo + hi);
    const double mu = rates.death.at(mid);
    const double slope = mu - rates.birth.at(mid);  // d rho / du on this piece
    if (mu > 0.0) {
      int n = std::max(2, static_cast<int>(std::llround(panels * (hi - lo) / span)));
      if (n % 2 == 1) ++n;
      const double h = (hi - lo) / n;
      double sum = std::exp(rho_at_lo) + std::exp(rho_at_lo + slope * (hi - lo));
      for (int j = 1; j < n; ++j) {
        sum += std::exp(rho_at_lo + slope * j * h) * (j % 2 == 1 ? 4.0 : 2.0);
      }
      integral += mu * sum * h / 3.0;
    }
    rho_at_lo += slope * (hi - lo);
  }
  out.q = 1.0 / (1.0 + integral);
  out.p = std::exp(out.rho) * out.q;
  return out;
}

BdResult simulate_bd(const RateSchedule& rates, double t0, double t1, Rank z0, RngStream& rng,
                     Rank cap, bool record_events) {
  rates.validate();
  if (t0 > t1) throw InvalidRates("simulate_bd needs t0 <= t1");
  BdResult result;
  Rank n = z0;
  double t = t0;
  const std::vector<double> pts = segment_points(rates, t0, t1);
  for (std::size_t i = 0; i + 1 < pts.size() && n > 0; ++i) {
    const double hi = pts[i + 1];
    const double mid = 0.5 * (pts[i] + hi);
    const double lambda = rates.birth.at(mid);
    const double mu = rates.death.at(mid);
    const double per_head = lambda + mu;
    t = std::max(t, pts[i]);
    if (per_head <= 0.0) {
      t = hi;
      continue;
    }
    for (;;) {
      const double wait = rng.exponential(per_head * static_cast<double>(n));
      if (t + wait >= hi) {
        t = hi;
        break;
      }
      t += wait;
      if (rng.next_u01() < lambda / per_head) {
        ++n;
        if (n > cap) throw SimOverflow("population exceeded the cap");
        if (record_events) result.events.emplace_back(t, +1);
      } else {
        --n;
        if (record_events) result.events.emplace_back(t, -1);
        if (n == 0) break;
      }
    }
  }
  result.count = n;
  return result;
}

std::vector<KendallParams> embedded_lf_grid(const RateSchedule& rates, Time t_start, Time t_end,
                                            int panels) {
  if (t_start >= t_end) throw InvalidRates("embedded grid needs t_start < t_end");
  std::vector<KendallParams> steps;
  steps.reserve(static_cast<std::size_t>(t_end - t_start));
  for (Time t = t_start; t < t_end; ++t) {
    steps.push_back(kendall_params(rates, static_cast<double>(t), static_cast<double>(t + 1),
                                   panels));
  }
  return steps;
}

OffspringLawSpec embedded_lf_law(const RateSchedule& rates, Time t_start, Time t_end,
                                 int panels) {
  std::vector<LfParams> schedule;
  for (const KendallParams& kp : embedded_lf_grid(rates, t_start, t_end, panels)) {
    schedule.push_back(kp.lf());
  }
  return OffspringLawSpec::linear_fractional_schedule(std::move(schedule), t_start);
}

}  // namespace gwdual
