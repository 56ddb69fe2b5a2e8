#include "gwdual/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace gwdual {

namespace {

// Lower regularized incomplete gamma by series expansion; valid for x < a+1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma by continued fraction; valid for x >= a+1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 1.0;
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi_square_pvalue(double stat, int dof) {
  if (dof <= 0) return 1.0;
  return regularized_gamma_q(0.5 * dof, 0.5 * stat);
}

GofResult chi_square_gof(const std::map<Rank, std::uint64_t>& counts,
                         const std::function<double(Rank)>& prob, std::uint64_t n,
                         double min_expected) {
  GofResult result;
  result.n = n;

  // Pool support cells left to right into bins with enough expected mass.
  // The walk stops once the remaining tail is itself below the threshold;
  // that tail becomes the final bin.
  struct Bin {
    Rank upper;  // inclusive; last bin is open-ended
    double expected;
  };
  std::vector<Bin> bins;
  double cum = 0.0;
  double bin_expected = 0.0;
  Rank k = 0;
  const double total = static_cast<double>(n);
  while (cum < 1.0 - 1e-12) {
    const double pk = prob(k);
    bin_expected += pk * total;
    cum += pk;
    const double tail_expected = (1.0 - cum) * total;
    if (bin_expected >= min_expected && tail_expected >= min_expected) {
      bins.push_back(Bin{k, bin_expected});
      bin_expected = 0.0;
    } else if (tail_expected < min_expected) {
      bins.push_back(Bin{k, bin_expected + tail_expected});
      bin_expected = 0.0;
      break;
    }
    ++k;
    if (k > 100000) break;  // guard for laws with very slow tails
  }
  if (bin_expected > 0.0 && !bins.empty()) {
    bins.back().expected += bin_expected;
  }

  if (bins.size() < 2) {
    // All mass in a single category: the fit degenerates to an exact support
    // check (every observed value must have positive probability).
    result.degenerate = true;
    result.bins = static_cast<int>(bins.size());
    bool ok = true;
    for (const auto& [value, count] : counts) {
      if (count > 0 && prob(value) <= 0.0) ok = false;
    }
    result.statistic = ok ? 0.0 : std::numeric_limits<double>::infinity();
    result.p_value = ok ? 1.0 : 0.0;
    result.dof = 0;
    return result;
  }

  std::vector<std::uint64_t> observed(bins.size(), 0);
  for (const auto& [value, count] : counts) {
    std::size_t idx = bins.size() - 1;
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (value <= bins[i].upper) {
        idx = i;
        break;
      }
    }
    observed[idx] += count;
  }

  double stat = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double diff = static_cast<double>(observed[i]) - bins[i].expected;
    stat += diff * diff / bins[i].expected;
  }
  result.statistic = stat;
  result.bins = static_cast<int>(bins.size());
  result.dof = static_cast<int>(bins.size()) - 1;
  result.p_value = chi_square_pvalue(stat, result.dof);
  return result;
}

IndependenceResult chi_square_independence(
    const std::map<std::pair<Rank, Rank>, std::uint64_t>& joint, std::uint64_t n,
    double min_expected) {
  IndependenceResult result;
  result.n = n;

  // Cap each margin so every marginal category keeps enough expected mass;
  // values at or above the cap share one category.
  auto margin_cap = [&](bool first) {
    std::map<Rank, std::uint64_t> margin;
    for (const auto& [key, count] : joint) {
      margin[first ? key.first : key.second] += count;
    }
    Rank cap = 0;
    std::uint64_t tail = n;
    for (const auto& [value, count] : margin) {
      if (static_cast<double>(tail) < 2.0 * min_expected) break;
      cap = value;
      tail -= count;
    }
    return cap;
  };
  const Rank cap1 = margin_cap(true);
  const Rank cap2 = margin_cap(false);
  const std::size_t rows = static_cast<std::size_t>(cap1) + 1;
  const std::size_t cols = static_cast<std::size_t>(cap2) + 1;

  std::vector<std::uint64_t> table(rows * cols, 0);
  std::vector<std::uint64_t> row_sum(rows, 0), col_sum(cols, 0);
  for (const auto& [key, count] : joint) {
    const std::size_t r = std::min<std::size_t>(key.first, rows - 1);
    const std::size_t c = std::min<std::size_t>(key.second, cols - 1);
    table[r * cols + c] += count;
    row_sum[r] += count;
    col_sum[c] += count;
  }

  double stat = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double expected = static_cast<double>(row_sum[r]) *
                              static_cast<double>(col_sum[c]) / static_cast<double>(n);
      if (expected <= 0.0) continue;
      const double diff = static_cast<double>(table[r * cols + c]) - expected;
      stat += diff * diff / expected;
    }
  }
  result.statistic = stat;
  result.rows = static_cast<int>(rows);
  result.cols = static_cast<int>(cols);
  result.dof = static_cast<int>((rows - 1) * (cols - 1));
  result.p_value = chi_square_pvalue(stat, result.dof);
  return result;
}

}  // namespace gwdual
