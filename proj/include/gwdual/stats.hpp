#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <utility>

#include "gwdual/mapping.hpp"

namespace gwdual {

/// Upper regularized incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

/// P(chi^2_dof > stat).
double chi_square_pvalue(double stat, int dof);

struct GofResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::uint64_t n = 0;
  int bins = 0;
  bool degenerate = false;  // law concentrated on one point; checked exactly
};

/// Chi-square goodness of fit of observed counts against a discrete law on
/// {0,1,...}. Cells are pooled left to right until each bin's expectation
/// reaches min_expected; the remainder forms the tail bin.
GofResult chi_square_gof(const std::map<Rank, std::uint64_t>& counts,
                         const std::function<double(Rank)>& prob, std::uint64_t n,
                         double min_expected = 5.0);

struct IndependenceResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
  std::uint64_t n = 0;
  int rows = 0;
  int cols = 0;
};

/// Chi-square independence test on a joint count table; each margin is
/// capped so that no marginal category has expectation below min_expected.
IndependenceResult chi_square_independence(
    const std::map<std::pair<Rank, Rank>, std::uint64_t>& joint, std::uint64_t n,
    double min_expected = 5.0);

}  // namespace gwdual
