#pragma once

#include <cassert>
#include <cstdint>
#include <span>
#include <vector>

#include "gwdual/errors.hpp"

namespace gwdual {

using Time = std::int64_t;
using Rank = std::uint64_t;

/// One generation's reproduction mapping: a monotone map U on {0..W} with
/// U(0) = 0, stored as cumulative offspring sums. u(x) = U(x) - U(x-1) is the
/// offspring count of the rank-x particle, so composing mappings iterates the
/// population chain one step.
class ReproductionMapping {
 public:
  ReproductionMapping() : cum_{0} {}  // width-0 mapping

  explicit ReproductionMapping(const std::vector<Rank>& offspring) {
    cum_.resize(offspring.size() + 1);
    cum_[0] = 0;
    for (std::size_t i = 0; i < offspring.size(); ++i) cum_[i + 1] = cum_[i] + offspring[i];
  }

  static ReproductionMapping identity(std::size_t width) {
    return ReproductionMapping(std::vector<Rank>(width, 1));
  }

  std::size_t width() const { return cum_.size() - 1; }

  /// U(x); requires 0 <= x <= width().
  Rank value(Rank x) const {
    assert(x < cum_.size());
    return cum_[x];
  }

  /// u(x); requires 1 <= x <= width().
  Rank offspring(Rank x) const {
    assert(x >= 1 && x < cum_.size());
    return cum_[x] - cum_[x - 1];
  }

  /// U(width()), the total offspring of the tracked window.
  Rank total() const { return cum_.back(); }

  std::span<const Rank> cumulative() const { return cum_; }

  std::vector<Rank> offspring_values() const {
    std::vector<Rank> u(width());
    for (std::size_t x = 1; x <= width(); ++x) u[x - 1] = offspring(x);
    return u;
  }

  friend bool operator==(const ReproductionMapping&, const ReproductionMapping&) = default;

 private:
  std::vector<Rank> cum_;  // cum_[x] = U(x)
};

/// Builds a mapping from raw offspring counts, rejecting negative entries.
ReproductionMapping make_mapping(std::span<const std::int64_t> offspring);

}  // namespace gwdual
