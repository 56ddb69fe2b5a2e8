#pragma once

#include <optional>
#include <vector>

#include "gwdual/laws.hpp"
#include "gwdual/mapping.hpp"

namespace gwdual {

/// A sampled realization of the reproduction system on a time window
/// [t_start, t_end) and rank window {0..width}. Immutable after construction;
/// cells are drawn from counter streams keyed by (seed, t, x), so the same
/// (seed, law, window, width) always reproduces the grid bit for bit.
class ReproductionGrid {
 public:
  ReproductionGrid(Time t_start, std::vector<ReproductionMapping> rows, std::size_t width,
                   std::uint64_t seed, OffspringLawSpec law);

  Time t_start() const { return t_start_; }
  Time t_end() const { return t_start_ + static_cast<Time>(rows_.size()); }
  std::size_t width() const { return width_; }
  std::uint64_t seed() const { return seed_; }
  const OffspringLawSpec& law() const { return law_; }

  bool covers(Time a, Time b) const { return a <= b && a >= t_start() && b <= t_end(); }

  /// Row U_t; throws WindowError outside [t_start, t_end).
  const ReproductionMapping& row(Time t) const;

  Json to_json() const;
  static ReproductionGrid from_json(const Json& j);

 private:
  Time t_start_;
  std::size_t width_;
  std::uint64_t seed_;
  OffspringLawSpec law_;
  std::vector<ReproductionMapping> rows_;
};

ReproductionGrid sample_grid(const OffspringLawSpec& law, Time t_start, Time t_end,
                             std::size_t width, std::uint64_t seed);

/// U_{a,b}(x), the composition U_{b-1} o ... o U_a. Returns nullopt when an
/// intermediate value leaves the rank window before the remaining rows could
/// be applied; a final value beyond the window is still exact and returned.
std::optional<Rank> compose(const ReproductionGrid& grid, Time a, Time b, Rank x);

/// States Z_a = z, Z_{t+1} = U_t(Z_t). Once a state exceeds the rank window
/// it is recorded, `truncated` is set, and the trajectory stops; state 0 is
/// absorbing by construction.
struct Trajectory {
  Time start_time = 0;
  Rank start_state = 0;
  std::vector<Rank> states;  // states[i] = Z_{start_time + i}
  bool truncated = false;

  Rank final_state() const { return states.back(); }
};

Trajectory simulate_trajectory(const ReproductionGrid& grid, Time a, Rank z, Time horizon);

}  // namespace gwdual
