#pragma once

#include <optional>
#include <vector>

#include "gwdual/grid.hpp"
#include "gwdual/mapping.hpp"

namespace gwdual {

/// Pathwise dual of a reproduction mapping: V(x) = min{y : U(y) >= x}.
/// Inside a finite rank window the minimum is only defined for x <= U(W);
/// that bound is `valid_to`, and `map` holds V on {0..valid_to} (its values
/// never exceed the source width).
struct DualMapping {
  ReproductionMapping map;  // width == valid_to
  Rank valid_to = 0;
  std::size_t source_width = 0;
  bool potentially_defective = false;

  Rank value(Rank x) const { return map.value(x); }
  Rank offspring(Rank x) const { return map.offspring(x); }
};

/// Dual of one mapping. `defect_slack` scales the heuristic saturation flag:
/// a row is marked potentially defective when its dual stops strictly below
/// the window (V(valid_to) < W) while U(W) < W * slack.
DualMapping dual_mapping(const ReproductionMapping& u, double defect_slack = 1.0);

/// The dual system: row t is the dual of primary row -t-1, so a primary
/// window [a, b) yields a dual window [-b, -a).
struct DualGrid {
  Time t_start = 0;
  std::size_t source_width = 0;
  std::vector<DualMapping> rows;

  Time t_end() const { return t_start + static_cast<Time>(rows.size()); }
  bool covers(Time a, Time b) const { return a <= b && a >= t_start && b <= t_end(); }
  const DualMapping& row(Time t) const;

  Json to_json() const;
};

DualGrid dual_grid(const ReproductionGrid& grid);

/// Dual grid restricted to the requested dual window [a, b); throws
/// WindowError when the primary grid does not cover [-b, -a).
DualGrid dual_grid(const ReproductionGrid& grid, Time a, Time b);

/// Composition over the dual system (row a applied first). nullopt when an
/// argument leaves a row's valid domain.
std::optional<Rank> compose_dual(const DualGrid& dual, Time a, Time b, Rank x);

/// Composition of the time-reverse V_{b,a} = V_a o ... o V_{b-1} over the
/// primary window [a, b) (equals the dual composition over [-b, -a)).
std::optional<Rank> compose_reverse(const DualGrid& dual, Time a, Time b, Rank x);

struct Violation {
  Rank x = 0;
  Rank y = 0;
  Time a = 0;
  Time b = 0;
  Rank lhs = 0;
  Rank rhs = 0;
};

struct VerifyReport {
  std::uint64_t checked = 0;
  std::vector<Violation> violations;
  std::uint64_t truncated_skipped = 0;
  bool pass = true;

  void merge(const VerifyReport& other);
  Json to_json() const;
};

/// Exhaustive check of the duality event identity on the window [a, b):
/// for every (x, y) in {0..W}^2 with both compositions defined,
///   reverse(x) <= y  iff  x <= forward(y).
/// Pairs where either side leaves the window are excluded and counted.
VerifyReport verify_siegmund(const ReproductionGrid& grid, Time a, Time b);

/// Exhaustive check of the twofold-dual shift on [a, b): composing the
/// double-dual rows satisfies twofold(x) = forward(x - 1) + 1 for x >= 1
/// wherever both sides stay inside the window.
VerifyReport verify_twofold_shift(const ReproductionGrid& grid, Time a, Time b);

/// Runs both checks over every subwindow of [a, b) and merges the reports.
VerifyReport verify_all_windows(const ReproductionGrid& grid, Time a, Time b);

/// Offspring runs of a mapping: u = (0^{xi_1}, eta_1 + 1, 0^{xi_2}, ...).
/// The dual reassembles as v = (xi_1 + 1, 0^{eta_1}, xi_2 + 1, ...), and a
/// trailing zero run that is not followed by a jump leaves the last block
/// incomplete.
struct BlockDecomposition {
  std::vector<Rank> xi;
  std::vector<Rank> eta;
  bool complete = true;
  Rank trailing_zeros = 0;
};

BlockDecomposition block_decompose(const ReproductionMapping& u);

/// Dual mapping assembled directly from the block pattern; agrees exactly
/// with dual_mapping() of the source row.
DualMapping block_assemble_dual(const BlockDecomposition& blocks, std::size_t source_width,
                                double defect_slack = 1.0);

}  // namespace gwdual
