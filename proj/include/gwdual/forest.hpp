#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gwdual/duality.hpp"
#include "gwdual/grid.hpp"

namespace gwdual {

/// One parent-child link drawn from generation t to t+1. For dual-forest
/// edges to_x is the exact image U_t(from_x), which may land beyond the rank
/// window; such edges are flagged clipped and rendered up to the boundary.
struct ForestEdge {
  Time t = 0;
  Rank from_x = 0;
  Rank to_x = 0;
  bool clipped = false;

  friend auto operator<=>(const ForestEdge&, const ForestEdge&) = default;
};

/// Lineage graph on the rank-time grid. Nodes are implicit: every (x, t)
/// with 0 <= x <= width and t_start <= t <= t_end. Primary forests link each
/// child to its unique parent (top-down genealogy); dual forests follow the
/// population chain upward and are drawn shifted right by 1/2 so the two
/// never cross.
struct ForestGraph {
  enum class Kind { Primary, Dual };

  Kind kind = Kind::Primary;
  Time t_start = 0;
  Time t_end = 0;  // node times span [t_start, t_end]
  std::size_t width = 0;
  double shift = 0.0;
  std::vector<ForestEdge> edges;

  std::size_t node_count() const {
    return (width + 1) * static_cast<std::size_t>(t_end - t_start + 1);
  }
};

ForestGraph build_primary_forest(const ReproductionGrid& grid);
ForestGraph build_dual_forest(const ReproductionGrid& grid);

/// Primary forest of the dual system (used by the flip-correspondence check).
ForestGraph build_primary_forest(const DualGrid& dual);

struct NoncrossingViolation {
  ForestEdge primary;
  ForestEdge dual;
};

struct NoncrossingReport {
  std::uint64_t checked = 0;
  std::vector<NoncrossingViolation> violations;
  bool pass = true;

  Json to_json() const;
};

/// Pairwise check over same-generation edges: a primary edge (x' -> x) and a
/// dual edge (z -> U_t(z)) are compatible iff (x' <= z) == (x <= U_t(z)),
/// which is the per-step duality stated geometrically.
NoncrossingReport check_noncrossing(const ForestGraph& primary, const ForestGraph& dual);
NoncrossingReport check_noncrossing(const ReproductionGrid& grid);

struct FlipReport {
  std::uint64_t compared = 0;
  std::uint64_t boundary_skipped = 0;
  std::uint64_t missing = 0;   // transformed dual edges absent from the dual system's forest
  std::uint64_t unmatched = 0; // dual system's forest edges absent from the transform
  bool pass = true;

  Json to_json() const;
};

/// The dual forest, time-reflected (t -> -t) and rank-shifted by +1, must
/// coincide with the primary forest of the dual system on the valid
/// interior (edges whose ranks stay inside the window on both sides).
FlipReport check_flip_correspondence(const ReproductionGrid& grid);

struct ExportOptions {
  bool leaf_ticks = true;   // draw childless nodes as tick marks
  double cell = 40.0;       // svg pixels per grid unit
  std::string metadata;     // embedded as an svg comment / dot comment
};

void export_dot(std::ostream& out, std::span<const ForestGraph> forests,
                const ExportOptions& options = {});
void export_svg(std::ostream& out, std::span<const ForestGraph> forests,
                const ExportOptions& options = {});

}  // namespace gwdual
