#include "gwdual/duality.hpp"

#include <string>

namespace gwdual {

DualMapping dual_mapping(const ReproductionMapping& u, double defect_slack) {
  const std::size_t w = u.width();
  const Rank valid_to = u.total();
  std::vector<Rank> v_offspring;
  v_offspring.reserve(static_cast<std::size_t>(valid_to));
  Rank y = 0;
  Rank prev = 0;
  for (Rank x = 1; x <= valid_to; ++x) {
    while (u.value(y) < x) ++y;  // terminates: u.value(w) = valid_to >= x
    v_offspring.push_back(y - prev);
    prev = y;
  }
  DualMapping d;
  d.map = ReproductionMapping(v_offspring);
  d.valid_to = valid_to;
  d.source_width = w;
  // Heuristic saturation flag: the dual's largest value stays strictly inside
  // the window while the row's total offspring is small. Flag only; rows with
  // genuinely unbounded offspring cannot be represented here.
  const Rank top = d.map.total();
  d.potentially_defective =
      top < w && static_cast<double>(valid_to) < static_cast<double>(w) * defect_slack;
  return d;
}

const DualMapping& DualGrid::row(Time t) const {
  if (t < t_start || t >= t_end()) {
    throw WindowError("time " + std::to_string(t) + " outside dual window");
  }
  return rows[static_cast<std::size_t>(t - t_start)];
}

DualGrid dual_grid(const ReproductionGrid& grid) {
  return dual_grid(grid, -grid.t_end(), -grid.t_start());
}

DualGrid dual_grid(const ReproductionGrid& grid, Time a, Time b) {
  if (!grid.covers(-b, -a)) {
    throw WindowError("primary grid does not cover the requested dual window");
  }
  DualGrid d;
  d.t_start = a;
  d.source_width = grid.width();
  d.rows.reserve(static_cast<std::size_t>(b - a));
  for (Time t = a; t < b; ++t) {
    d.rows.push_back(dual_mapping(grid.row(-t - 1)));
  }
  return d;
}

std::optional<Rank> compose_dual(const DualGrid& dual, Time a, Time b, Rank x) {
  if (a > b) throw WindowError("composition needs a <= b");
  if (a != b && !dual.covers(a, b)) {
    throw WindowError("dual grid does not cover the requested window");
  }
  Rank cur = x;
  for (Time t = a; t < b; ++t) {
    const DualMapping& row = dual.row(t);
    if (cur > row.valid_to) return std::nullopt;
    cur = row.value(cur);
  }
  return cur;
}

std::optional<Rank> compose_reverse(const DualGrid& dual, Time a, Time b, Rank x) {
  return compose_dual(dual, -b, -a, x);
}

void VerifyReport::merge(const VerifyReport& other) {
  checked += other.checked;
  truncated_skipped += other.truncated_skipped;
  violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  pass = pass && other.pass;
}

Json VerifyReport::to_json() const {
  Json j;
  j["checked"] = checked;
  Json v = Json::array();
  for (const auto& viol : violations) {
    v.push_back({{"x", viol.x},
                 {"y", viol.y},
                 {"a", viol.a},
                 {"b", viol.b},
                 {"lhs", viol.lhs},
                 {"rhs", viol.rhs}});
  }
  j["violations"] = std::move(v);
  j["truncated_skipped"] = truncated_skipped;
  j["pass"] = pass;
  return j;
}

namespace {

VerifyReport verify_siegmund_impl(const ReproductionGrid& grid, const DualGrid& dual, Time a,
                                  Time b) {
  VerifyReport report;
  const Rank w = grid.width();
  std::vector<std::optional<Rank>> forward(w + 1), reverse(w + 1);
  for (Rank y = 0; y <= w; ++y) forward[y] = compose(grid, a, b, y);
  for (Rank x = 0; x <= w; ++x) reverse[x] = compose_dual(dual, -b, -a, x);
  for (Rank x = 0; x <= w; ++x) {
    for (Rank y = 0; y <= w; ++y) {
      if (!reverse[x] || !forward[y]) {
        ++report.truncated_skipped;
        continue;
      }
      ++report.checked;
      const bool lhs = *reverse[x] <= y;
      const bool rhs = x <= *forward[y];
      if (lhs != rhs) {
        report.violations.push_back(Violation{x, y, a, b, *reverse[x], *forward[y]});
      }
    }
  }
  report.pass = report.violations.empty();
  return report;
}

VerifyReport verify_twofold_impl(const ReproductionGrid& grid,
                                 const std::vector<ReproductionMapping>& twofold, Time a,
                                 Time b) {
  VerifyReport report;
  const Rank w = grid.width();
  const Time base = grid.t_start();
  for (Rank x = 1; x <= w; ++x) {
    // Compose the twofold rows at x.
    std::optional<Rank> lhs = x;
    for (Time t = a; t < b && lhs; ++t) {
      const auto& row = twofold[static_cast<std::size_t>(t - base)];
      if (*lhs > row.width()) {
        lhs = std::nullopt;
      } else {
        lhs = row.value(*lhs);
      }
    }
    const std::optional<Rank> inner = compose(grid, a, b, x - 1);
    if (!lhs || !inner) {
      ++report.truncated_skipped;
      continue;
    }
    ++report.checked;
    const Rank rhs = *inner + 1;
    if (*lhs != rhs) {
      report.violations.push_back(Violation{x, x - 1, a, b, *lhs, rhs});
    }
  }
  report.pass = report.violations.empty();
  return report;
}

std::vector<ReproductionMapping> twofold_rows(const ReproductionGrid& grid) {
  std::vector<ReproductionMapping> rows;
  rows.reserve(static_cast<std::size_t>(grid.t_end() - grid.t_start()));
  for (Time t = grid.t_start(); t < grid.t_end(); ++t) {
    rows.push_back(dual_mapping(dual_mapping(grid.row(t)).map).map);
  }
  return rows;
}

}  // namespace

VerifyReport verify_siegmund(const ReproductionGrid& grid, Time a, Time b) {
  if (!grid.covers(a, b)) throw WindowError("verify window not covered by the grid");
  const DualGrid dual = dual_grid(grid, -b, -a);
  return verify_siegmund_impl(grid, dual, a, b);
}

VerifyReport verify_twofold_shift(const ReproductionGrid& grid, Time a, Time b) {
  if (!grid.covers(a, b)) throw WindowError("verify window not covered by the grid");
  return verify_twofold_impl(grid, twofold_rows(grid), a, b);
}

VerifyReport verify_all_windows(const ReproductionGrid& grid, Time a, Time b) {
  if (!grid.covers(a, b)) throw WindowError("verify window not covered by the grid");
  const DualGrid dual = dual_grid(grid);
  const auto twofold = twofold_rows(grid);
  VerifyReport report;
  for (Time lo = a; lo <= b; ++lo) {
    for (Time hi = lo; hi <= b; ++hi) {
      report.merge(verify_siegmund_impl(grid, dual, lo, hi));
      report.merge(verify_twofold_impl(grid, twofold, lo, hi));
    }
  }
  return report;
}

BlockDecomposition block_decompose(const ReproductionMapping& u) {
  BlockDecomposition blocks;
  Rank zeros = 0;
  for (Rank x = 1; x <= u.width(); ++x) {
    const Rank count = u.offspring(x);
    if (count == 0) {
      ++zeros;
    } else {
      blocks.xi.push_back(zeros);
      blocks.eta.push_back(count - 1);
      zeros = 0;
    }
  }
  blocks.trailing_zeros = zeros;
  blocks.complete = zeros == 0;
  return blocks;
}

DualMapping block_assemble_dual(const BlockDecomposition& blocks, std::size_t source_width,
                                double defect_slack) {
  std::vector<Rank> v;
  for (std::size_t i = 0; i < blocks.xi.size(); ++i) {
    v.push_back(blocks.xi[i] + 1);
    v.insert(v.end(), static_cast<std::size_t>(blocks.eta[i]), 0);
  }
  DualMapping d;
  d.map = ReproductionMapping(v);
  d.valid_to = v.size();
  d.source_width = source_width;
  const Rank top = d.map.total();
  d.potentially_defective = top < source_width &&
                            static_cast<double>(d.valid_to) <
                                static_cast<double>(source_width) * defect_slack;
  return d;
}

Json DualGrid::to_json() const {
  Json j;
  j["t_start"] = t_start;
  j["t_end"] = t_end();
  j["source_width"] = source_width;
  Json valid = Json::array();
  Json out_rows = Json::array();
  for (const auto& r : rows) {
    valid.push_back(r.valid_to);
    out_rows.push_back(r.map.offspring_values());
  }
  j["valid_to"] = std::move(valid);
  j["rows"] = std::move(out_rows);
  return j;
}

}  // namespace gwdual
