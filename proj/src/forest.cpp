#include "gwdual/forest.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <tuple>

namespace gwdual {

namespace {

/// Shared primary-forest construction: each child rank x born at t+1 links to
/// its unique parent min{y : row(y) >= x}. Works for primary rows and for the
/// rows of a dual system alike.
template <class RowAt>
ForestGraph primary_forest(Time t_start, std::size_t n_rows, std::size_t width, RowAt&& row_at) {
  ForestGraph f;
  f.kind = ForestGraph::Kind::Primary;
  f.t_start = t_start;
  f.t_end = t_start + static_cast<Time>(n_rows);
  f.width = width;
  f.shift = 0.0;
  for (std::size_t i = 0; i < n_rows; ++i) {
    const Time t = t_start + static_cast<Time>(i);
    const ReproductionMapping& row = row_at(i);
    f.edges.push_back(ForestEdge{t, 0, 0, false});  // the absorbing rank-0 line
    const Rank children = std::min<Rank>(width, row.total());
    const DualMapping parent_of = dual_mapping(row);
    for (Rank x = 1; x <= children; ++x) {
      f.edges.push_back(ForestEdge{t, parent_of.value(x), x, false});
    }
  }
  return f;
}

}  // namespace

ForestGraph build_primary_forest(const ReproductionGrid& grid) {
  const std::size_t n = static_cast<std::size_t>(grid.t_end() - grid.t_start());
  return primary_forest(grid.t_start(), n, grid.width(),
                        [&](std::size_t i) -> const ReproductionMapping& {
                          return grid.row(grid.t_start() + static_cast<Time>(i));
                        });
}

ForestGraph build_primary_forest(const DualGrid& dual) {
  return primary_forest(dual.t_start, dual.rows.size(), dual.source_width,
                        [&](std::size_t i) -> const ReproductionMapping& {
                          return dual.rows[i].map;
                        });
}

ForestGraph build_dual_forest(const ReproductionGrid& grid) {
  ForestGraph f;
  f.kind = ForestGraph::Kind::Dual;
  f.t_start = grid.t_start();
  f.t_end = grid.t_end();
  f.width = grid.width();
  f.shift = 0.5;
  for (Time t = grid.t_start(); t < grid.t_end(); ++t) {
    const ReproductionMapping& row = grid.row(t);
    for (Rank z = 0; z <= grid.width(); ++z) {
      const Rank target = row.value(z);
      f.edges.push_back(ForestEdge{t, z, target, target > grid.width()});
    }
  }
  return f;
}

Json NoncrossingReport::to_json() const {
  Json j;
  j["checked"] = checked;
  Json v = Json::array();
  for (const auto& viol : violations) {
    v.push_back({{"t", viol.primary.t},
                 {"primary", {viol.primary.from_x, viol.primary.to_x}},
                 {"dual", {viol.dual.from_x, viol.dual.to_x}}});
  }
  j["violations"] = std::move(v);
  j["pass"] = pass;
  return j;
}

NoncrossingReport check_noncrossing(const ForestGraph& primary, const ForestGraph& dual) {
  NoncrossingReport report;
  std::map<Time, std::vector<const ForestEdge*>> dual_by_t;
  for (const auto& e : dual.edges) dual_by_t[e.t].push_back(&e);
  for (const auto& p : primary.edges) {
    const auto it = dual_by_t.find(p.t);
    if (it == dual_by_t.end()) continue;
    for (const ForestEdge* d : it->second) {
      ++report.checked;
      const bool parents = p.from_x <= d->from_x;
      const bool children = p.to_x <= d->to_x;
      if (parents != children) {
        report.violations.push_back(NoncrossingViolation{p, *d});
      }
    }
  }
  report.pass = report.violations.empty();
  return report;
}

NoncrossingReport check_noncrossing(const ReproductionGrid& grid) {
  return check_noncrossing(build_primary_forest(grid), build_dual_forest(grid));
}

Json FlipReport::to_json() const {
  Json j;
  j["compared"] = compared;
  j["boundary_skipped"] = boundary_skipped;
  j["missing"] = missing;
  j["unmatched"] = unmatched;
  j["pass"] = pass;
  return j;
}

FlipReport check_flip_correspondence(const ReproductionGrid& grid) {
  FlipReport report;
  const Rank w = grid.width();
  const DualGrid dual = dual_grid(grid);

  using EdgeKey = std::tuple<Time, Rank, Rank>;  // (t, parent, child)

  // Dual-forest edges, time-reflected and rank-shifted by one.
  std::set<EdgeKey> transformed;
  for (const auto& e : build_dual_forest(grid).edges) {
    const Rank parent = e.to_x + 1;
    const Rank child = e.from_x + 1;
    if (parent > w || child > w) {
      ++report.boundary_skipped;
      continue;
    }
    transformed.insert({-e.t - 1, parent, child});
  }

  // Primary forest of the dual system, rank-0 line dropped.
  std::set<EdgeKey> dual_primary;
  for (const auto& e : build_primary_forest(dual).edges) {
    if (e.to_x == 0) continue;
    if (e.from_x > w || e.to_x > w) {
      ++report.boundary_skipped;
      continue;
    }
    dual_primary.insert({e.t, e.from_x, e.to_x});
  }

  for (const auto& key : dual_primary) {
    if (transformed.count(key)) {
      ++report.compared;
    } else {
      ++report.unmatched;
    }
  }
  for (const auto& key : transformed) {
    if (dual_primary.count(key)) continue;
    // A transformed edge with no counterpart is fine when its child lies
    // beyond the offspring the dual row can produce inside the window.
    const auto& [t, parent, child] = key;
    const Rank child_bound = std::min<Rank>(w, dual.row(t).map.total());
    if (child > child_bound) {
      ++report.boundary_skipped;
    } else {
      ++report.missing;
    }
  }
  report.pass = report.missing == 0 && report.unmatched == 0;
  return report;
}

// ---------------------------------------------------------------------------
// Export

namespace {

const char* edge_color(ForestGraph::Kind kind) {
  return kind == ForestGraph::Kind::Primary ? "black" : "#cc2222";
}

std::set<std::pair<Time, Rank>> touched_nodes(const ForestGraph& f) {
  std::set<std::pair<Time, Rank>> nodes;
  for (const auto& e : f.edges) {
    nodes.insert({e.t, e.from_x});
    if (!e.clipped) nodes.insert({e.t + 1, e.to_x});
  }
  return nodes;
}

}  // namespace

void export_dot(std::ostream& out, std::span<const ForestGraph> forests,
                const ExportOptions& options) {
  out << "digraph lineages {\n";
  if (!options.metadata.empty()) out << "  // " << options.metadata << "\n";
  out << "  rankdir=BT;\n  node [shape=point, width=0.08];\n";
  if (!forests.empty()) {
    const ForestGraph& f0 = forests.front();
    for (Time t = f0.t_start; t <= f0.t_end; ++t) {
      for (Rank x = 0; x <= f0.width; ++x) {
        out << "  \"" << t << "_" << x << "\";\n";
      }
    }
  }
  for (const auto& f : forests) {
    for (const auto& e : f.edges) {
      if (e.clipped) continue;  // no in-window target node
      out << "  \"" << e.t << "_" << e.from_x << "\" -> \"" << (e.t + 1) << "_" << e.to_x
          << "\" [color=" << edge_color(f.kind) << "];\n";
    }
  }
  out << "}\n";
}

void export_svg(std::ostream& out, std::span<const ForestGraph> forests,
                const ExportOptions& options) {
  if (forests.empty()) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1\" height=\"1\"/>\n";
    return;
  }
  const ForestGraph& f0 = forests.front();
  const double cell = options.cell;
  const double margin = cell;
  const std::size_t w = f0.width;
  const Time span = f0.t_end - f0.t_start;
  const double width_px = margin * 2 + cell * (w + 1);
  const double height_px = margin * 2 + cell * static_cast<double>(span);

  const auto px = [&](double x, double shift) { return margin + (x + shift) * cell; };
  const auto py = [&](double t) {
    return margin + (static_cast<double>(f0.t_end) - t) * cell;
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px << "\" height=\""
      << height_px << "\" viewBox=\"0 0 " << width_px << " " << height_px << "\">\n";
  if (!options.metadata.empty()) out << "<!-- " << options.metadata << " -->\n";

  // Dotted background grid, rank on the horizontal axis, time upward.
  out << "<g stroke=\"#bbbbbb\" stroke-width=\"0.5\" stroke-dasharray=\"1,3\">\n";
  for (Rank x = 0; x <= w; ++x) {
    out << "<line x1=\"" << px(x, 0) << "\" y1=\"" << py(f0.t_start) << "\" x2=\"" << px(x, 0)
        << "\" y2=\"" << py(f0.t_end) << "\"/>\n";
  }
  for (Time t = f0.t_start; t <= f0.t_end; ++t) {
    out << "<line x1=\"" << px(0, 0) << "\" y1=\"" << py(t) << "\" x2=\"" << px(w, 0)
        << "\" y2=\"" << py(t) << "\"/>\n";
  }
  out << "</g>\n";

  out << "<g font-size=\"" << cell * 0.3 << "\" fill=\"#444444\">\n";
  for (Time t = f0.t_start; t <= f0.t_end; ++t) {
    out << "<text x=\"" << margin * 0.2 << "\" y=\"" << py(t) + cell * 0.1 << "\">" << t
        << "</text>\n";
  }
  for (Rank x = 0; x <= w; ++x) {
    out << "<text x=\"" << px(x, 0) - cell * 0.1 << "\" y=\"" << py(f0.t_start) + cell * 0.5
        << "\">" << x << "</text>\n";
  }
  out << "</g>\n";

  for (const auto& f : forests) {
    out << "<g stroke=\"" << edge_color(f.kind) << "\" stroke-width=\"1.5\" fill=\"none\">\n";
    for (const auto& e : f.edges) {
      double x0 = static_cast<double>(e.from_x);
      double t0 = static_cast<double>(e.t);
      double x1 = static_cast<double>(e.to_x);
      double t1 = static_cast<double>(e.t) + 1.0;
      if (e.clipped) {
        // Cut the segment at the right boundary of the rank window.
        const double frac = (static_cast<double>(f.width) - x0) / (x1 - x0);
        x1 = static_cast<double>(f.width);
        t1 = t0 + frac;
      }
      out << "<line x1=\"" << px(x0, f.shift) << "\" y1=\"" << py(t0) << "\" x2=\""
          << px(x1, f.shift) << "\" y2=\"" << py(t1) << "\"/>\n";
    }
    if (options.leaf_ticks) {
      const auto touched = touched_nodes(f);
      for (Time t = f.t_start; t <= f.t_end; ++t) {
        for (Rank x = 0; x <= f.width; ++x) {
          if (touched.count({t, x})) continue;
          out << "<line x1=\"" << px(static_cast<double>(x), f.shift) << "\" y1=\""
              << py(static_cast<double>(t)) - cell * 0.06 << "\" x2=\""
              << px(static_cast<double>(x), f.shift) << "\" y2=\""
              << py(static_cast<double>(t)) + cell * 0.06 << "\"/>\n";
        }
      }
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace gwdual
