#include "gwdual/grid.hpp"

#include <string>

#include "gwdual/parallel.hpp"
#include "gwdual/rng.hpp"

namespace gwdual {

ReproductionGrid::ReproductionGrid(Time t_start, std::vector<ReproductionMapping> rows,
                                   std::size_t width, std::uint64_t seed, OffspringLawSpec law)
    : t_start_(t_start), width_(width), seed_(seed), law_(std::move(law)), rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (r.width() != width_) {
      throw WindowError("grid rows must all have the configured width");
    }
  }
}

const ReproductionMapping& ReproductionGrid::row(Time t) const {
  if (t < t_start() || t >= t_end()) {
    throw WindowError("time " + std::to_string(t) + " outside grid window [" +
                      std::to_string(t_start()) + ", " + std::to_string(t_end()) + ")");
  }
  return rows_[static_cast<std::size_t>(t - t_start_)];
}

ReproductionGrid sample_grid(const OffspringLawSpec& law, Time t_start, Time t_end,
                             std::size_t width, std::uint64_t seed) {
  if (t_start >= t_end) throw WindowError("grid window must satisfy t_start < t_end");
  const std::size_t n = static_cast<std::size_t>(t_end - t_start);
  std::vector<ReproductionMapping> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const Time t = t_start + static_cast<Time>(i);
    std::vector<Rank> u(width);
    for (Rank x = 1; x <= width; ++x) {
      RngStream cell = RngStream::for_cell(seed, t, x);
      u[x - 1] = law.sample(t, x, cell);
    }
    rows[i] = ReproductionMapping(u);
  });
  return ReproductionGrid(t_start, std::move(rows), width, seed, law);
}

std::optional<Rank> compose(const ReproductionGrid& grid, Time a, Time b, Rank x) {
  if (a > b) throw WindowError("composition needs a <= b");
  if (a != b && !grid.covers(a, b)) {
    throw WindowError("grid does not cover the requested window");
  }
  if (x > grid.width()) throw RankOverflow("composition start rank exceeds the window");
  Rank cur = x;
  for (Time t = a; t < b; ++t) {
    if (cur > grid.width()) return std::nullopt;
    cur = grid.row(t).value(cur);
  }
  return cur;
}

Trajectory simulate_trajectory(const ReproductionGrid& grid, Time a, Rank z, Time horizon) {
  if (a > horizon) throw WindowError("trajectory needs start <= horizon");
  if (a < grid.t_start() || horizon > grid.t_end()) {
    throw WindowError("trajectory window not covered by the grid");
  }
  if (z > grid.width()) {
    throw RankOverflow("start state " + std::to_string(z) + " exceeds width " +
                       std::to_string(grid.width()));
  }
  Trajectory traj;
  traj.start_time = a;
  traj.start_state = z;
  traj.states.push_back(z);
  for (Time t = a; t < horizon; ++t) {
    const Rank cur = traj.states.back();
    if (cur > grid.width()) {
      traj.truncated = true;
      break;
    }
    traj.states.push_back(grid.row(t).value(cur));
  }
  if (traj.states.back() > grid.width()) traj.truncated = true;
  return traj;
}

Json ReproductionGrid::to_json() const {
  Json j;
  j["t_start"] = t_start();
  j["t_end"] = t_end();
  j["width"] = width();
  j["seed"] = seed();
  j["law"] = law().to_json();
  Json rows = Json::array();
  for (const auto& r : rows_) rows.push_back(r.offspring_values());
  j["rows"] = std::move(rows);
  return j;
}

ReproductionGrid ReproductionGrid::from_json(const Json& j) {
  const Time t_start = j.at("t_start").get<Time>();
  const Time t_end = j.at("t_end").get<Time>();
  const std::size_t width = j.at("width").get<std::size_t>();
  const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
  OffspringLawSpec law = OffspringLawSpec::from_json(j.at("law"));
  const auto& rows_json = j.at("rows");
  if (!rows_json.is_array() || rows_json.size() != static_cast<std::size_t>(t_end - t_start)) {
    throw WindowError("grid file row count does not match its window");
  }
  std::vector<ReproductionMapping> rows;
  rows.reserve(rows_json.size());
  for (const auto& row : rows_json) {
    const auto raw = row.get<std::vector<std::int64_t>>();
    if (raw.size() != width) throw WindowError("grid file row width mismatch");
    rows.push_back(make_mapping(raw));
  }
  return ReproductionGrid(t_start, std::move(rows), width, seed, std::move(law));
}

}  // namespace gwdual
