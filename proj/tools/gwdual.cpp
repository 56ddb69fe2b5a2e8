#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gwdual/analysis.hpp"
#include "gwdual/duality.hpp"
#include "gwdual/embedding.hpp"
#include "gwdual/forest.hpp"
#include "gwdual/grid.hpp"
#include "gwdual/parallel.hpp"
#include "gwdual/rng.hpp"

namespace {

using gwdual::Json;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gwdual::IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw gwdual::IoError(path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gwdual::IoError("cannot write " + path);
  out << text;
}

/// Reports go to stdout unless --out names a file.
void emit(const Json& j, const std::string& out_path) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
}

/// Optional config file; command-line flags win over its keys.
struct ConfigLayer {
  Json values = Json::object();

  void load(const std::string& path) {
    if (!path.empty()) values = read_json_file(path);
  }
  template <class T>
  void fill(const CLI::Option* opt, const char* key, T& slot) const {
    if (opt->count() == 0 && values.contains(key)) slot = values.at(key).get<T>();
  }
};

gwdual::OffspringLawSpec load_law(const std::string& law_file, const std::string& law_inline,
                                  const ConfigLayer& config) {
  if (!law_inline.empty()) {
    return gwdual::OffspringLawSpec::from_json(Json::parse(law_inline));
  }
  if (!law_file.empty()) {
    return gwdual::OffspringLawSpec::from_json(read_json_file(law_file));
  }
  if (config.values.contains("law")) {
    const Json& j = config.values.at("law");
    if (j.is_string()) {
      return gwdual::OffspringLawSpec::from_json(read_json_file(j.get<std::string>()));
    }
    return gwdual::OffspringLawSpec::from_json(j);
  }
  throw gwdual::InvalidLaw("no law given: use --law, --law-json or a config file");
}

std::string forest_metadata(const gwdual::ReproductionGrid& grid) {
  std::ostringstream meta;
  meta << "seed=" << grid.seed() << " law=" << grid.law().family() << " window=["
       << grid.t_start() << "," << grid.t_end() << ") width=" << grid.width();
  return meta.str();
}

int run_verify_grid(const gwdual::ReproductionGrid& grid, const std::string& out) {
  const auto exact = gwdual::verify_all_windows(grid, grid.t_start(), grid.t_end());
  const auto noncross = gwdual::check_noncrossing(grid);
  const auto flip = gwdual::check_flip_correspondence(grid);
  Json j;
  j["exact_identities"] = exact.to_json();
  j["noncrossing"] = noncross.to_json();
  j["flip_correspondence"] = flip.to_json();
  const bool pass = exact.pass && noncross.pass && flip.pass;
  j["pass"] = pass;
  emit(j, out);
  return pass ? kOk : kViolation;
}

int run_verify_sweep(const gwdual::OffspringLawSpec& law, std::uint64_t seeds,
                     std::uint64_t master_seed, std::size_t width, gwdual::Time max_len,
                     const std::string& out) {
  struct SweepSlot {
    gwdual::VerifyReport exact;
    gwdual::NoncrossingReport noncross;
    gwdual::FlipReport flip;
  };
  std::vector<SweepSlot> slots(seeds);
  gwdual::parallel_for(seeds, [&](std::size_t i) {
    const std::uint64_t grid_seed =
        gwdual::derive_key(gwdual::derive_key(master_seed, gwdual::stream_tag::kSweep), i);
    const gwdual::Time len =
        1 + static_cast<gwdual::Time>(i % static_cast<std::size_t>(max_len));
    const auto grid = gwdual::sample_grid(law, 0, len, width, grid_seed);
    slots[i].exact = gwdual::verify_all_windows(grid, 0, len);
    slots[i].noncross = gwdual::check_noncrossing(grid);
    slots[i].flip = gwdual::check_flip_correspondence(grid);
  });
  gwdual::VerifyReport exact;
  std::uint64_t noncross_checked = 0, noncross_violations = 0;
  std::uint64_t flip_compared = 0, flip_failures = 0;
  for (const auto& s : slots) {
    exact.merge(s.exact);
    noncross_checked += s.noncross.checked;
    noncross_violations += s.noncross.violations.size();
    flip_compared += s.flip.compared;
    flip_failures += s.flip.missing + s.flip.unmatched;
  }
  Json j;
  j["grids"] = seeds;
  j["exact_identities"] = exact.to_json();
  j["noncrossing"] = Json{{"checked", noncross_checked},
                          {"violations", noncross_violations},
                          {"pass", noncross_violations == 0}};
  j["flip_correspondence"] = Json{{"compared", flip_compared},
                                  {"failures", flip_failures},
                                  {"pass", flip_failures == 0}};
  const bool pass = exact.pass && noncross_violations == 0 && flip_failures == 0;
  j["pass"] = pass;
  emit(j, out);
  return pass ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rank-dependent branching systems and their pathwise duals"};
  app.require_subcommand(1);
  int rc = kOk;

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "sample a reproduction grid and write it as JSON");
  struct {
    std::string config, law, law_json, out;
    std::vector<gwdual::Time> window{0, 8};
    std::size_t width = 64;
    std::uint64_t seed = 1;
  } sim_opt;
  sim->add_option("--config", sim_opt.config, "JSON config file");
  sim->add_option("--law", sim_opt.law, "law spec file");
  sim->add_option("--law-json", sim_opt.law_json, "inline law spec");
  auto* sim_window =
      sim->add_option("--window", sim_opt.window, "time window A B (B exclusive)")->expected(2);
  auto* sim_width = sim->add_option("--width", sim_opt.width, "rank window");
  auto* sim_seed = sim->add_option("--seed", sim_opt.seed, "master seed");
  sim->add_option("--out", sim_opt.out, "output file (default stdout)");
  sim->callback([&] {
    ConfigLayer config;
    config.load(sim_opt.config);
    config.fill(sim_window, "window", sim_opt.window);
    config.fill(sim_width, "width", sim_opt.width);
    config.fill(sim_seed, "seed", sim_opt.seed);
    if (sim_opt.out.empty() && config.values.contains("out")) {
      sim_opt.out = config.values.at("out").get<std::string>();
    }
    if (sim_opt.window.size() != 2) throw gwdual::WindowError("--window needs two values");
    const auto law = load_law(sim_opt.law, sim_opt.law_json, config);
    const auto grid = gwdual::sample_grid(law, sim_opt.window[0], sim_opt.window[1],
                                          sim_opt.width, sim_opt.seed);
    emit(grid.to_json(), sim_opt.out);
  });

  // ---- dual ----
  auto* dual = app.add_subcommand("dual", "compute the pathwise dual of a stored grid");
  struct {
    std::string grid, out;
  } dual_opt;
  dual->add_option("--grid", dual_opt.grid, "grid JSON file")->required();
  dual->add_option("--out", dual_opt.out, "output file (default stdout)");
  dual->callback([&] {
    const auto grid = gwdual::ReproductionGrid::from_json(read_json_file(dual_opt.grid));
    emit(gwdual::dual_grid(grid).to_json(), dual_opt.out);
  });

  // ---- law-check ----
  auto* law_check =
      app.add_subcommand("law-check", "validate a law spec and echo it normalized");
  struct {
    std::string law, law_json, out;
  } lc_opt;
  law_check->add_option("--law", lc_opt.law, "law spec file");
  law_check->add_option("--law-json", lc_opt.law_json, "inline law spec");
  law_check->add_option("--out", lc_opt.out, "output file (default stdout)");
  law_check->callback([&] {
    const auto law = load_law(lc_opt.law, lc_opt.law_json, ConfigLayer{});
    emit(law.to_json(), lc_opt.out);
  });

  // ---- verify ----
  auto* verify = app.add_subcommand(
      "verify", "check the exact duality identities (stored grid or a seed sweep)");
  struct {
    std::string config, grid, law, law_json, out;
    std::uint64_t seeds = 100;
    std::uint64_t seed = 1;
    std::size_t width = 32;
    gwdual::Time window_len = 8;
  } ver_opt;
  verify->add_option("--config", ver_opt.config, "JSON config file");
  verify->add_option("--grid", ver_opt.grid, "grid JSON file to verify");
  verify->add_option("--law", ver_opt.law, "law spec file for a sweep");
  verify->add_option("--law-json", ver_opt.law_json, "inline law spec for a sweep");
  auto* ver_seeds = verify->add_option("--seeds", ver_opt.seeds, "number of sweep grids");
  auto* ver_seed = verify->add_option("--seed", ver_opt.seed, "master seed");
  auto* ver_width = verify->add_option("--width", ver_opt.width, "rank window");
  auto* ver_len =
      verify->add_option("--window-len", ver_opt.window_len, "maximum sweep window length");
  verify->add_option("--out", ver_opt.out, "output file (default stdout)");
  verify->callback([&] {
    ConfigLayer config;
    config.load(ver_opt.config);
    config.fill(ver_seeds, "seeds", ver_opt.seeds);
    config.fill(ver_seed, "seed", ver_opt.seed);
    config.fill(ver_width, "width", ver_opt.width);
    config.fill(ver_len, "window_len", ver_opt.window_len);
    if (!ver_opt.grid.empty()) {
      rc = run_verify_grid(gwdual::ReproductionGrid::from_json(read_json_file(ver_opt.grid)),
                           ver_opt.out);
      return;
    }
    const auto law = load_law(ver_opt.law, ver_opt.law_json, config);
    rc = run_verify_sweep(law, ver_opt.seeds, ver_opt.seed, ver_opt.width, ver_opt.window_len,
                          ver_opt.out);
  });

  // ---- analyze ----
  auto* analyze = app.add_subcommand("analyze", "distributional consequences of duality");
  analyze->require_subcommand(1);
  struct {
    std::string config, law, law_json, out;
    gwdual::Rank max_rank = 8;
    std::uint64_t samples = 100000;
    std::uint64_t seed = 1;
    double p = 0.5, q = 0.8;
    double p0 = 0.3, p1 = 0.3, p2 = 0.4;
  } an_opt;

  auto* qhat = analyze->add_subcommand("qhat", "positivity schedule of the dual offspring");
  qhat->add_option("--config", an_opt.config, "JSON config file");
  qhat->add_option("--out", an_opt.out, "output file (default stdout)");
  qhat->add_option("--law", an_opt.law, "law spec file (iid_gw or linear_fractional)");
  qhat->add_option("--law-json", an_opt.law_json, "inline law spec");
  qhat->add_option("--max-rank", an_opt.max_rank, "largest dual rank");
  qhat->callback([&] {
    ConfigLayer config;
    config.load(an_opt.config);
    const auto law = load_law(an_opt.law, an_opt.law_json, config);
    gwdual::GwLawTable table;
    if (const auto* iid = std::get_if<gwdual::IidGwLaw>(&law.variant())) {
      table = iid->table;
    } else if (const auto* lf = std::get_if<gwdual::LinearFractionalLaw>(&law.variant())) {
      table = lf->at(0).to_table();
    } else {
      throw gwdual::InvalidLaw("qhat needs an iid_gw or constant linear_fractional law");
    }
    const auto schedule = gwdual::qhat_recursion(table, an_opt.max_rank);
    Json j;
    j["p0"] = table.p0();
    j["qhat"] = schedule.values;
    emit(j, an_opt.out);
  });

  auto* dual_dist = analyze->add_subcommand(
      "dual-dist", "Monte Carlo dual marginals against the closed-form law");
  dual_dist->add_option("--config", an_opt.config, "JSON config file");
  dual_dist->add_option("--out", an_opt.out, "output file (default stdout)");
  dual_dist->add_option("--law", an_opt.law, "law spec file (iid_gw)");
  dual_dist->add_option("--law-json", an_opt.law_json, "inline law spec");
  dual_dist->add_option("--max-rank", an_opt.max_rank, "largest dual rank");
  dual_dist->add_option("--samples", an_opt.samples, "Monte Carlo replicates");
  dual_dist->add_option("--seed", an_opt.seed, "master seed");
  dual_dist->callback([&] {
    ConfigLayer config;
    config.load(an_opt.config);
    const auto law = load_law(an_opt.law, an_opt.law_json, config);
    const auto* iid = std::get_if<gwdual::IidGwLaw>(&law.variant());
    if (!iid) throw gwdual::InvalidLaw("dual-dist needs an iid_gw law");
    const auto report =
        gwdual::dual_marginals_check(iid->table, an_opt.max_rank, an_opt.samples, an_opt.seed);
    emit(report.to_json(), an_opt.out);
    rc = report.pass ? kOk : kViolation;
  });

  auto* th2 = analyze->add_subcommand("theorem2", "dual of a linear-fractional law");
  th2->add_option("--config", an_opt.config, "JSON config file");
  th2->add_option("--out", an_opt.out, "output file (default stdout)");
  th2->add_option("--p", an_opt.p, "linear-fractional p");
  th2->add_option("--q", an_opt.q, "linear-fractional q");
  th2->add_option("--samples", an_opt.samples, "Monte Carlo replicates");
  th2->add_option("--seed", an_opt.seed, "master seed");
  th2->callback([&] {
    const auto report =
        gwdual::theorem2_check(an_opt.p, an_opt.q, 4, an_opt.samples, an_opt.seed);
    emit(report.to_json(), an_opt.out);
    rc = report.pass ? kOk : kViolation;
  });

  auto* bd = analyze->add_subcommand("bd-cases", "two-child reproduction subcases");
  bd->add_option("--config", an_opt.config, "JSON config file");
  bd->add_option("--out", an_opt.out, "output file (default stdout)");
  bd->add_option("--p0", an_opt.p0, "weight of zero offspring");
  bd->add_option("--p1", an_opt.p1, "weight of one offspring");
  bd->add_option("--p2", an_opt.p2, "weight of two offspring");
  bd->add_option("--samples", an_opt.samples, "Monte Carlo replicates");
  bd->add_option("--seed", an_opt.seed, "master seed");
  bd->callback([&] {
    const auto report = gwdual::birthdeath_subcases_check(an_opt.p0, an_opt.p1, an_opt.p2,
                                                          an_opt.samples, an_opt.seed);
    emit(report.to_json(), an_opt.out);
    rc = report.pass ? kOk : kViolation;
  });

  // ---- embed ----
  auto* embed =
      app.add_subcommand("embed", "linear birth-death embedding with piecewise-constant rates");
  struct {
    std::string config, lambda = "1.0", mu = "0.5", out;
    double t0 = 0.0, t1 = 1.0;
    int panels = 4096;
    std::uint64_t samples = 0;
    std::uint64_t seed = 1;
  } em_opt;
  embed->add_option("--config", em_opt.config, "JSON config file");
  auto* em_lambda =
      embed->add_option("--lambda", em_opt.lambda, "birth rate: value or bp:value list");
  auto* em_mu = embed->add_option("--mu", em_opt.mu, "death rate: value or bp:value list");
  auto* em_t0 = embed->add_option("--t0", em_opt.t0, "interval start");
  auto* em_t1 = embed->add_option("--t1", em_opt.t1, "interval end");
  auto* em_panels = embed->add_option("--panels", em_opt.panels, "Simpson panels");
  auto* em_samples =
      embed->add_option("--samples", em_opt.samples, "Monte Carlo replicates (0 disables)");
  embed->add_option("--seed", em_opt.seed, "master seed");
  embed->add_option("--out", em_opt.out, "output file (default stdout)");
  embed->callback([&] {
    ConfigLayer config;
    config.load(em_opt.config);
    config.fill(em_lambda, "lambda", em_opt.lambda);
    config.fill(em_mu, "mu", em_opt.mu);
    config.fill(em_t0, "t0", em_opt.t0);
    config.fill(em_t1, "t1", em_opt.t1);
    config.fill(em_panels, "panels", em_opt.panels);
    config.fill(em_samples, "samples", em_opt.samples);
    gwdual::RateSchedule rates{gwdual::PiecewiseConstantRate::parse(em_opt.lambda),
                               gwdual::PiecewiseConstantRate::parse(em_opt.mu)};
    const auto kp = gwdual::kendall_params(rates, em_opt.t0, em_opt.t1, em_opt.panels);
    Json j;
    j["rho"] = kp.rho;
    j["q"] = kp.q;
    j["p"] = kp.p;
    bool pass = true;
    if (em_opt.samples > 0) {
      const gwdual::LfParams lf = kp.lf();
      std::map<gwdual::Rank, std::uint64_t> counts;
      for (std::uint64_t i = 0; i < em_opt.samples; ++i) {
        auto rng =
            gwdual::RngStream::from_words(em_opt.seed, gwdual::stream_tag::kBirthDeath, i, 0);
        counts[gwdual::simulate_bd(rates, em_opt.t0, em_opt.t1, 1, rng).count] += 1;
      }
      double max_z = 0.0;
      Json cells = Json::array();
      for (gwdual::Rank k = 0;; ++k) {
        const double expected = lf.prob(k);
        if (expected * static_cast<double>(em_opt.samples) < 25.0 && k > 0) break;
        const auto it = counts.find(k);
        const double observed = (it == counts.end() ? 0.0 : static_cast<double>(it->second)) /
                                static_cast<double>(em_opt.samples);
        const double se =
            std::sqrt(expected * (1.0 - expected) / static_cast<double>(em_opt.samples));
        const double z = se > 0.0 ? std::abs(observed - expected) / se : 0.0;
        max_z = std::max(max_z, z);
        cells.push_back(Json{{"k", k}, {"observed", observed}, {"expected", expected}});
      }
      pass = max_z <= 4.0;
      j["mc_comparison"] =
          Json{{"samples", em_opt.samples}, {"max_z", max_z}, {"cells", cells}, {"pass", pass}};
    }
    emit(j, em_opt.out);
    rc = pass ? kOk : kViolation;
  });

  // ---- forest ----
  auto* forest = app.add_subcommand("forest", "export lineage forests as DOT or SVG");
  struct {
    std::string config, grid, out, format = "svg", kind = "overlay";
    bool no_ticks = false;
  } fo_opt;
  forest->add_option("--config", fo_opt.config, "JSON config file");
  forest->add_option("--grid", fo_opt.grid, "grid JSON file")->required();
  auto* fo_format = forest->add_option("--format", fo_opt.format, "dot or svg");
  auto* fo_kind = forest->add_option("--kind", fo_opt.kind, "primary, dual or overlay");
  forest->add_option("--out", fo_opt.out, "output file (default stdout)");
  forest->add_flag("--no-ticks", fo_opt.no_ticks, "skip childless-node tick marks");
  forest->callback([&] {
    ConfigLayer config;
    config.load(fo_opt.config);
    config.fill(fo_format, "format", fo_opt.format);
    config.fill(fo_kind, "kind", fo_opt.kind);
    const auto grid = gwdual::ReproductionGrid::from_json(read_json_file(fo_opt.grid));
    std::vector<gwdual::ForestGraph> forests;
    if (fo_opt.kind == "primary" || fo_opt.kind == "overlay") {
      forests.push_back(gwdual::build_primary_forest(grid));
    }
    if (fo_opt.kind == "dual" || fo_opt.kind == "overlay") {
      forests.push_back(gwdual::build_dual_forest(grid));
    }
    if (forests.empty()) throw gwdual::DomainError("unknown forest kind: " + fo_opt.kind);
    gwdual::ExportOptions options;
    options.leaf_ticks = !fo_opt.no_ticks;
    options.metadata = forest_metadata(grid);
    std::ostringstream buffer;
    if (fo_opt.format == "dot") {
      gwdual::export_dot(buffer, forests, options);
    } else if (fo_opt.format == "svg") {
      gwdual::export_svg(buffer, forests, options);
    } else {
      throw gwdual::DomainError("unknown format: " + fo_opt.format);
    }
    if (fo_opt.out.empty()) {
      std::cout << buffer.str();
    } else {
      write_text(fo_opt.out, buffer.str());
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  } catch (const gwdual::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return rc;
}
