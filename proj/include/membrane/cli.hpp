#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "membrane/config.hpp"
#include "membrane/csv.hpp"
#include "membrane/harness.hpp"
#include "membrane/montecarlo.hpp"
#include "membrane/params.hpp"
#include "membrane/version.hpp"

namespace membrane {

namespace clidetail {

inline std::vector<std::pair<std::string, std::string>> provenance(const Json& config,
                                                                   std::uint64_t seed,
                                                                   const std::string& grid_note) {
  return {
      {"config_hash", std::to_string(fnv1a(config.dump()))},
      {"seed", std::to_string(seed)},
      {"grid", grid_note},
      {"version", MEMBRANE_LAB_VERSION},
  };
}

inline std::string out_path(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

inline int run_transform(double p, double alpha, const std::string& config_path) {
  if (!config_path.empty()) {
    Json j = load_json(config_path);
    auto pv = j.at("p").get<std::vector<double>>();
    auto av = j.at("alpha").get<std::vector<double>>();
    auto pt = transform_walsh(pv, av);
    for (std::size_t i = 0; i < pt.size(); ++i)
      std::printf("p_tilde[%zu]=%.12g\n", i, pt[i]);
    return 0;
  }
  SkewParams in = SkewParams::from_p(p);
  SkewParams out = transform_skew(p, alpha);
  std::printf("p=%.12g\ngamma=%.12g\nc=%.12g\nbeta=%.12g\n", in.p, in.gamma, in.c, in.beta);
  std::printf("p_tilde=%.12g\ngamma_tilde=%.12g\nc_tilde=%.12g\nbeta_tilde=%.12g\n", out.p,
              out.gamma, out.c, out.beta);
  return 0;
}

inline int run_solve_sl(const std::string& config_path, const std::string& out_dir) {
  Json j = load_json(config_path);
  ScenarioConfig sc = parse_scenario_config(j);
  require(sc.scenario == Scenario::interval, "solve-sl: interval scenario only");
  const Json& solve = j.at("solve");
  const double lambda = solve.value("lambda", 1.0);
  std::vector<double> eps_list = solve.at("eps_list").get<std::vector<double>>();
  const int min_n = solve.value("n", 400);
  auto curves = eigenfunction_family(sc.interval_drift, sc.p, lambda, sc.r, eps_list,
                                     j.value("grid_rule", 20.0), min_n);
  CsvWriter csv(out_path(out_dir, "sl_curves.csv"), {"eps", "x", "k", "k_deriv"});
  for (const auto& c : curves) {
    for (int i = 0; i <= c.k.n; ++i) {
      csv.row({c.eps, c.k.left_point(i), c.k.left[static_cast<std::size_t>(i)],
               c.k_deriv.left[static_cast<std::size_t>(i)]});
    }
    for (int i = 0; i <= c.k.n; ++i) {
      csv.row({c.eps, c.k.right_point(i), c.k.right[static_cast<std::size_t>(i)],
               c.k_deriv.right[static_cast<std::size_t>(i)]});
    }
  }
  write_meta(out_path(out_dir, "sl_curves.meta.csv"),
             provenance(j, 0, "min_n=" + std::to_string(min_n)));
  std::printf("wrote %s\n", out_path(out_dir, "sl_curves.csv").c_str());
  return 0;
}

inline int run_resolvent(const std::string& config_path, const std::string& out_dir) {
  Json j = load_json(config_path);
  ScenarioConfig sc = parse_scenario_config(j);
  const double lambda = j.value("lambda", 1.0);
  const double eps = j.value("eps", 0.0);  // 0 = limit operator
  const double rule = j.value("grid_rule", 20.0);
  CsvWriter csv(out_path(out_dir, "resolvent.csv"),
                {"scenario", "kind", "lambda", "eps", "panel", "edge", "x", "value"});

  std::vector<DriftFn> drifts;
  std::vector<double> weights;
  if (sc.scenario == Scenario::interval) {
    IntervalAdapter adapter{sc.p, sc.interval_drift};
    drifts = adapter.edge_drifts();
    weights = adapter.edge_weights();
  } else {
    drifts = sc.base_drifts;
    weights = sc.weights;
  }
  std::vector<double> alpha(drifts.size());
  double mass = 0.0;
  for (std::size_t e = 0; e < drifts.size(); ++e) {
    alpha[e] = alpha_of(drifts[e], sc.alpha_horizon);
    auto abs_fn = [&f = drifts[e]](double x) { return std::abs(f(x)); };
    mass = std::max(mass, alpha_of(abs_fn, sc.alpha_horizon));
  }
  const int k = static_cast<int>(drifts.size());
  const bool infinite = sc.scenario == Scenario::infinite_graph;
  const double horizon = infinite ? default_halfline_horizon(lambda, mass) : sc.r;
  const double h_eps = eps > 0.0 ? eps : 0.25;
  const int n = std::max(400, harnessdetail::grid_subdivisions(horizon, h_eps, rule));
  const EdgeGrid grid = make_grid(
      infinite ? StarGraphSpec::infinite_rays(k, horizon) : StarGraphSpec::finite(k, sc.r), n);
  const auto panel = infinite ? infinite_panel() : finite_panel(sc.r);
  const std::string kind = eps > 0.0 ? "full" : "limit";

  auto emit = [&](const std::string& panel_name, const EdgeFunctionVec& f) {
    const int stride = std::max(1, grid.n / 200);  // plot-sized output
    for (int e = 0; e < k; ++e)
      for (int i = 0; i <= grid.n; i += stride)
        csv.row({std::string(scenario_name(sc.scenario)), kind, lambda, eps, panel_name,
                 static_cast<std::int64_t>(e), grid.point(i),
                 f.values[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)]});
  };

  if (infinite) {
    InfiniteGraphResolvent op =
        eps > 0.0 ? solve_full_resolvent_inf(
                        grid, [&] {
                          DriftFamily fam;
                          fam.base = drifts;
                          fam.eps = eps;
                          fam.alpha = alpha;
                          fam.mass_bound = mass;
                          return fam;
                        }(), lambda, weights)
                  : InfiniteGraphResolvent::limit(grid, lambda, alpha, weights);
    for (const auto& pf : panel) emit(pf.name, op.apply(sample_panel(pf, grid)));
  } else {
    FiniteGraphResolvent op =
        eps > 0.0 ? solve_full_resolvent(
                        grid, [&] {
                          DriftFamily fam;
                          fam.base = drifts;
                          fam.eps = eps;
                          fam.alpha = alpha;
                          fam.mass_bound = mass;
                          return fam;
                        }(), lambda, weights)
                  : FiniteGraphResolvent::limit(grid, lambda, alpha, weights);
    for (const auto& pf : panel) emit(pf.name, op.apply(sample_panel(pf, grid)));
  }
  write_meta(out_path(out_dir, "resolvent.meta.csv"),
             provenance(j, 0, "n=" + std::to_string(n)));
  std::printf("wrote %s\n", out_path(out_dir, "resolvent.csv").c_str());
  return 0;
}

inline int run_converge(const std::string& scenario_flag, const std::string& config_path,
                        const std::string& out_dir) {
  Json j = load_json(config_path);
  if (!scenario_flag.empty()) j["scenario"] = scenario_flag;
  ScenarioConfig sc = parse_scenario_config(j);
  SweepSpec sweep = parse_sweep(j);
  ConvergenceReport report = run_convergence(sc, sweep);
  CsvWriter csv(out_path(out_dir, "convergence.csv"),
                {"scenario", "lambda", "panel", "eps", "sup_error", "order", "monotone",
                 "final_ok"});
  for (const auto& row : report.rows)
    csv.row({std::string(scenario_name(report.scenario)), row.lambda, row.panel, row.eps,
             row.sup_error, row.order, std::string(row.monotone ? "1" : "0"),
             std::string(row.final_ok ? "1" : "0")});
  write_meta(out_path(out_dir, "convergence.meta.csv"),
             provenance(j, 0,
                        "eps0=" + format_number(sweep.eps0) +
                            " steps=" + std::to_string(sweep.steps) +
                            " rule=" + format_number(sweep.grid_rule)));
  std::printf("wrote %s (%s)\n", out_path(out_dir, "convergence.csv").c_str(),
              report.passed ? "pass" : "FAIL");
  return report.passed ? 0 : 3;
}

inline int run_simulate(const std::string& config_path, const std::string& out_dir,
                        std::uint64_t seed) {
  Json j = load_json(config_path);
  SimConfig cfg = parse_sim_config(j, seed);
  StarGraphPoint start{j.value("start_edge", 0), j.value("start_x", 0.0)};
  OccupationStats stats = simulate_paths(cfg, start);
  CsvWriter csv(out_path(out_dir, "occupation.csv"),
                {"name", "value", "stderr", "n_paths", "seed"});
  for (std::size_t e = 0; e < stats.edges.size(); ++e)
    csv.row({"edge" + std::to_string(e) + "_frequency", stats.edges[e].frequency,
             stats.edges[e].stderr_frequency, stats.n_paths,
             static_cast<std::int64_t>(stats.seed)});
  csv.row({std::string("position_mean"), stats.mean_position, stats.stderr_position,
           stats.n_paths, static_cast<std::int64_t>(stats.seed)});
  csv.row({std::string("position_sq_mean"), stats.mean_position_sq, stats.stderr_position_sq,
           stats.n_paths, static_cast<std::int64_t>(stats.seed)});
  csv.row({std::string("absorbed"), static_cast<double>(stats.absorbed), 0.0, stats.n_paths,
           static_cast<std::int64_t>(stats.seed)});
  write_meta(out_path(out_dir, "occupation.meta.csv"),
             provenance(j, cfg.seed,
                        "dt=" + format_number(cfg.dt) + " delta=" + format_number(cfg.shell())));
  std::printf("wrote %s\n", out_path(out_dir, "occupation.csv").c_str());
  return 0;
}

inline int run_semigroup(const std::string& config_path, const std::string& out_dir) {
  Json j = load_json(config_path);
  ScenarioConfig sc = parse_scenario_config(j);
  require(sc.scenario != Scenario::infinite_graph, "semigroup: finite scenarios only");
  const Json& sg = j.at("semigroup");
  const double t = sg.value("t", 0.5);
  const int n = sg.value("n", 16);
  const int grid_n = sg.value("grid_n", 2000);

  std::vector<double> weights;
  std::vector<double> alpha;
  if (sc.scenario == Scenario::interval) {
    IntervalAdapter adapter{sc.p, sc.interval_drift};
    weights = adapter.edge_weights();
    auto drifts = adapter.edge_drifts();
    for (const auto& d : drifts) alpha.push_back(alpha_of(d, sc.alpha_horizon));
  } else {
    weights = sc.weights;
    for (const auto& d : sc.base_drifts) alpha.push_back(alpha_of(d, sc.alpha_horizon));
  }
  std::vector<double> tilde = transform_walsh(weights, alpha);
  const int k = static_cast<int>(weights.size());
  EdgeGrid grid = make_grid(StarGraphSpec::finite(k, sc.r), grid_n);
  auto provider = stable_graph_provider(grid, tilde);

  const std::string fname = sg.value("function", std::string("cosine"));
  PanelFunction pf;
  bool found = false;
  for (const auto& c : finite_panel(sc.r))
    if (c.name == fname) {
      pf = c;
      found = true;
    }
  require(found, "semigroup: unknown panel function " + fname);
  EdgeFunctionVec f = sample_panel(pf, grid);
  EdgeFunctionVec u1 = semigroup_via_resolvent(provider, t, n, f);
  EdgeFunctionVec u2 = semigroup_via_resolvent(provider, t, 2 * n, f);
  const double increment = sup_distance(u1, u2);

  CsvWriter csv(out_path(out_dir, "semigroup.csv"), {"n", "edge", "x", "value"});
  const int stride = std::max(1, grid.n / 200);
  for (int e = 0; e < k; ++e)
    for (int i = 0; i <= grid.n; i += stride)
      csv.row({static_cast<std::int64_t>(n), static_cast<std::int64_t>(e), grid.point(i),
               u1.values[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)]});
  for (int e = 0; e < k; ++e)
    for (int i = 0; i <= grid.n; i += stride)
      csv.row({static_cast<std::int64_t>(2 * n), static_cast<std::int64_t>(e), grid.point(i),
               u2.values[static_cast<std::size_t>(e)][static_cast<std::size_t>(i)]});
  write_meta(out_path(out_dir, "semigroup.meta.csv"),
             provenance(j, 0,
                        "t=" + format_number(t) + " n=" + std::to_string(n) +
                            " cauchy_increment=" + format_number(increment)));
  std::printf("wrote %s (cauchy increment n->2n: %.6g)\n",
              out_path(out_dir, "semigroup.csv").c_str(), increment);
  return 0;
}

}  // namespace clidetail

/// Entry point behind main(): subcommands transform, solve-sl, resolvent,
/// converge, simulate, semigroup. Exit codes: 0 success, 2 validation
/// failure, 3 numeric failure.
inline int cli_main(int argc, const char* const* argv) {
  CLI::App app{"membrane-lab: skew Brownian motion and Walsh spider approximation toolkit"};
  app.require_subcommand(1);

  double p = 0.5, alpha = 0.0;
  std::string config_path, out_dir = ".", scenario_flag;
  std::uint64_t seed = 0;

  auto* transform = app.add_subcommand("transform", "print skew/Walsh parameter transforms");
  transform->add_option("--p", p, "skew weight p in (0,1)");
  transform->add_option("--alpha", alpha, "drift mass alpha");
  transform->add_option("--config", config_path, "JSON config with vectors p[], alpha[]");

  auto* solve_sl = app.add_subcommand("solve-sl", "solve eigenfunction families (interval)");
  solve_sl->add_option("--config", config_path, "JSON config")->required();
  solve_sl->add_option("--out", out_dir, "output directory");

  auto* resolvent = app.add_subcommand("resolvent", "apply a resolvent to the test panel");
  resolvent->add_option("--config", config_path, "JSON config")->required();
  resolvent->add_option("--out", out_dir, "output directory");

  auto* converge = app.add_subcommand("converge", "run an epsilon sweep convergence report");
  converge->add_option("--scenario", scenario_flag, "interval|finite-graph|infinite-graph");
  converge->add_option("--config", config_path, "JSON config")->required();
  converge->add_option("--out", out_dir, "output directory");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo occupation statistics");
  simulate->add_option("--config", config_path, "JSON config")->required();
  simulate->add_option("--out", out_dir, "output directory");
  simulate->add_option("--seed", seed, "seed override");

  auto* semigroup = app.add_subcommand("semigroup", "backward-Euler semigroup approximation");
  semigroup->add_option("--config", config_path, "JSON config")->required();
  semigroup->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (transform->parsed()) return clidetail::run_transform(p, alpha, config_path);
    if (solve_sl->parsed()) return clidetail::run_solve_sl(config_path, out_dir);
    if (resolvent->parsed()) return clidetail::run_resolvent(config_path, out_dir);
    if (converge->parsed()) return clidetail::run_converge(scenario_flag, config_path, out_dir);
    if (simulate->parsed()) return clidetail::run_simulate(config_path, out_dir, seed);
    if (semigroup->parsed()) return clidetail::run_semigroup(config_path, out_dir);
  } catch (const numeric_failure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const invalid_argument& e) {
    std::cerr << "invalid arguments: " << e.what() << "\n";
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace membrane
