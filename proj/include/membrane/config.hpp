#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "membrane/drift.hpp"
#include "membrane/errors.hpp"
#include "membrane/harness.hpp"
#include "membrane/montecarlo.hpp"

namespace membrane {

using Json = nlohmann::json;

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_argument("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw invalid_argument("config parse error in " + path + ": " + e.what());
  }
  return j;
}

/// Drift spec: named built-ins or a sampled table.
///   {"type":"exp_decay","rate":R,"mass":A}        A*R*e^{-Rx} on [0,inf)
///   {"type":"two_sided_exp","rate":R,"mass_right":A,"mass_left":B}   interval
///   {"type":"fig1"}                               e^{x/2}[x<0]+e^{-5x}[x>=0]
///   {"type":"zero"}
///   {"type":"table","x":[...],"a":[...]}          linear interpolation
inline DriftFn parse_drift(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "exp_decay")
    return exp_decay_drift(j.at("rate").get<double>(), j.value("mass", 1.0));
  if (type == "two_sided_exp") {
    const double rate = j.at("rate").get<double>();
    const double right = j.value("mass_right", 0.5);
    const double left = j.value("mass_left", 0.5);
    return [rate, right, left](double x) {
      return x < 0.0 ? left * rate * std::exp(rate * x) : right * rate * std::exp(-rate * x);
    };
  }
  if (type == "fig1") return figure1_drift();
  if (type == "zero") return zero_drift();
  if (type == "table")
    return table_drift(j.at("x").get<std::vector<double>>(),
                       j.at("a").get<std::vector<double>>());
  throw invalid_argument("unknown drift type: " + type);
}

inline Scenario parse_scenario(const std::string& name) {
  if (name == "interval") return Scenario::interval;
  if (name == "finite-graph") return Scenario::finite_graph;
  if (name == "infinite-graph") return Scenario::infinite_graph;
  throw invalid_argument("unknown scenario: " + name +
                         " (expected interval|finite-graph|infinite-graph)");
}

inline ScenarioConfig parse_scenario_config(const Json& j) {
  ScenarioConfig sc;
  sc.scenario = parse_scenario(j.value("scenario", std::string("interval")));
  sc.r = j.value("r", 1.0);
  if (sc.scenario == Scenario::interval) {
    sc.p = j.value("p", 0.8);
    sc.edges = 2;
    sc.interval_drift = j.contains("drift") ? parse_drift(j.at("drift")) : zero_drift();
  } else {
    require(j.contains("weights"), "config: graph scenarios need weights");
    sc.weights = j.at("weights").get<std::vector<double>>();
    sc.edges = static_cast<int>(sc.weights.size());
    if (j.contains("drifts")) {
      for (const auto& d : j.at("drifts")) sc.base_drifts.push_back(parse_drift(d));
      require(sc.base_drifts.size() == sc.weights.size(),
              "config: drifts/weights size mismatch");
    } else {
      sc.base_drifts.assign(sc.weights.size(), zero_drift());
    }
  }
  sc.alpha_horizon = j.value("alpha_horizon", 40.0);
  return sc;
}

inline SweepSpec parse_sweep(const Json& j) {
  SweepSpec s;
  if (j.contains("lambdas")) s.lambdas = j.at("lambdas").get<std::vector<double>>();
  s.eps0 = j.value("eps0", 0.2);
  s.steps = j.value("eps_steps", 5);
  s.grid_rule = j.value("grid_rule", 20.0);
  s.pass_threshold = j.value("pass_threshold", 0.01);
  require(s.eps0 > 0.0 && s.steps >= 1, "config: bad eps ladder");
  return s;
}

inline SimConfig parse_sim_config(const Json& root, std::uint64_t seed_override = 0) {
  const Json& j = root.contains("mc") ? root.at("mc") : root;
  SimConfig cfg;
  ScenarioConfig sc = parse_scenario_config(root);
  if (sc.scenario == Scenario::interval) {
    IntervalAdapter adapter{sc.p, sc.interval_drift};
    cfg.base_drifts = adapter.edge_drifts();
    cfg.weights = adapter.edge_weights();
    cfg.graph = StarGraphSpec::finite(2, sc.r);
  } else {
    cfg.base_drifts = sc.base_drifts;
    cfg.weights = sc.weights;
    cfg.graph = sc.scenario == Scenario::finite_graph
                    ? StarGraphSpec::finite(sc.edges, sc.r)
                    : StarGraphSpec::infinite_rays(sc.edges, j.value("truncation", 50.0));
  }
  cfg.eps = j.value("eps", 1.0);
  cfg.dt = j.value("dt", 1e-4);
  cfg.horizon = j.value("t", 1.0);
  cfg.paths = j.value("paths", static_cast<std::int64_t>(10000));
  cfg.delta = j.value("delta", 0.0);
  cfg.seed = seed_override ? seed_override : j.value("seed", static_cast<std::uint64_t>(1));
  cfg.accelerate = j.value("accelerate", true);
  cfg.truncation = j.value("truncation", 0.0);
  const bool zero = [&] {
    for (const auto& d : cfg.base_drifts)
      if (d) return false;
    return true;
  }();
  if (root.contains("drift") || root.contains("drifts")) {
    // keep drifts; a literal zero spec still simplifies to the driftless path
    bool all_zero = true;
    for (const auto& d : cfg.base_drifts)
      if (d && std::abs(d(0.0)) + std::abs(d(0.5)) + std::abs(d(1.0)) > 0.0) all_zero = false;
    if (all_zero) cfg.base_drifts.clear();
  } else if (zero) {
    cfg.base_drifts.clear();
  }
  return cfg;
}

}  // namespace membrane
