#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "membrane/drift.hpp"
#include "membrane/errors.hpp"
#include "membrane/grid.hpp"
#include "membrane/parallel.hpp"
#include "membrane/params.hpp"
#include "membrane/resolvent_finite.hpp"
#include "membrane/resolvent_infinite.hpp"
#include "membrane/sturm_liouville.hpp"

namespace membrane {

enum class Scenario { interval, finite_graph, infinite_graph };

inline const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::interval: return "interval";
    case Scenario::finite_graph: return "finite-graph";
    case Scenario::infinite_graph: return "infinite-graph";
  }
  return "?";
}

/// Epsilon ladder eps0 * 2^{-m}, m = 0..steps-1, with grids refined in
/// lockstep (h <= eps/20).
struct SweepSpec {
  std::vector<double> lambdas{0.5, 1.0, 2.0};
  double eps0 = 0.2;
  int steps = 5;
  double grid_rule = 20.0;  // h <= eps / grid_rule
  double pass_threshold = 0.01;

  double eps_at(int m) const { return eps0 * std::pow(2.0, -m); }
};

struct ScenarioConfig {
  Scenario scenario = Scenario::interval;
  double r = 1.0;
  int edges = 2;                     // ignored for interval (always 2 via adapter)
  std::vector<double> weights;       // p_i; for interval: {p, 1-p}
  std::vector<DriftFn> base_drifts;  // per-edge a_i (interval: via adapter)
  DriftFn interval_drift;            // interval scenario's a on R
  double p = 0.8;                    // interval skew weight
  double alpha_horizon = 40.0;
};

/// Named test functions; on infinite graphs each carries its limit.
struct PanelFunction {
  std::string name;
  std::function<double(double)> fn;  // on [0, r] or [0, inf) per edge
  double limit = 0.0;
  int only_edge = -1;  // -1 = every edge
};

inline std::vector<PanelFunction> finite_panel(double r) {
  return {
      {"one", [](double) { return 1.0; }, 1.0, -1},
      {"linear", [r](double x) { return x / r; }, 1.0, -1},
      {"quadratic", [r](double x) { return (x / r) * (x / r); }, 1.0, -1},
      {"cosine", [r](double x) { return std::cos(kPi * x / r); }, -1.0, -1},
      {"bump_edge0", [r](double x) { return std::sin(kPi * x / r) * std::sin(kPi * x / r); },
       0.0, 0},
  };
}

inline std::vector<PanelFunction> infinite_panel() {
  return {
      {"one", [](double) { return 1.0; }, 1.0, -1},
      {"exp_decay", [](double x) { return std::exp(-x); }, 0.0, -1},
      {"saturating", [](double x) { return x / (1.0 + x); }, 1.0, -1},
      {"damped_cos", [](double x) { return std::exp(-0.5 * x) * std::cos(x); }, 0.0, -1},
      {"bump_edge0",
       [](double x) {
         if (x >= 4.0) return 0.0;
         const double s = std::sin(kPi * x / 4.0);
         return s * s;
       },
       0.0, 0},
  };
}

inline EdgeFunctionVec sample_panel(const PanelFunction& pf, const EdgeGrid& grid) {
  EdgeFunctionVec g = EdgeFunctionVec::zeros(grid);
  for (int e = 0; e < grid.spec.edge_count; ++e) {
    if (pf.only_edge >= 0 && e != pf.only_edge) continue;
    for (int j = 0; j < grid.nodes(); ++j)
      g.values[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)] = pf.fn(grid.point(j));
    if (grid.spec.infinite) g.limits[static_cast<std::size_t>(e)] = pf.limit;
  }
  return g;
}

struct ConvergenceRow {
  double lambda = 0.0;
  std::string panel;
  double eps = 0.0;
  double sup_error = 0.0;
  double order = 0.0;  // log2 E(2 eps)/E(eps); 0 on the first rung
  bool monotone = true;
  bool final_ok = true;
};

struct ConvergenceReport {
  Scenario scenario = Scenario::interval;
  std::vector<ConvergenceRow> rows;
  bool passed = true;
  std::string grid_note;
};

namespace harnessdetail {

inline int grid_subdivisions(double length, double eps, double rule) {
  return static_cast<int>(std::ceil(length * rule / eps)) + 1;
}

}  // namespace harnessdetail

/// Build eps-resolvents against the limit resolvent over the ladder and
/// record panel sup-errors. Scenario `interval` runs the 2-edge adapter so
/// the interval theory is exercised through the graph machinery; the interval
/// kernel route has its own dedicated tests.
inline ConvergenceReport run_convergence(const ScenarioConfig& sc, const SweepSpec& sweep) {
  ConvergenceReport report;
  report.scenario = sc.scenario;

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
  require(!drifts.empty() && drifts.size() == weights.size(),
          "run_convergence: drifts/weights mismatch");
  const int k = static_cast<int>(drifts.size());

  // limit data
  std::vector<double> alpha(drifts.size());
  double mass = 0.0;
  for (std::size_t e = 0; e < drifts.size(); ++e) {
    alpha[e] = alpha_of(drifts[e], sc.alpha_horizon);
    auto abs_fn = [&f = drifts[e]](double x) { return std::abs(f(x)); };
    mass = std::max(mass, alpha_of(abs_fn, sc.alpha_horizon));
  }

  const auto panel =
      sc.scenario == Scenario::infinite_graph ? infinite_panel() : finite_panel(sc.r);

  for (double lambda : sweep.lambdas) {
    const double horizon = sc.scenario == Scenario::infinite_graph
                               ? default_halfline_horizon(lambda, mass)
                               : sc.r;
    std::vector<std::vector<double>> errors(panel.size());

    for (int m = 0; m < sweep.steps; ++m) {
      const double eps = sweep.eps_at(m);
      const int n = harnessdetail::grid_subdivisions(horizon, eps, sweep.grid_rule);
      const StarGraphSpec spec = sc.scenario == Scenario::infinite_graph
                                     ? StarGraphSpec::infinite_rays(k, horizon)
                                     : StarGraphSpec::finite(k, sc.r);
      const EdgeGrid grid = make_grid(spec, n);
      DriftFamily fam;
      fam.base = drifts;
      fam.eps = eps;
      fam.alpha = alpha;
      fam.mass_bound = mass;

      if (sc.scenario == Scenario::infinite_graph) {
        InfiniteGraphResolvent eps_op = solve_full_resolvent_inf(grid, fam, lambda, weights);
        InfiniteGraphResolvent limit_op =
            InfiniteGraphResolvent::limit(grid, lambda, alpha, weights);
        for (std::size_t pi = 0; pi < panel.size(); ++pi) {
          EdgeFunctionVec g = sample_panel(panel[pi], grid);
          errors[pi].push_back(sup_distance(eps_op.apply(g), limit_op.apply(g)));
        }
      } else {
        FiniteGraphResolvent eps_op = solve_full_resolvent(grid, fam, lambda, weights);
        FiniteGraphResolvent limit_op = FiniteGraphResolvent::limit(grid, lambda, alpha, weights);
        for (std::size_t pi = 0; pi < panel.size(); ++pi) {
          EdgeFunctionVec g = sample_panel(panel[pi], grid);
          errors[pi].push_back(sup_distance(eps_op.apply(g), limit_op.apply(g)));
        }
      }
    }

    for (std::size_t pi = 0; pi < panel.size(); ++pi) {
      const double gnorm = 1.0;  // every panel function has sup norm 1
      for (int m = 0; m < sweep.steps; ++m) {
        ConvergenceRow row;
        row.lambda = lambda;
        row.panel = panel[pi].name;
        row.eps = sweep.eps_at(m);
        row.sup_error = errors[pi][static_cast<std::size_t>(m)];
        if (m > 0) {
          const double prev = errors[pi][static_cast<std::size_t>(m - 1)];
          row.order = (prev > 0.0 && row.sup_error > 0.0) ? std::log2(prev / row.sup_error) : 0.0;
          // below quadrature noise (degenerate a=0 ladders) monotonicity is
          // not meaningful
          row.monotone = row.sup_error < prev || row.sup_error <= 1e-6 * gnorm;
        }
        row.final_ok = (m + 1 < sweep.steps) ||
                       row.sup_error <= sweep.pass_threshold * gnorm;
        if (!row.monotone || !row.final_ok) report.passed = false;
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Backward-Euler semigroup: e^{t A} f ~ (n/t R_{n/t})^n f.
// ---------------------------------------------------------------------------

using ResolventProvider = std::function<EdgeFunctionVec(double, const EdgeFunctionVec&)>;

inline EdgeFunctionVec semigroup_via_resolvent(const ResolventProvider& provider, double t, int n,
                                               const EdgeFunctionVec& f) {
  require(t > 0.0, "semigroup_via_resolvent: t must be positive");
  require(n >= 1 && (n & (n - 1)) == 0, "semigroup_via_resolvent: n must be a power of two");
  const double lambda = static_cast<double>(n) / t;
  EdgeFunctionVec u = f;
  for (int i = 0; i < n; ++i) {
    u = provider(lambda, u);
    for (auto& edge : u.values)
      for (auto& v : edge) v *= lambda;
    for (auto& v : u.limits) v *= lambda;
  }
  return u;
}

/// Drift-free graph provider that stays stable for arbitrarily large lambda.
inline ResolventProvider stable_graph_provider(const EdgeGrid& grid,
                                               std::vector<double> tilde_weights) {
  return [grid, tilde_weights](double lambda, const EdgeFunctionVec& g) {
    StableLimitResolvent op(grid, lambda, tilde_weights);
    return op.apply(g);
  };
}

// ---------------------------------------------------------------------------
// Figure-1 style eigenfunction families.
// ---------------------------------------------------------------------------

struct EigenfunctionCurve {
  double eps = 0.0;  // 0 = the limit curve
  IntervalFunction k;
  IntervalFunction k_deriv;
};

/// Solves the interval problem for each ladder eps and appends the gamma~
/// limit curve (eps = 0).
inline std::vector<EigenfunctionCurve> eigenfunction_family(const DriftFn& interval_drift,
                                                            double p, double lambda, double r,
                                                            const std::vector<double>& eps_list,
                                                            double grid_rule = 20.0,
                                                            int min_n = 400) {
  const SkewParams skew = SkewParams::from_p(p);
  const double alpha = alpha_of(interval_drift, 40.0, /*interval=*/true);
  auto abs_fn = [&interval_drift](double x) { return std::abs(interval_drift(x)); };
  const double mass = alpha_of(abs_fn, 40.0, /*interval=*/true);
  const double gamma_tilde = std::exp(-2.0 * alpha) * skew.gamma;

  std::vector<EigenfunctionCurve> out;
  for (double eps : eps_list) {
    const int n = std::max(min_n, harnessdetail::grid_subdivisions(r, eps, grid_rule));
    DriftFn scaled = scale_drift(interval_drift, eps);
    IntervalFunction a = IntervalFunction::zeros(r, n);
    for (int j = 0; j <= n; ++j) {
      a.left[static_cast<std::size_t>(j)] = scaled(a.left_point(j));
      a.right[static_cast<std::size_t>(j)] = scaled(a.right_point(j));
    }
    a.left.back() = scaled(-1e-13);  // keep the left limit on the doubled node
    IntervalSolution sol = solve_k_interval(a, lambda, skew.gamma, mass);
    out.push_back({eps, std::move(sol.value), std::move(sol.deriv)});
  }
  IntervalFunction zero = IntervalFunction::zeros(r, min_n);
  IntervalSolution lim = solve_k_interval(zero, lambda, gamma_tilde, 0.0);
  out.push_back({0.0, std::move(lim.value), std::move(lim.deriv)});
  return out;
}

}  // namespace membrane
