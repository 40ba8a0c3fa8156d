#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "membrane/drift.hpp"
#include "membrane/errors.hpp"
#include "membrane/grid.hpp"
#include "membrane/parallel.hpp"
#include "membrane/rng.hpp"

namespace membrane {

// Path-level simulation: Euler-Maruyama with drift a_{eps,i} on each edge,
// folding reflection at outer nodes, and the delta-shell vertex rule: on
// reaching or crossing the center, redraw the edge ~ p and restart at x=delta.
//
// Away from the drift zone the motion is driftless Brownian, whose Euler
// endpoint law is exact at any step size; with mc.accelerate (default) those
// stretches take fused Gaussian steps sized so the zone or the center is at
// least 6 sigma away, which keeps the law intact to ~1e-9 per fused step.
// Inside the zone the literal per-dt scheme runs unchanged.

struct StarGraphPoint {
  int edge = 0;
  double x = 0.0;  // distance from the center

  static StarGraphPoint center() { return {0, 0.0}; }
};

struct SimConfig {
  StarGraphSpec graph;
  std::vector<DriftFn> base_drifts;  // unscaled per-edge a_i; empty = zero drift
  double eps = 1.0;
  std::vector<double> weights;       // p_i at the vertex
  double dt = 1e-4;
  double horizon = 1.0;              // time horizon t
  std::int64_t paths = 10000;
  double delta = 0.0;                // 0 = default 3 sqrt(dt)
  std::uint64_t seed = 1;
  bool accelerate = true;
  double truncation = 0.0;           // infinite graphs: absorb beyond R_big (0 = auto)

  double shell() const { return delta > 0.0 ? delta : 3.0 * std::sqrt(dt); }
};

struct EdgeStat {
  double frequency = 0.0;
  double stderr_frequency = 0.0;
};

struct OccupationStats {
  std::vector<EdgeStat> edges;
  double mean_position = 0.0;        // graph distance from the center
  double stderr_position = 0.0;
  double mean_position_sq = 0.0;
  double stderr_position_sq = 0.0;
  std::int64_t n_paths = 0;
  std::int64_t absorbed = 0;         // infinite graph: paths frozen at the truncation
  std::uint64_t seed = 0;
};

struct PathState {
  int edge = 0;
  double x = 0.0;
  bool absorbed = false;
};

namespace mcdetail {

/// Piecewise-linear table of one scaled edge drift, plus the radius beyond
/// which the drift is numerically dead.
struct DriftTable {
  std::vector<double> values;
  double step = 1.0;
  double span = 0.0;      // table covers [0, span]
  double zone = 0.0;      // |a| < zone_tol beyond this radius
  double max_abs = 0.0;

  double operator()(double x) const {
    if (x >= span || values.empty()) return 0.0;
    const double pos = x / step;
    const std::size_t j = static_cast<std::size_t>(pos);
    if (j + 1 >= values.size()) return values.back();
    const double t = pos - static_cast<double>(j);
    return values[j] + t * (values[j + 1] - values[j]);
  }
};

inline DriftTable build_table(const DriftFn& base, double eps, double edge_length) {
  DriftTable t;
  if (!base) return t;
  DriftFn scaled = scale_drift(base, eps);
  // find where the scaled drift dies; exponential bases make this quick
  double max_abs = 0.0;
  for (double x = 0.0; x <= 60.0 * eps; x += eps / 64.0)
    max_abs = std::max(max_abs, std::abs(scaled(x)));
  const double tol = std::max(1e-12, 1e-7 * max_abs);
  double span = edge_length;
  if (std::abs(scaled(std::min(edge_length, 60.0 * eps))) < tol) {
    double x = std::min(edge_length, 60.0 * eps);
    while (x > 0.0 && std::abs(scaled(x)) < tol) x -= eps / 64.0;
    span = std::min(edge_length, x + eps / 16.0);
  }
  if (span <= 0.0 || max_abs == 0.0) return t;
  t.step = eps / 50.0;
  const std::size_t count = static_cast<std::size_t>(std::ceil(span / t.step)) + 1;
  t.values.resize(count);
  for (std::size_t j = 0; j < count; ++j) t.values[j] = scaled(t.step * static_cast<double>(j));
  t.span = t.step * static_cast<double>(count - 1);
  t.zone = t.span;
  t.max_abs = max_abs;
  return t;
}

}  // namespace mcdetail

/// One path from `start` to the time horizon. Exposed for the estimators.
inline PathState run_path(const SimConfig& cfg, const std::vector<mcdetail::DriftTable>& tables,
                          const std::vector<double>& cum_weights, StarGraphPoint start,
                          Rng& rng) {
  const double dt = cfg.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double delta = cfg.shell();
  const double r = cfg.graph.edge_length;
  const bool finite = !cfg.graph.infinite;
  const double big =
      cfg.graph.infinite ? (cfg.truncation > 0.0 ? cfg.truncation : 1e9) : 0.0;
  std::int64_t steps_left = static_cast<std::int64_t>(std::llround(cfg.horizon / dt));
  int edge = start.edge;
  double x = start.x;
  bool absorbed = false;

  auto vertex_draw = [&]() {
    edge = rng.next_category(cum_weights);
    x = delta;
  };
  if (x <= 0.0) vertex_draw();

  while (steps_left > 0) {
    const auto& table = tables[static_cast<std::size_t>(edge)];
    std::int64_t m = 1;
    double drift = 0.0;
    if (x < table.span) {
      drift = table(x);
    } else if (cfg.accelerate) {
      // driftless stretch: fused Gaussian step, zone/center at least 6 sigma away
      const double d = x - table.zone;
      m = std::min<std::int64_t>(steps_left,
                                 static_cast<std::int64_t>(d * d / (36.0 * dt)));
      if (m < 1) m = 1;
    }
    const double step_sd = m == 1 ? sqrt_dt : std::sqrt(dt * static_cast<double>(m));
    if (m == 1) x += drift * dt;  // fused steps are only taken on driftless stretches
    x += step_sd * rng.next_normal();
    steps_left -= m;
    if (finite) {
      while (x > r) x = 2.0 * r - x;  // fold; double folds are ~impossible at sane dt
      if (x <= 0.0) vertex_draw();
    } else {
      if (x >= big) {
        absorbed = true;  // outer node of the infinite graph holds forever
        break;
      }
      if (x <= 0.0) vertex_draw();
    }
  }
  return {edge, x, absorbed};
}

inline OccupationStats summarize(const std::vector<PathState>& finals, int edge_count,
                                 std::uint64_t seed) {
  OccupationStats stats;
  stats.n_paths = static_cast<std::int64_t>(finals.size());
  stats.seed = seed;
  stats.edges.assign(static_cast<std::size_t>(edge_count), {});
  const double n = static_cast<double>(finals.size());
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  for (const auto& p : finals) {
    stats.edges[static_cast<std::size_t>(p.edge)].frequency += 1.0;
    if (p.absorbed) ++stats.absorbed;
    sum += p.x;
    sum2 += p.x * p.x;
    sum4 += p.x * p.x * p.x * p.x;
  }
  for (auto& e : stats.edges) {
    const double f = e.frequency / n;
    e.frequency = f;
    e.stderr_frequency = std::sqrt(std::max(0.0, f * (1.0 - f) / n));
  }
  stats.mean_position = sum / n;
  stats.mean_position_sq = sum2 / n;
  const double var_x = std::max(0.0, sum2 / n - stats.mean_position * stats.mean_position);
  const double var_x2 = std::max(0.0, sum4 / n - stats.mean_position_sq * stats.mean_position_sq);
  stats.stderr_position = std::sqrt(var_x / n);
  stats.stderr_position_sq = std::sqrt(var_x2 / n);
  return stats;
}

inline void validate(const SimConfig& cfg) {
  require(cfg.dt > 0.0, "SimConfig: dt must be positive");
  require(cfg.horizon >= 0.0, "SimConfig: horizon must be nonnegative");
  require(cfg.paths >= 1, "SimConfig: need at least one path");
  require(cfg.shell() >= std::sqrt(cfg.dt) - 1e-15, "SimConfig: delta must be >= sqrt(dt)");
  require(!cfg.weights.empty(), "SimConfig: vertex weights missing");
  require(static_cast<int>(cfg.weights.size()) == cfg.graph.edge_count,
          "SimConfig: weights size mismatch");
  double sum = 0.0;
  for (double w : cfg.weights) {
    require(w >= 0.0, "SimConfig: negative weight");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-10, "SimConfig: weights must sum to 1");
  if (!cfg.base_drifts.empty())
    require(cfg.base_drifts.size() == cfg.weights.size(), "SimConfig: drift count mismatch");
}

/// All paths, deterministically: path i uses the (seed, i) stream, results
/// land in slot i, and the reduction is a single sequential pass.
inline std::vector<PathState> run_paths(const SimConfig& cfg, StarGraphPoint start) {
  validate(cfg);
  std::vector<mcdetail::DriftTable> tables(static_cast<std::size_t>(cfg.graph.edge_count));
  for (std::size_t e = 0; e < tables.size(); ++e)
    if (!cfg.base_drifts.empty())
      tables[e] = mcdetail::build_table(cfg.base_drifts[e], cfg.eps, cfg.graph.edge_length);
  std::vector<double> cum(cfg.weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cfg.weights.size(); ++i) {
    acc += cfg.weights[i];
    cum[i] = acc;
  }
  std::vector<PathState> finals(static_cast<std::size_t>(cfg.paths));
  parallel_for(finals.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng = path_rng(cfg.seed, static_cast<std::uint64_t>(i));
      finals[i] = run_path(cfg, tables, cum, start, rng);
    }
  });
  return finals;
}

inline OccupationStats simulate_paths(const SimConfig& cfg, StarGraphPoint start,
                                      std::vector<PathState>* dump = nullptr) {
  std::vector<PathState> finals = run_paths(cfg, start);
  OccupationStats stats = summarize(finals, cfg.graph.edge_count, cfg.seed);
  if (dump) *dump = std::move(finals);
  return stats;
}

/// Exact sampler of the Walsh position at time t from the center: the edge is
/// a p~ categorical, the modulus |Normal(0, t)|.
inline OccupationStats exact_walsh_sample(const std::vector<double>& p_tilde, double t,
                                          std::int64_t n, std::uint64_t seed,
                                          std::vector<double>* moduli = nullptr) {
  require(!p_tilde.empty(), "exact_walsh_sample: empty weights");
  double sum = 0.0;
  for (double w : p_tilde) sum += w;
  require(std::abs(sum - 1.0) <= 1e-10, "exact_walsh_sample: weights must sum to 1");
  require(t >= 0.0 && n >= 1, "exact_walsh_sample: bad t or n");
  std::vector<double> cum(p_tilde.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p_tilde.size(); ++i) {
    acc += p_tilde[i];
    cum[i] = acc;
  }
  const double sd = std::sqrt(t);
  std::vector<PathState> finals(static_cast<std::size_t>(n));
  if (moduli) moduli->assign(static_cast<std::size_t>(n), 0.0);
  parallel_for(finals.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
      const int edge = rng.next_category(cum);
      const double modulus = std::abs(rng.next_normal()) * sd;
      finals[i] = {edge, modulus, false};
      if (moduli) (*moduli)[i] = modulus;
    }
  });
  return summarize(finals, static_cast<int>(p_tilde.size()), seed);
}

/// MC estimate of P_x(sigma_{eps,i,r} <= t): the line diffusion with evenly
/// extended drift, first exit from (-r, r).
struct ExitProbEstimate {
  double probability = 0.0;
  double stderr_probability = 0.0;
};

inline ExitProbEstimate estimate_exit_prob(const DriftFn& base, double eps, double x0, double r,
                                           double t, double dt, std::int64_t n,
                                           std::uint64_t seed) {
  require(std::abs(x0) < r, "estimate_exit_prob: start must lie inside (-r, r)");
  require(t >= 0.0 && dt > 0.0 && n >= 1, "estimate_exit_prob: bad t, dt, or n");
  DriftFn scaled = base ? scale_drift(base, eps) : DriftFn();
  const double sqrt_dt = std::sqrt(dt);
  const std::int64_t steps = static_cast<std::int64_t>(std::llround(t / dt));
  std::vector<std::uint8_t> exited(static_cast<std::size_t>(n), 0);
  parallel_for(exited.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Rng rng = path_rng(seed, static_cast<std::uint64_t>(i));
      double z = x0;
      for (std::int64_t s = 0; s < steps; ++s) {
        const double drift = scaled ? scaled(std::abs(z)) : 0.0;  // even extension
        z += drift * dt + sqrt_dt * rng.next_normal();
        if (std::abs(z) >= r) {
          exited[i] = 1;
          break;
        }
      }
    }
  });
  double hits = 0.0;
  for (auto e : exited) hits += e;
  ExitProbEstimate est;
  est.probability = hits / static_cast<double>(n);
  est.stderr_probability =
      std::sqrt(std::max(0.0, est.probability * (1.0 - est.probability) / static_cast<double>(n)));
  return est;
}

/// MC mean and standard error of f(X_t) for a sampled graph function.
struct SemigroupEstimate {
  double mean = 0.0;
  double stderr_mean = 0.0;
};

inline SemigroupEstimate estimate_semigroup(const EdgeFunctionVec& f, const SimConfig& cfg,
                                            StarGraphPoint start) {
  require(f.grid.spec.edge_count == cfg.graph.edge_count, "estimate_semigroup: edge mismatch");
  std::vector<PathState> finals = run_paths(cfg, start);
  const double h = f.grid.step;
  double sum = 0.0, sum2 = 0.0;
  for (const auto& p : finals) {
    double v;
    const auto& vals = f.values[static_cast<std::size_t>(p.edge)];
    if (p.absorbed || p.x >= f.grid.spec.edge_length) {
      v = f.grid.spec.infinite ? f.limits[static_cast<std::size_t>(p.edge)] : vals.back();
    } else {
      const double pos = p.x / h;
      const std::size_t j = std::min(vals.size() - 2, static_cast<std::size_t>(pos));
      const double tfrac = pos - static_cast<double>(j);
      v = vals[j] + tfrac * (vals[j + 1] - vals[j]);
    }
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(finals.size());
  SemigroupEstimate est;
  est.mean = sum / n;
  est.stderr_mean = std::sqrt(std::max(0.0, (sum2 / n - est.mean * est.mean) / n));
  return est;
}

}  // namespace membrane
