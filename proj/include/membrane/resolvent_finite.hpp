#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "membrane/drift.hpp"
#include "membrane/errors.hpp"
#include "membrane/grid.hpp"
#include "membrane/params.hpp"
#include "membrane/sturm_liouville.hpp"

namespace membrane {

// ---------------------------------------------------------------------------
// Interval route: Green kernel on [-r,r].
// ---------------------------------------------------------------------------

namespace detail {

inline double interp(std::span<const double> v, double pos) {
  // pos in grid units
  const auto last = static_cast<double>(v.size() - 1);
  if (pos <= 0.0) return v.front();
  if (pos >= last) return v.back();
  const std::size_t j = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(j);
  return v[j] + t * (v[j + 1] - v[j]);
}

inline double eval_interval(const IntervalFunction& f, double x) {
  const double h = f.step();
  if (x < 0.0) return interp(f.left, (x + f.r) / h);
  if (x > 0.0) return interp(f.right, x / h);
  return f.right.front();
}

}  // namespace detail

/// K(x,y) = 2 k(x) ell(y)/w(y) [x<=y] + 2 k(y) ell(x)/w(y) [x>y]. Sampled
/// solutions are linearly interpolated between nodes; at y = 0 the kernel
/// takes the right-limit Wronskian.
inline double green_kernel_interval(const IntervalSlSolution& sol, double x, double y) {
  require(std::abs(x) <= sol.k.r + 1e-12 && std::abs(y) <= sol.k.r + 1e-12,
          "green_kernel_interval: point outside [-r,r]");
  const double w = detail::eval_interval(sol.wronskian, y);
  if (x <= y)
    return 2.0 * detail::eval_interval(sol.k, x) * detail::eval_interval(sol.ell, y) / w;
  return 2.0 * detail::eval_interval(sol.k, y) * detail::eval_interval(sol.ell, x) / w;
}

/// R_lambda g on the interval through the kernel, as two cumulative passes:
/// R g(x) = 2 ell(x) int_{-r}^x k g / w + 2 k(x) int_x^r ell g / w.
struct IntervalApplication {
  IntervalFunction value;
  IntervalFunction deriv;
};

inline IntervalApplication interval_resolvent_apply(const IntervalSlSolution& sol,
                                                    const IntervalFunction& g) {
  require(g.n == sol.k.n && g.r == sol.k.r, "interval_resolvent_apply: grid mismatch");
  const double h = g.step();
  const std::size_t nn = g.left.size();
  std::vector<double> kg_l(nn), kg_r(nn), lg_l(nn), lg_r(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    kg_l[j] = sol.k.left[j] * g.left[j] / sol.wronskian.left[j];
    kg_r[j] = sol.k.right[j] * g.right[j] / sol.wronskian.right[j];
    lg_l[j] = sol.ell.left[j] * g.left[j] / sol.wronskian.left[j];
    lg_r[j] = sol.ell.right[j] * g.right[j] / sol.wronskian.right[j];
  }
  auto P_l = cumulative_integral(kg_l, h);                       // int_{-r}^x, x<=0
  auto P_r = cumulative_integral(kg_r, h);                       // int_0^x, x>=0
  auto U_l = cumulative_integral_backward(lg_l, h);              // int_x^0, x<=0
  auto U_r = cumulative_integral_backward(lg_r, h);              // int_x^r, x>=0
  IntervalApplication out;
  out.value = IntervalFunction::zeros(g.r, g.n);
  out.deriv = IntervalFunction::zeros(g.r, g.n);
  const double left_mass = P_l.back();
  const double right_tail = U_r.front();
  for (std::size_t j = 0; j < nn; ++j) {
    const double up_l = P_l[j];
    const double down_l = U_l[j] + right_tail;
    out.value.left[j] = 2.0 * sol.ell.left[j] * up_l + 2.0 * sol.k.left[j] * down_l;
    out.deriv.left[j] = 2.0 * sol.ell_deriv.left[j] * up_l + 2.0 * sol.k_deriv.left[j] * down_l;
    const double up_r = left_mass + P_r[j];
    const double down_r = U_r[j];
    out.value.right[j] = 2.0 * sol.ell.right[j] * up_r + 2.0 * sol.k.right[j] * down_r;
    out.deriv.right[j] = 2.0 * sol.ell_deriv.right[j] * up_r + 2.0 * sol.k_deriv.right[j] * down_r;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite star graph.
// ---------------------------------------------------------------------------

enum class ResolventKind { minimal, full, limit };

struct EdgeApplication {
  std::vector<double> value;
  std::vector<double> deriv;
  double c = 0.0;  // C(g) = f'(0) = 2 int_0^r ell g / w
};

inline EdgeApplication edge_minimal_apply(const EdgeSlSolution& sol, std::span<const double> g) {
  const std::size_t nn = sol.k.size();
  require(g.size() == nn, "edge_minimal_apply: size mismatch");
  std::vector<double> kg(nn), lg(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    kg[j] = sol.k[j] * g[j] / sol.wronskian[j];
    lg[j] = sol.ell[j] * g[j] / sol.wronskian[j];
  }
  auto P = cumulative_integral(kg, sol.h);
  auto U = cumulative_integral_backward(lg, sol.h);
  EdgeApplication out;
  out.value.resize(nn);
  out.deriv.resize(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    out.value[j] = 2.0 * sol.k[j] * U[j] + 2.0 * sol.ell[j] * P[j];
    out.deriv[j] = 2.0 * sol.k_deriv[j] * U[j] + 2.0 * sol.ell_deriv[j] * P[j];
  }
  out.c = 2.0 * U[0];
  return out;
}

/// Resolvent operator on the finite star graph. Minimal kind kills the
/// process at the center ((R0 g)_i(0) = 0); full/limit add the vertex term
/// (sum p_i C_i(g) / lambda sum p_i C_i(1)) * exit_law.
class FiniteGraphResolvent {
 public:
  static FiniteGraphResolvent minimal(EdgeGrid grid, std::vector<EdgeSlSolution> sols) {
    return FiniteGraphResolvent(ResolventKind::minimal, std::move(grid), std::move(sols), {});
  }

  static FiniteGraphResolvent full(EdgeGrid grid, std::vector<EdgeSlSolution> sols,
                                   std::vector<double> weights) {
    check_weights(weights, sols.size());
    return FiniteGraphResolvent(ResolventKind::full, std::move(grid), std::move(sols),
                                std::move(weights));
  }

  /// Closed-form limit operator: drift-free eigenfunctions on every edge,
  /// vertex weights p_i e^{2 alpha_i} (normalization is immaterial).
  static FiniteGraphResolvent limit(const EdgeGrid& grid, double lambda,
                                    const std::vector<double>& alpha,
                                    std::vector<double> weights) {
    check_weights(weights, weights.size());
    require(alpha.size() == weights.size(), "limit resolvent: alpha/weights size mismatch");
    ClosedFormLimits cf = closed_form_limits(lambda, grid.spec.edge_length);
    EdgeSlSolution base;
    base.lambda = lambda;
    base.h = grid.step;
    const std::size_t nn = static_cast<std::size_t>(grid.nodes());
    base.k.resize(nn);
    base.k_deriv.resize(nn);
    base.ell.resize(nn);
    base.ell_deriv.resize(nn);
    base.wronskian.assign(nn, cf.w());
    base.exponent.assign(nn, 0.0);
    for (int j = 0; j < grid.nodes(); ++j) {
      const double x = grid.point(j);
      base.k[static_cast<std::size_t>(j)] = cf.k(x);
      base.k_deriv[static_cast<std::size_t>(j)] = cf.k_deriv(x);
      base.ell[static_cast<std::size_t>(j)] = cf.ell(x);
      base.ell_deriv[static_cast<std::size_t>(j)] = cf.ell_deriv(x);
    }
    std::vector<EdgeSlSolution> sols(weights.size(), base);
    std::vector<double> tilted(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
      tilted[i] = weights[i] * std::exp(2.0 * alpha[i]);
    FiniteGraphResolvent op(ResolventKind::limit, grid, std::move(sols), std::move(tilted));
    op.lambda_ = lambda;
    return op;
  }

  ResolventKind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  const EdgeGrid& grid() const { return grid_; }
  const std::vector<double>& weights() const { return weights_; }
  const EdgeFunctionVec& exit_law() const { return exit_law_; }
  double c_one(std::size_t edge) const { return c_one_.at(edge); }
  const EdgeSlSolution& edge_solution(std::size_t edge) const { return sols_.at(edge); }

  double c_functional(std::size_t edge, const EdgeFunctionVec& g) const {
    return edge_minimal_apply(sols_.at(edge), g.values.at(edge)).c;
  }

  EdgeFunctionVec apply(const EdgeFunctionVec& g) const {
    auto [f, deriv] = apply_with_deriv(g);
    (void)deriv;
    return f;
  }

  /// Returns (f, f') with derivatives from the integral representations.
  std::pair<EdgeFunctionVec, EdgeFunctionVec> apply_with_deriv(const EdgeFunctionVec& g) const {
    require(g.grid.same_as(grid_), "FiniteGraphResolvent: grid mismatch");
    require(g.values.size() == sols_.size(), "FiniteGraphResolvent: edge count mismatch");
    require(g.center_consistent(1e-9), "FiniteGraphResolvent: g is not in the graph space");
    EdgeFunctionVec f = EdgeFunctionVec::zeros(grid_);
    EdgeFunctionVec fd = EdgeFunctionVec::zeros(grid_);
    std::vector<double> cs(sols_.size());
    for (std::size_t e = 0; e < sols_.size(); ++e) {
      EdgeApplication app = edge_minimal_apply(sols_[e], g.values[e]);
      f.values[e] = std::move(app.value);
      fd.values[e] = std::move(app.deriv);
      cs[e] = app.c;
    }
    if (kind_ != ResolventKind::minimal) {
      double num = 0.0, den = 0.0;
      for (std::size_t e = 0; e < sols_.size(); ++e) {
        num += weights_[e] * cs[e];
        den += weights_[e] * c_one_[e];
      }
      const double vertex = num / (lambda_ * den);
      for (std::size_t e = 0; e < sols_.size(); ++e)
        for (std::size_t j = 0; j < f.values[e].size(); ++j) {
          f.values[e][j] += vertex * exit_law_.values[e][j];
          fd.values[e][j] += vertex * exit_deriv_.values[e][j];
        }
    }
    return {std::move(f), std::move(fd)};
  }

 private:
  FiniteGraphResolvent(ResolventKind kind, EdgeGrid grid, std::vector<EdgeSlSolution> sols,
                       std::vector<double> weights)
      : kind_(kind), grid_(std::move(grid)), sols_(std::move(sols)), weights_(std::move(weights)) {
    require(!sols_.empty(), "FiniteGraphResolvent: no edge solutions");
    require(static_cast<int>(sols_.size()) == grid_.spec.edge_count,
            "FiniteGraphResolvent: edge count mismatch with grid");
    lambda_ = sols_.front().lambda;
    for (const auto& s : sols_)
      require(s.lambda == lambda_, "FiniteGraphResolvent: lambda mismatch between edge solutions");
    // exit law L = 1 - lambda R0 1 and its derivative, cached once
    exit_law_ = EdgeFunctionVec::zeros(grid_);
    exit_deriv_ = EdgeFunctionVec::zeros(grid_);
    c_one_.resize(sols_.size());
    std::vector<double> ones(static_cast<std::size_t>(grid_.nodes()), 1.0);
    for (std::size_t e = 0; e < sols_.size(); ++e) {
      EdgeApplication app = edge_minimal_apply(sols_[e], ones);
      c_one_[e] = app.c;
      require(c_one_[e] > 0.0, "FiniteGraphResolvent: C_i(1) must be positive");
      for (std::size_t j = 0; j < app.value.size(); ++j) {
        exit_law_.values[e][j] = 1.0 - lambda_ * app.value[j];
        exit_deriv_.values[e][j] = -lambda_ * app.deriv[j];
      }
    }
  }

  static void check_weights(const std::vector<double>& w, std::size_t edges) {
    require(w.size() == edges, "resolvent weights: size mismatch");
    double sum = 0.0;
    for (double v : w) {
      require(v > 0.0, "resolvent weights: must be positive");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-10, "resolvent weights: must sum to 1");
  }

  ResolventKind kind_;
  EdgeGrid grid_;
  std::vector<EdgeSlSolution> sols_;
  std::vector<double> weights_;
  double lambda_ = 0.0;
  EdgeFunctionVec exit_law_;
  EdgeFunctionVec exit_deriv_;
  std::vector<double> c_one_;
};

/// Solve all edges of a finite graph at one (lambda, eps) and assemble the
/// full operator.
inline FiniteGraphResolvent solve_full_resolvent(const EdgeGrid& grid, const DriftFamily& fam,
                                                 double lambda, std::vector<double> weights) {
  require(static_cast<std::size_t>(grid.spec.edge_count) == fam.edges(),
          "solve_full_resolvent: drift family size mismatch");
  std::vector<EdgeSlSolution> sols;
  sols.reserve(fam.edges());
  for (std::size_t e = 0; e < fam.edges(); ++e) {
    auto scaled = fam.scaled(e);
    std::vector<double> samples(static_cast<std::size_t>(grid.nodes()));
    for (int j = 0; j < grid.nodes(); ++j)
      samples[static_cast<std::size_t>(j)] = scaled(grid.point(j));
    sols.push_back(solve_edge_system(samples, grid.step, lambda, fam.mass_bound));
  }
  return FiniteGraphResolvent::full(grid, std::move(sols), std::move(weights));
}

// ---------------------------------------------------------------------------
// Interval <-> 2-edge adapter. The isomorphism sends f on [-r,r] to
// (f|_{[0,r]}, f(-.)|_{[0,r]}); drifts pick up a sign on the mirrored edge:
// a_1(x) = a(x), a_2(x) = -a(-x), and alpha = alpha_1 - alpha_2.
// ---------------------------------------------------------------------------

struct IntervalAdapter {
  double p = 0.5;          // weight of the right edge
  DriftFn interval_drift;  // a on R (may be empty for zero drift)

  std::vector<DriftFn> edge_drifts() const {
    DriftFn a = interval_drift ? interval_drift : zero_drift();
    return {
        [a](double x) { return a(x); },
        [a](double x) { return -a(-x); },
    };
  }
  std::vector<double> edge_weights() const { return {p, 1.0 - p}; }

  static EdgeFunctionVec to_graph(const IntervalFunction& f, const EdgeGrid& grid) {
    require(grid.spec.edge_count == 2, "IntervalAdapter: need a 2-edge grid");
    require(grid.n == f.n, "IntervalAdapter: grid mismatch");
    EdgeFunctionVec out = EdgeFunctionVec::zeros(grid);
    for (int j = 0; j <= f.n; ++j) {
      out.values[0][static_cast<std::size_t>(j)] = f.right[static_cast<std::size_t>(j)];
      out.values[1][static_cast<std::size_t>(j)] = f.left[static_cast<std::size_t>(f.n - j)];
    }
    return out;
  }

  static IntervalFunction from_graph(const EdgeFunctionVec& f) {
    require(f.values.size() == 2, "IntervalAdapter: need 2 edges");
    const int n = f.grid.n;
    IntervalFunction out = IntervalFunction::zeros(f.grid.spec.edge_length, n);
    for (int j = 0; j <= n; ++j) {
      out.right[static_cast<std::size_t>(j)] = f.values[0][static_cast<std::size_t>(j)];
      out.left[static_cast<std::size_t>(j)] = f.values[1][static_cast<std::size_t>(n - j)];
    }
    return out;
  }
};

/// |R g(center) - sum p~_i C(g_i) / (lambda C(1))| for the drift-free limit
/// operator; the excursion construction says this vanishes.
inline double excursion_identity_check(const FiniteGraphResolvent& op, const EdgeFunctionVec& g) {
  require(op.kind() == ResolventKind::limit, "excursion_identity_check: need the limit operator");
  EdgeFunctionVec f = op.apply(g);
  double wsum = 0.0;
  for (double w : op.weights()) wsum += w;
  double num = 0.0;
  for (std::size_t e = 0; e < op.weights().size(); ++e)
    num += (op.weights()[e] / wsum) * op.c_functional(e, g);
  const double rhs = num / (op.lambda() * op.c_one(0));
  return std::abs(f.center() - rhs);
}

// ---------------------------------------------------------------------------
// Numerically stable application of the drift-free graph resolvent for large
// lambda (s*r >> 1), where cosh/sinh overflow: exponential-envelope panel
// recurrences, exact in the weight and piecewise-linear in g.
// ---------------------------------------------------------------------------

class StableLimitResolvent {
 public:
  StableLimitResolvent(EdgeGrid grid, double lambda, std::vector<double> tilde_weights)
      : grid_(std::move(grid)), lambda_(lambda), weights_(std::move(tilde_weights)) {
    const double r = grid_.spec.edge_length;
    s_ = std::sqrt(2.0 * lambda_);
    const std::size_t nn = static_cast<std::size_t>(grid_.nodes());
    const double h = grid_.step;
    const double E = std::exp(-s_ * h);
    w_near_ = ((1.0 - E) / s_ - (1.0 - E * (1.0 + s_ * h)) / (s_ * s_) / h);
    w_far_ = (1.0 - E * (1.0 + s_ * h)) / (s_ * s_) / h;
    decay_ = E;
    den2_ = 1.0 + std::exp(-2.0 * s_ * r);
    c_.resize(nn);
    emsx_.resize(nn);
    em2sx_.resize(nn);
    emsrx_.resize(nn);
    for (std::size_t j = 0; j < nn; ++j) {
      const double x = h * static_cast<double>(j);
      c_[j] = (1.0 + std::exp(-2.0 * s_ * (r - x))) / den2_;
      emsx_[j] = std::exp(-s_ * x);
      em2sx_[j] = std::exp(-2.0 * s_ * x);
      emsrx_[j] = std::exp(-s_ * (r - x));
    }
    c_one_ = 2.0 * std::tanh(s_ * r) / s_;
    double wsum = 0.0;
    for (double w : weights_) wsum += w;
    for (auto& w : weights_) w /= wsum;
  }

  double lambda() const { return lambda_; }

  EdgeFunctionVec apply(const EdgeFunctionVec& g) const {
    require(g.values.size() == weights_.size(), "StableLimitResolvent: edge count mismatch");
    const std::size_t nn = c_.size();
    EdgeFunctionVec f = EdgeFunctionVec::zeros(grid_);
    std::vector<double> cs(weights_.size());
    std::vector<std::vector<double>> parts(weights_.size());
    for (std::size_t e = 0; e < weights_.size(); ++e) {
      const auto& gv = g.values[e];
      std::vector<double> Jp(nn, 0.0), Jt(nn, 0.0), Jm(nn, 0.0), K(nn, 0.0);
      for (std::size_t j = nn - 1; j-- > 0;) {
        Jp[j] = decay_ * Jp[j + 1] + gv[j] * w_near_ + gv[j + 1] * w_far_;
        Jt[j] = Jt[j + 1] + emsrx_[j + 1] * (gv[j] * w_far_ + gv[j + 1] * w_near_);
      }
      for (std::size_t j = 0; j + 1 < nn; ++j) {
        Jm[j + 1] = decay_ * Jm[j] + gv[j] * w_far_ + gv[j + 1] * w_near_;
        K[j + 1] = K[j] + emsx_[j] * (gv[j] * w_near_ + gv[j + 1] * w_far_);
      }
      parts[e].resize(nn);
      for (std::size_t j = 0; j < nn; ++j) {
        const double jplus_c = (Jp[j] + emsrx_[j] * Jt[j]) / den2_;
        parts[e][j] = ((1.0 - em2sx_[j]) * jplus_c + c_[j] * (Jm[j] - emsx_[j] * K[j])) / s_;
      }
      cs[e] = 2.0 * (Jp[0] + emsrx_[0] * Jt[0]) / den2_;
    }
    double num = 0.0;
    for (std::size_t e = 0; e < weights_.size(); ++e) num += weights_[e] * cs[e];
    const double vertex = num / (lambda_ * c_one_);
    for (std::size_t e = 0; e < weights_.size(); ++e)
      for (std::size_t j = 0; j < nn; ++j)
        f.values[e][j] = parts[e][j] + vertex * emsx_[j] * c_[j];
    return f;
  }

 private:
  EdgeGrid grid_;
  double lambda_, s_;
  std::vector<double> weights_;
  double w_near_ = 0.0, w_far_ = 0.0, decay_ = 0.0, den2_ = 1.0, c_one_ = 0.0;
  std::vector<double> c_, emsx_, em2sx_, emsrx_;
};

}  // namespace membrane
