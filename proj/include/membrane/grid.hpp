#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "membrane/errors.hpp"

namespace membrane {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Star graph K_{1,k}: one center, k edges of length r, or k infinite rays
/// truncated at a working horizon for sampling.
struct StarGraphSpec {
  int edge_count = 1;
  double edge_length = 1.0;  // r for finite graphs, sampling horizon when infinite
  bool infinite = false;

  static StarGraphSpec finite(int k, double r) {
    require(k >= 1, "StarGraphSpec: edge count must be >= 1");
    require(r > 0.0, "StarGraphSpec: edge length must be positive");
    return {k, r, false};
  }
  static StarGraphSpec infinite_rays(int k, double horizon) {
    require(k >= 1, "StarGraphSpec: edge count must be >= 1");
    require(horizon > 0.0, "StarGraphSpec: horizon must be positive");
    return {k, horizon, true};
  }
};

/// Uniform grid shared by every edge: x_j = j*step, j = 0..n.
struct EdgeGrid {
  StarGraphSpec spec;
  int n = 2;
  double step = 0.5;

  int nodes() const { return n + 1; }
  double point(int j) const { return step * j; }
  std::vector<double> points() const {
    std::vector<double> xs(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) xs[static_cast<std::size_t>(j)] = point(j);
    return xs;
  }
  bool same_as(const EdgeGrid& other) const {
    return spec.edge_count == other.spec.edge_count && n == other.n &&
           spec.infinite == other.spec.infinite && spec.edge_length == other.spec.edge_length;
  }
};

inline EdgeGrid make_grid(const StarGraphSpec& spec, int n) {
  require(n >= 2, "make_grid: need at least 2 subintervals per edge");
  require(spec.edge_length > 0.0, "make_grid: non-positive edge length");
  return {spec, n, spec.edge_length / n};
}

/// Element of the graph function space: one sampled array per edge, all
/// sharing the center value; infinite graphs carry a limit scalar per edge.
struct EdgeFunctionVec {
  EdgeGrid grid;
  std::vector<std::vector<double>> values;  // edge_count arrays of n+1 samples
  std::vector<double> limits;               // per-edge limit at infinity (infinite graphs)

  static EdgeFunctionVec zeros(const EdgeGrid& g) {
    EdgeFunctionVec f;
    f.grid = g;
    f.values.assign(static_cast<std::size_t>(g.spec.edge_count),
                    std::vector<double>(static_cast<std::size_t>(g.nodes()), 0.0));
    if (g.spec.infinite) f.limits.assign(static_cast<std::size_t>(g.spec.edge_count), 0.0);
    return f;
  }

  double center() const { return values.at(0).at(0); }

  /// Membership in the space: f_i(0) must not depend on i.
  bool center_consistent(double tol = 1e-12) const {
    for (const auto& v : values)
      if (std::abs(v[0] - values[0][0]) > tol) return false;
    return true;
  }
};

/// Function on [-r,r] with a doubled node at 0 so one-sided values and
/// derivatives are first-class. left[n] = f(0-), right[0] = f(0+).
struct IntervalFunction {
  double r = 1.0;
  int n = 2;                  // subintervals per half
  std::vector<double> left;   // samples on [-r, 0], ascending x
  std::vector<double> right;  // samples on [0, r], ascending x

  double step() const { return r / n; }
  double left_point(int j) const { return -r + step() * j; }
  double right_point(int j) const { return step() * j; }
  double at_zero_minus() const { return left.back(); }
  double at_zero_plus() const { return right.front(); }
  bool continuous_at_zero(double tol = 1e-12) const {
    return std::abs(at_zero_minus() - at_zero_plus()) <= tol;
  }

  static IntervalFunction zeros(double r, int n) {
    require(n >= 2, "IntervalFunction: need n >= 2 per half");
    require(r > 0.0, "IntervalFunction: r must be positive");
    IntervalFunction f;
    f.r = r;
    f.n = n;
    f.left.assign(static_cast<std::size_t>(n) + 1, 0.0);
    f.right.assign(static_cast<std::size_t>(n) + 1, 0.0);
    return f;
  }

  template <class Fn>
  static IntervalFunction sample(double r, int n, Fn&& fn) {
    IntervalFunction f = zeros(r, n);
    for (int j = 0; j <= n; ++j) {
      f.left[static_cast<std::size_t>(j)] = fn(f.left_point(j));
      f.right[static_cast<std::size_t>(j)] = fn(f.right_point(j));
    }
    return f;
  }
};

// ---------------------------------------------------------------------------
// Quadrature.
//
// Cumulative integral F(x_j) = int_0^{x_j} f. Composite Simpson over even
// prefixes; odd prefixes close with the Newton-Cotes 3/8 triple; the first
// panel uses the cubic through the first four nodes. Exact for polynomials of
// degree <= 3 at every node once n >= 3.
// ---------------------------------------------------------------------------

inline std::vector<double> cumulative_integral(std::span<const double> f, double h) {
  const std::size_t n = f.size() - 1;
  require(f.size() >= 3, "cumulative_integral: need at least 3 samples");
  require(h > 0.0, "cumulative_integral: step must be positive");
  std::vector<double> F(f.size(), 0.0);
  for (std::size_t j = 2; j <= n; j += 2)
    F[j] = F[j - 2] + h / 3.0 * (f[j - 2] + 4.0 * f[j - 1] + f[j]);
  for (std::size_t j = 3; j <= n; j += 2)
    F[j] = F[j - 3] + 3.0 * h / 8.0 * (f[j - 3] + 3.0 * f[j - 2] + 3.0 * f[j - 1] + f[j]);
  if (n >= 3)
    F[1] = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
  else
    F[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
  return F;
}

/// Tail integrals G(x_j) = int_{x_j}^{x_n} f, accumulated from the far end so
/// exponentially small tails keep full relative accuracy.
inline std::vector<double> cumulative_integral_backward(std::span<const double> f, double h) {
  std::vector<double> rev(f.rbegin(), f.rend());
  std::vector<double> G = cumulative_integral(rev, h);
  std::reverse(G.begin(), G.end());
  return G;
}

inline double integral(std::span<const double> f, double h) {
  return cumulative_integral(f, h).back();
}

// ---------------------------------------------------------------------------
// Norms and distances. All evaluated on grid nodes.
// ---------------------------------------------------------------------------

/// Edge/half-line Bielecki norm: max e^{-omega x} |f(x)|.
inline double bielecki_norm(std::span<const double> f, double h, double omega) {
  require(omega > 0.0, "bielecki_norm: omega must be positive");
  double m = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    m = std::max(m, std::exp(-omega * h * static_cast<double>(j)) * std::abs(f[j]));
  return m;
}

/// Interval Bielecki norm: max e^{-omega (x+r)} |f(x)|.
inline double bielecki_norm(const IntervalFunction& f, double omega) {
  require(omega > 0.0, "bielecki_norm: omega must be positive");
  const double h = f.step();
  double m = 0.0;
  for (int j = 0; j <= f.n; ++j) {
    const double wl = std::exp(-omega * h * j);
    const double wr = std::exp(-omega * (f.r + h * j));
    m = std::max(m, wl * std::abs(f.left[static_cast<std::size_t>(j)]));
    m = std::max(m, wr * std::abs(f.right[static_cast<std::size_t>(j)]));
  }
  return m;
}

inline double sup_norm(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_norm(const IntervalFunction& f) {
  return std::max(sup_norm(f.left), sup_norm(f.right));
}

inline double sup_norm(const EdgeFunctionVec& f) {
  double m = 0.0;
  for (const auto& v : f.values) m = std::max(m, sup_norm(v));
  for (double v : f.limits) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_distance(const EdgeFunctionVec& f, const EdgeFunctionVec& g) {
  require(f.grid.same_as(g.grid), "sup_distance: grid mismatch");
  require(f.values.size() == g.values.size(), "sup_distance: edge count mismatch");
  double m = 0.0;
  for (std::size_t e = 0; e < f.values.size(); ++e)
    for (std::size_t j = 0; j < f.values[e].size(); ++j)
      m = std::max(m, std::abs(f.values[e][j] - g.values[e][j]));
  for (std::size_t e = 0; e < f.limits.size(); ++e)
    m = std::max(m, std::abs(f.limits[e] - g.limits[e]));
  return m;
}

inline double sup_distance(const IntervalFunction& f, const IntervalFunction& g) {
  require(f.n == g.n && f.r == g.r, "sup_distance: grid mismatch");
  double m = 0.0;
  for (std::size_t j = 0; j < f.left.size(); ++j) {
    m = std::max(m, std::abs(f.left[j] - g.left[j]));
    m = std::max(m, std::abs(f.right[j] - g.right[j]));
  }
  return m;
}

// ---------------------------------------------------------------------------
// One-sided derivatives: second-order 3-point stencils, never straddling the
// evaluation node's far side (so interval queries never cross the membrane).
// ---------------------------------------------------------------------------

enum class Side { plus, minus };

inline double one_sided_derivative(std::span<const double> f, std::size_t at, double h, Side side) {
  if (side == Side::plus) {
    require(at + 2 < f.size(), "one_sided_derivative: need 3 points on the + side");
    return (-3.0 * f[at] + 4.0 * f[at + 1] - f[at + 2]) / (2.0 * h);
  }
  require(at >= 2, "one_sided_derivative: need 3 points on the - side");
  return (3.0 * f[at] - 4.0 * f[at - 1] + f[at - 2]) / (2.0 * h);
}

/// Derivative of an interval function at the doubled node: side selects
/// f'(0+) (right samples) or f'(0-) (left samples).
inline double derivative_at_zero(const IntervalFunction& f, Side side) {
  const double h = f.step();
  if (side == Side::plus) return one_sided_derivative(f.right, 0, h, Side::plus);
  return one_sided_derivative(f.left, f.left.size() - 1, h, Side::minus);
}

}  // namespace membrane
