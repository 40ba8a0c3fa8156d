#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "membrane/errors.hpp"
#include "membrane/grid.hpp"

namespace membrane {

// Solvers for  (1/2) f'' + a f' = lambda f  by Picard iteration of the
// equivalent Volterra equations. The nested double integrals run as two
// cumulative passes, O(n) per sweep; derivatives always come from the
// integral representation, never from differencing the iterate.
//
// Stopping: the Bielecki-norm update must fall below tol*(1 + size) AND the
// plain sup-norm update below tol*(1 + sup size). The second clause matters:
// the exponential weight e^{-omega x} can report convergence while the far
// end of the grid is still pointwise wrong.

inline constexpr int kPicardCap = 10000;
inline constexpr double kPicardTol = 1e-12;

namespace detail {

inline void check_finite(std::span<const double> v, const char* who) {
  for (double x : v)
    if (!std::isfinite(x)) throw numeric_failure(std::string(who) + ": non-finite value");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Edge / half-line solves on [0, L].
// ---------------------------------------------------------------------------

struct EdgeSolution {
  std::vector<double> value;
  std::vector<double> deriv;
  std::vector<double> exponent;  // frak_a(x) = 2 int_0^x a
  int iterations = 0;
  double residual = 0.0;  // last Bielecki-norm update
  double omega = 0.0;     // Bielecki weight used
};

/// Fixed point of f -> inhom + 2 lambda * iint e^{-2 int a} f. With
/// unit_slope=true the inhomogeneity is int_0^x e^{-frak_a} (solution k with
/// k(0)=0, k'(0)=1); otherwise it is 1 (solutions j and the reflected ell).
inline EdgeSolution picard_edge(std::span<const double> drift, double h, double lambda,
                                double mass_bound, bool unit_slope,
                                double tol = kPicardTol) {
  require(lambda > 0.0, "picard_edge: lambda must be positive");
  const std::size_t nn = drift.size();
  EdgeSolution out;
  out.exponent = cumulative_integral(drift, h);
  for (auto& v : out.exponent) v *= 2.0;
  std::vector<double> egrow(nn), edecay(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    egrow[j] = std::exp(out.exponent[j]);
    edecay[j] = std::exp(-out.exponent[j]);
  }
  std::vector<double> inhom;
  if (unit_slope) inhom = cumulative_integral(edecay, h);

  out.omega = 2.0 * std::sqrt(2.0 * lambda * std::exp(2.0 * mass_bound));
  std::vector<double> f(nn, 1.0), weighted(nn), slope(nn), next(nn);
  for (int it = 1; it <= kPicardCap; ++it) {
    for (std::size_t j = 0; j < nn; ++j) weighted[j] = egrow[j] * f[j];
    auto inner = cumulative_integral(weighted, h);
    for (std::size_t j = 0; j < nn; ++j)
      slope[j] = edecay[j] * ((unit_slope ? 1.0 : 0.0) + 2.0 * lambda * inner[j]);
    auto grown = cumulative_integral(slope, h);
    double res_b = 0.0, size_b = 0.0, res_s = 0.0, size_s = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
      next[j] = (unit_slope ? 0.0 : 1.0) + grown[j];
      const double w = std::exp(-out.omega * h * static_cast<double>(j));
      res_b = std::max(res_b, w * std::abs(next[j] - f[j]));
      size_b = std::max(size_b, w * std::abs(next[j]));
      res_s = std::max(res_s, std::abs(next[j] - f[j]));
      size_s = std::max(size_s, std::abs(next[j]));
    }
    f.swap(next);
    out.iterations = it;
    out.residual = res_b;
    if (res_b < tol * (1.0 + size_b) && res_s < tol * (1.0 + size_s)) {
      detail::check_finite(f, "picard_edge");
      out.value = std::move(f);
      out.deriv = std::move(slope);
      return out;
    }
  }
  throw numeric_failure("picard_edge: no convergence within iteration cap");
}

/// Increasing solution on [0,r] with k(0)=0, k'(0)=1.
inline EdgeSolution solve_k_edge(std::span<const double> drift, double h, double lambda,
                                 double mass_bound) {
  return picard_edge(drift, h, lambda, mass_bound, /*unit_slope=*/true);
}

/// Decreasing positive solution on [0,r] with ell(r)=1, ell'(r)=0, via the
/// reflection s -> r-s (drift flips to -a(r-s)).
inline EdgeSolution solve_ell_edge(std::span<const double> drift, double h, double lambda,
                                   double mass_bound) {
  std::vector<double> reflected(drift.size());
  for (std::size_t j = 0; j < drift.size(); ++j)
    reflected[j] = -drift[drift.size() - 1 - j];
  EdgeSolution m = picard_edge(reflected, h, lambda, mass_bound, /*unit_slope=*/false);
  EdgeSolution out;
  out.iterations = m.iterations;
  out.residual = m.residual;
  out.omega = m.omega;
  const std::size_t nn = m.value.size();
  out.value.resize(nn);
  out.deriv.resize(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    out.value[j] = m.value[nn - 1 - j];
    out.deriv[j] = -m.deriv[nn - 1 - j];
  }
  // exponent of the original drift, for callers that need e^{frak_a}
  out.exponent = cumulative_integral(drift, h);
  for (auto& v : out.exponent) v *= 2.0;
  return out;
}

/// The pair (k, ell) on one edge together with the pointwise Wronskian
/// w = k' ell - ell' k (x-dependent for eps > 0).
struct EdgeSlSolution {
  double lambda = 0.0;
  double h = 0.0;
  std::vector<double> k, k_deriv, ell, ell_deriv, wronskian, exponent;
  int iterations = 0;
  double residual = 0.0;
};

inline EdgeSlSolution solve_edge_system(std::span<const double> drift, double h, double lambda,
                                        double mass_bound) {
  EdgeSlSolution s;
  s.lambda = lambda;
  s.h = h;
  EdgeSolution k = solve_k_edge(drift, h, lambda, mass_bound);
  EdgeSolution l = solve_ell_edge(drift, h, lambda, mass_bound);
  s.k = std::move(k.value);
  s.k_deriv = std::move(k.deriv);
  s.ell = std::move(l.value);
  s.ell_deriv = std::move(l.deriv);
  s.exponent = std::move(k.exponent);
  s.iterations = k.iterations + l.iterations;
  s.residual = std::max(k.residual, l.residual);
  s.wronskian.resize(s.k.size());
  for (std::size_t j = 0; j < s.k.size(); ++j) {
    s.wronskian[j] = s.k_deriv[j] * s.ell[j] - s.ell_deriv[j] * s.k[j];
    if (std::abs(s.wronskian[j]) < 1e-12)
      throw numeric_failure("solve_edge_system: vanishing Wronskian");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Interval solves on [-r, r] with the gamma transmission at the membrane.
// ---------------------------------------------------------------------------

struct IntervalSolution {
  IntervalFunction value;
  IntervalFunction deriv;
  int iterations = 0;
  double residual = 0.0;
  double omega = 0.0;
};

/// Fixed point of the interval map with kernel
/// V(y,z) = e^{-2 int_z^y a} (gamma [yz<0] + [yz>=0]): increasing solution
/// with k(-r)=1, k'(-r)=0 and k'(0+) = gamma k'(0-).
inline IntervalSolution solve_k_interval(const IntervalFunction& drift, double lambda,
                                         double gamma, double mass_bound,
                                         double tol = kPicardTol) {
  require(lambda > 0.0, "solve_k_interval: lambda must be positive");
  require(gamma > 0.0, "solve_k_interval: gamma must be positive");
  const int n = drift.n;
  const double h = drift.step();
  const std::size_t nn = static_cast<std::size_t>(n) + 1;

  // A(x) = 2 int_{-r}^x a; continuous across 0 even when a jumps there.
  auto Al = cumulative_integral(drift.left, h);
  for (auto& v : Al) v *= 2.0;
  auto Ar = cumulative_integral(drift.right, h);
  for (auto& v : Ar) v = Al.back() + 2.0 * v;
  std::vector<double> egl(nn), egr(nn), edl(nn), edr(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    egl[j] = std::exp(Al[j]);
    edl[j] = std::exp(-Al[j]);
    egr[j] = std::exp(Ar[j]);
    edr[j] = std::exp(-Ar[j]);
  }

  IntervalSolution out;
  out.omega = 2.0 * std::sqrt(2.0 * lambda * std::exp(2.0 * mass_bound) * std::max(1.0, gamma));
  IntervalFunction f = IntervalFunction::zeros(drift.r, n);
  std::fill(f.left.begin(), f.left.end(), 1.0);
  std::fill(f.right.begin(), f.right.end(), 1.0);
  IntervalFunction slope = IntervalFunction::zeros(drift.r, n);
  std::vector<double> wl(nn), wr(nn);
  for (std::size_t j = 0; j < nn; ++j) {
    wl[j] = std::exp(-out.omega * h * static_cast<double>(j));
    wr[j] = std::exp(-out.omega * (drift.r + h * static_cast<double>(j)));
  }

  std::vector<double> prodl(nn), prodr(nn);
  for (int it = 1; it <= kPicardCap; ++it) {
    for (std::size_t j = 0; j < nn; ++j) prodl[j] = egl[j] * f.left[j];
    auto Pl = cumulative_integral(prodl, h);
    for (std::size_t j = 0; j < nn; ++j) prodr[j] = egr[j] * f.right[j];
    auto Pr = cumulative_integral(prodr, h);
    const double left_mass = Pl.back();
    // slope/(2 lambda); the gamma factor hits the z<0 contribution for y>0
    for (std::size_t j = 0; j < nn; ++j) {
      slope.left[j] = edl[j] * Pl[j];
      slope.right[j] = edr[j] * (gamma * left_mass + Pr[j]);
    }
    auto Ql = cumulative_integral(slope.left, h);
    auto Qr = cumulative_integral(slope.right, h);
    double res_b = 0.0, size_b = 0.0, res_s = 0.0, size_s = 0.0;
    for (std::size_t j = 0; j < nn; ++j) {
      const double nl = 1.0 + 2.0 * lambda * Ql[j];
      const double nr = 1.0 + 2.0 * lambda * (Ql.back() + Qr[j]);
      res_b = std::max({res_b, wl[j] * std::abs(nl - f.left[j]),
                        wr[j] * std::abs(nr - f.right[j])});
      size_b = std::max({size_b, wl[j] * std::abs(nl), wr[j] * std::abs(nr)});
      res_s = std::max({res_s, std::abs(nl - f.left[j]), std::abs(nr - f.right[j])});
      size_s = std::max({size_s, std::abs(nl), std::abs(nr)});
      f.left[j] = nl;
      f.right[j] = nr;
    }
    out.iterations = it;
    out.residual = res_b;
    if (res_b < tol * (1.0 + size_b) && res_s < tol * (1.0 + size_s)) {
      detail::check_finite(f.left, "solve_k_interval");
      detail::check_finite(f.right, "solve_k_interval");
      for (std::size_t j = 0; j < nn; ++j) {
        slope.left[j] *= 2.0 * lambda;
        slope.right[j] *= 2.0 * lambda;
      }
      out.value = std::move(f);
      out.deriv = std::move(slope);
      return out;
    }
  }
  throw numeric_failure("solve_k_interval: no convergence within iteration cap");
}

/// Decreasing solution with ell(r)=1, ell'(r)=0 and the same transmission,
/// from solve_k_interval applied to a(x) -> -a(-x) with gamma -> 1/gamma.
inline IntervalSolution solve_ell_interval(const IntervalFunction& drift, double lambda,
                                           double gamma, double mass_bound) {
  const int n = drift.n;
  const std::size_t nn = static_cast<std::size_t>(n) + 1;
  IntervalFunction reflected = IntervalFunction::zeros(drift.r, n);
  for (std::size_t j = 0; j < nn; ++j) {
    reflected.left[j] = -drift.right[nn - 1 - j];
    reflected.right[j] = -drift.left[nn - 1 - j];
  }
  IntervalSolution hat = solve_k_interval(reflected, lambda, 1.0 / gamma, mass_bound);
  IntervalSolution out;
  out.iterations = hat.iterations;
  out.residual = hat.residual;
  out.omega = hat.omega;
  out.value = IntervalFunction::zeros(drift.r, n);
  out.deriv = IntervalFunction::zeros(drift.r, n);
  for (std::size_t j = 0; j < nn; ++j) {
    out.value.left[j] = hat.value.right[nn - 1 - j];
    out.value.right[j] = hat.value.left[nn - 1 - j];
    out.deriv.left[j] = -hat.deriv.right[nn - 1 - j];
    out.deriv.right[j] = -hat.deriv.left[nn - 1 - j];
  }
  return out;
}

struct IntervalSlSolution {
  double lambda = 0.0;
  double gamma = 0.0;
  IntervalFunction k, k_deriv, ell, ell_deriv, wronskian;
  int iterations = 0;
  double residual = 0.0;
};

inline IntervalSlSolution solve_interval_system(const IntervalFunction& drift, double lambda,
                                                double gamma, double mass_bound) {
  IntervalSlSolution s;
  s.lambda = lambda;
  s.gamma = gamma;
  IntervalSolution k = solve_k_interval(drift, lambda, gamma, mass_bound);
  IntervalSolution l = solve_ell_interval(drift, lambda, gamma, mass_bound);
  s.k = std::move(k.value);
  s.k_deriv = std::move(k.deriv);
  s.ell = std::move(l.value);
  s.ell_deriv = std::move(l.deriv);
  s.iterations = k.iterations + l.iterations;
  s.residual = std::max(k.residual, l.residual);
  s.wronskian = IntervalFunction::zeros(drift.r, drift.n);
  for (std::size_t j = 0; j < s.k.left.size(); ++j) {
    s.wronskian.left[j] = s.k_deriv.left[j] * s.ell.left[j] - s.ell_deriv.left[j] * s.k.left[j];
    s.wronskian.right[j] =
        s.k_deriv.right[j] * s.ell.right[j] - s.ell_deriv.right[j] * s.k.right[j];
    if (std::abs(s.wronskian.left[j]) < 1e-12 || std::abs(s.wronskian.right[j]) < 1e-12)
      throw numeric_failure("solve_interval_system: vanishing Wronskian");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Half-line [0, X_max].
// ---------------------------------------------------------------------------

/// Growth rate lower bound: j >= cosh(omega_1 x).
inline double omega_one(double lambda, double mass_bound) {
  return std::sqrt(2.0 * lambda * std::exp(-2.0 * mass_bound));
}

inline double default_halfline_horizon(double lambda, double mass_bound) {
  return 12.0 / std::min(omega_one(lambda, mass_bound), std::sqrt(2.0 * lambda));
}

/// Normalized growing solution j(0)=1, j'(0)=0 on [0, X_max]. Horizon
/// adequacy is checked when the system is assembled in k_ell_from_j.
inline EdgeSolution solve_j_halfline(std::span<const double> drift, double h, double lambda,
                                     double mass_bound) {
  return picard_edge(drift, h, lambda, mass_bound, /*unit_slope=*/false);
}

/// The half-line system built from j:
///   k = j int_0^x e^{-frak_a}/j^2,  ell = j int_x^inf e^{-frak_a}/j^2,
/// w = e^{frak_a}(k' ell - ell' k) constant = ell(0). The integral to
/// infinity is truncated at X_max and closed with the exact exponential
/// envelope of j beyond the horizon (drift exhausted there):
///   j(y) = A e^{s(y-X)} + B e^{-s(y-X)}  =>  tail = e^{-frak_a(X)} / (2 s A j(X)).
struct HalfLineSystem {
  double lambda = 0.0;
  double h = 0.0;
  std::vector<double> j, j_deriv, k, k_deriv, ell, ell_deriv, exponent;
  double w = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

inline HalfLineSystem k_ell_from_j(const EdgeSolution& jsol, double h, double lambda,
                                   double mass_bound) {
  const double s = std::sqrt(2.0 * lambda);
  const std::size_t nn = jsol.value.size();
  const double x_max = h * static_cast<double>(nn - 1);
  if (std::exp(-omega_one(lambda, mass_bound) * x_max) > 1e-4)
    throw resolution_error("k_ell_from_j: horizon too small for tail tolerance");
  // envelope closure needs the drift exhausted near the horizon
  const std::size_t probe = nn - 1 - std::max<std::size_t>(1, nn / 20);
  if (std::abs(jsol.exponent.back() - jsol.exponent[probe]) > 1e-8)
    throw resolution_error("k_ell_from_j: drift mass still active at the horizon");
  HalfLineSystem sys;
  sys.lambda = lambda;
  sys.h = h;
  sys.iterations = jsol.iterations;
  sys.residual = jsol.residual;
  sys.exponent = jsol.exponent;
  sys.j = jsol.value;
  sys.j_deriv = jsol.deriv;

  std::vector<double> dens(nn);
  for (std::size_t i = 0; i < nn; ++i) dens[i] = std::exp(-sys.exponent[i]) / (sys.j[i] * sys.j[i]);
  auto fwd = cumulative_integral(dens, h);
  auto bwd = cumulative_integral_backward(dens, h);
  const double jX = sys.j.back();
  const double coefA = 0.5 * (jX + sys.j_deriv.back() / s);
  const double tail = std::exp(-sys.exponent.back()) / (2.0 * s * coefA * jX);
  sys.k.resize(nn);
  sys.k_deriv.resize(nn);
  sys.ell.resize(nn);
  sys.ell_deriv.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double d = std::exp(-sys.exponent[i]) / sys.j[i];
    sys.k[i] = sys.j[i] * fwd[i];
    sys.k_deriv[i] = sys.j_deriv[i] * fwd[i] + d;
    sys.ell[i] = sys.j[i] * (bwd[i] + tail);
    sys.ell_deriv[i] = sys.j_deriv[i] * (bwd[i] + tail) - d;
  }
  sys.w = sys.ell[0];
  return sys;
}

inline HalfLineSystem solve_halfline_system(std::span<const double> drift, double h,
                                            double lambda, double mass_bound) {
  EdgeSolution j = solve_j_halfline(drift, h, lambda, mass_bound);
  return k_ell_from_j(j, h, lambda, mass_bound);
}

// ---------------------------------------------------------------------------
// Explicit eps -> 0 limits (Cor. of the finite-graph convergence theorem).
// ---------------------------------------------------------------------------

/// Drift-free closed forms at rate s = sqrt(2 lambda) on [0,r]:
/// k(x) = sinh(sx)/s, ell(x) = cosh(s(r-x)), w = cosh(sr);
/// with edge mass alpha the increasing solution scales to e^{-2 alpha} k.
struct ClosedFormLimits {
  double lambda = 0.0;
  double r = 0.0;
  double s = 0.0;

  double k(double x) const { return std::sinh(s * x) / s; }
  double k_deriv(double x) const { return std::cosh(s * x); }
  double ell(double x) const { return std::cosh(s * (r - x)); }
  double ell_deriv(double x) const { return -s * std::sinh(s * (r - x)); }
  double w() const { return std::cosh(s * r); }
  double k_alpha(double x, double alpha) const { return std::exp(-2.0 * alpha) * k(x); }

  /// Limit kernel of the interval contraction map:
  /// V(y,z) = e^{-2 alpha} gamma [yz<0] + [yz>=0].
  static double limit_kernel(double alpha, double gamma, double y, double z) {
    return (y * z < 0.0) ? std::exp(-2.0 * alpha) * gamma : 1.0;
  }
};

inline ClosedFormLimits closed_form_limits(double lambda, double r) {
  require(lambda > 0.0, "closed_form_limits: lambda must be positive");
  require(r > 0.0, "closed_form_limits: r must be positive");
  return {lambda, r, std::sqrt(2.0 * lambda)};
}

}  // namespace membrane
