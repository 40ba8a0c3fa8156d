#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "membrane/drift.hpp"
#include "membrane/params.hpp"
#include "membrane/sturm_liouville.hpp"

using namespace membrane;
using Catch::Approx;

namespace {

IntervalFunction sample_drift(const DriftFn& a, double r, int n) {
  IntervalFunction f = IntervalFunction::zeros(r, n);
  for (int j = 0; j <= n; ++j) {
    f.left[j] = a(f.left_point(j));
    f.right[j] = a(f.right_point(j));
  }
  f.left.back() = a(-1e-13);  // left limit at the doubled node
  return f;
}

std::vector<double> sample_edge_drift(const DriftFn& a, double length, int n) {
  std::vector<double> v(n + 1);
  for (int j = 0; j <= n; ++j) v[j] = a(length * j / n);
  return v;
}

// interior FD defect of (1/2) f'' + a f' - lambda f, away from the membrane
double interval_defect(const IntervalSlSolution& sol, const IntervalFunction& fn,
                       const IntervalFunction& drift, double exclude) {
  const double h = fn.step();
  double worst = 0.0;
  auto scan = [&](const std::vector<double>& v, const std::vector<double>& a, bool left_side) {
    for (std::size_t j = 1; j + 1 < v.size(); ++j) {
      const double x = left_side ? -fn.r + h * j : h * j;
      if (std::abs(x) < exclude) continue;
      const double d2 = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / (h * h);
      const double d1 = (v[j + 1] - v[j - 1]) / (2.0 * h);
      worst = std::max(worst, std::abs(0.5 * d2 + a[j] * d1 - sol.lambda * v[j]));
    }
  };
  scan(fn.left, drift.left, true);
  scan(fn.right, drift.right, false);
  return worst;
}

}  // namespace

TEST_CASE("interval solve reproduces the drift-free closed form") {
  auto drift = IntervalFunction::zeros(1.0, 2000);
  IntervalSlSolution sol = solve_interval_system(drift, 0.5, 1.0, 0.0);
  // k = cosh(x+1), ell = cosh(1-x)
  for (int j = 0; j <= 2000; j += 100) {
    REQUIRE(sol.k.left[j] == Approx(std::cosh(sol.k.left_point(j) + 1.0)).margin(1e-8));
    REQUIRE(sol.k.right[j] == Approx(std::cosh(sol.k.right_point(j) + 1.0)).margin(1e-8));
    REQUIRE(sol.ell.right[j] == Approx(std::cosh(1.0 - sol.ell.right_point(j))).margin(1e-8));
  }
  REQUIRE(sol.k.right.back() == Approx(std::cosh(2.0)).margin(1e-8));
  // boundary data is built into the representation
  REQUIRE(sol.k.left.front() == 1.0);
  REQUIRE(sol.k_deriv.left.front() == 0.0);
  REQUIRE(sol.ell.right.back() == 1.0);
  REQUIRE(sol.ell_deriv.right.back() == 0.0);
}

TEST_CASE("interval transmission condition k'(0+) = gamma k'(0-)") {
  auto drift = IntervalFunction::zeros(1.0, 2000);
  IntervalSlSolution sol = solve_interval_system(drift, 0.5, 0.25, 0.0);
  REQUIRE(sol.k_deriv.right.front() == Approx(0.25 * std::sinh(1.0)).margin(1e-8));
  REQUIRE(sol.k_deriv.right.front() ==
          Approx(0.25 * sol.k_deriv.left.back()).margin(1e-12));
  REQUIRE(sol.ell_deriv.right.front() ==
          Approx(0.25 * sol.ell_deriv.left.back()).margin(1e-12));
}

TEST_CASE("interval solve with drift: defect, monotonicity, positivity") {
  const double eps = 0.1, lambda = 1.0, gamma = 0.25;
  DriftFn a = scale_drift(figure1_drift(), eps);
  const int n = 200;  // h = eps/20
  auto drift = sample_drift(a, 1.0, n);
  IntervalSlSolution sol = solve_interval_system(drift, lambda, gamma, 2.2);

  for (int j = 0; j < n; ++j) {
    REQUIRE(sol.k.left[j + 1] > sol.k.left[j]);
    REQUIRE(sol.k.right[j + 1] > sol.k.right[j]);
    REQUIRE(sol.ell.left[j + 1] < sol.ell.left[j]);
    REQUIRE(sol.ell.right[j + 1] < sol.ell.right[j]);
    REQUIRE(sol.k.left[j] > 0.0);
    REQUIRE(sol.ell.right[j] > 0.0);
  }

  const double h = drift.step();
  const double scale_k = (1.0 + 2.0 * lambda) * (1.0 + 2.0 * lambda) * sup_norm(sol.k);
  REQUIRE(interval_defect(sol, sol.k, drift, 0.4) <= 10.0 * h * h * scale_k);
  const double scale_l = (1.0 + 2.0 * lambda) * (1.0 + 2.0 * lambda) * sup_norm(sol.ell);
  REQUIRE(interval_defect(sol, sol.ell, drift, 0.4) <= 10.0 * h * h * scale_l);
}

TEST_CASE("wronskian obeys the factor-2 law per side with a gamma jump") {
  const double eps = 0.05, lambda = 0.5, gamma = 0.25;
  DriftFn a = scale_drift(figure1_drift(), eps);
  const int n = 800;  // h = eps/40: the 1e-6 constancy needs O(h^4) headroom
  auto drift = sample_drift(a, 1.0, n);
  IntervalSlSolution sol = solve_interval_system(drift, lambda, gamma, 2.2);

  auto Al = cumulative_integral(drift.left, drift.step());
  auto Ar = cumulative_integral(drift.right, drift.step());
  auto check_side = [&](const std::vector<double>& w, const std::vector<double>& A,
                        double offset) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double c = w[j] * std::exp(2.0 * (offset + A[j]));
      lo = std::min(lo, c);
      hi = std::max(hi, c);
    }
    REQUIRE((hi - lo) / std::abs(0.5 * (hi + lo)) <= 1e-6);
    return 0.5 * (hi + lo);
  };
  const double cl = check_side(sol.wronskian.left, Al, 0.0);
  const double cr = check_side(sol.wronskian.right, Ar, Al.back());
  REQUIRE(cr / cl == Approx(gamma).margin(1e-6));
  // the factor-1 weighting is NOT constant
  double lo = 1e300, hi = -1e300;
  for (std::size_t j = 0; j < sol.wronskian.left.size(); ++j) {
    const double c = sol.wronskian.left[j] * std::exp(Al[j]);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  REQUIRE((hi - lo) / std::abs(0.5 * (hi + lo)) > 1e-2);
}

TEST_CASE("edge solves reproduce closed forms") {
  const int n = 2000;
  std::vector<double> zero(n + 1, 0.0);
  EdgeSlSolution s = solve_edge_system(zero, 1.0 / n, 0.5, 0.0);
  REQUIRE(s.k.back() == Approx(std::sinh(1.0)).margin(1e-8));
  REQUIRE(s.ell.front() == Approx(std::cosh(1.0)).margin(1e-8));
  REQUIRE(s.k.front() == 0.0);
  REQUIRE(s.k_deriv.front() == 1.0);
  REQUIRE(s.ell.back() == 1.0);
  REQUIRE(s.ell_deriv.back() == 0.0);
  for (int j = 0; j <= n; j += 100)
    REQUIRE(s.wronskian[j] == Approx(std::cosh(1.0)).margin(1e-8));
}

TEST_CASE("edge solve with drift satisfies the ODE") {
  const double lambda = 0.5;
  const int n = 2000;
  auto a = sample_edge_drift([](double x) { return std::exp(-x); }, 1.0, n);
  const double h = 1.0 / n;
  EdgeSlSolution s = solve_edge_system(a, h, lambda, 1.0);
  double worst = 0.0;
  for (int j = 1; j < n; ++j) {
    const double d2 = (s.k[j + 1] - 2.0 * s.k[j] + s.k[j - 1]) / (h * h);
    const double d1 = (s.k[j + 1] - s.k[j - 1]) / (2.0 * h);
    worst = std::max(worst, std::abs(0.5 * d2 + a[j] * d1 - lambda * s.k[j]));
  }
  REQUIRE(worst <= 10.0 * h * h * (1.0 + 2.0 * lambda) * (1.0 + 2.0 * lambda) * sup_norm(s.k));
}

TEST_CASE("half-line j solve") {
  const double lambda = 0.5;
  const double x_max = default_halfline_horizon(lambda, 0.0);
  const int n = 8000;
  std::vector<double> zero(n + 1, 0.0);
  const double h = x_max / n;
  EdgeSolution j = solve_j_halfline(zero, h, lambda, 0.0);
  REQUIRE(j.value.front() == 1.0);
  REQUIRE(j.deriv.front() == 0.0);
  for (int i = 0; i <= n; i += 500) {
    const double x = h * i;
    REQUIRE(j.value[i] == Approx(std::cosh(x)).epsilon(1e-8));
  }

  // with drift: j >= cosh(omega_1 x) pointwise
  const double mass = 1.0;
  auto a = sample_edge_drift([](double x) { return std::exp(-x); }, x_max, n);
  EdgeSolution jd = solve_j_halfline(a, h, lambda, mass);
  const double om1 = omega_one(lambda, mass);
  for (int i = 0; i <= n; i += 100)
    REQUIRE(jd.value[i] >= std::cosh(om1 * h * i) - 1e-8);
}

TEST_CASE("half-line system: k, ell, constant weighted wronskian") {
  const double lambda = 0.5;
  const double x_max = default_halfline_horizon(lambda, 0.0);
  const int n = 8000;
  const double h = x_max / n;
  std::vector<double> zero(n + 1, 0.0);
  HalfLineSystem sys = solve_halfline_system(zero, h, lambda, 0.0);
  REQUIRE(sys.w == Approx(1.0).margin(1e-8));  // 1/sqrt(2 lambda)
  REQUIRE(sys.k.front() == 0.0);
  for (int i = 0; i <= n; i += 500) {
    const double x = h * i;
    REQUIRE(sys.k[i] == Approx(std::sinh(x)).epsilon(1e-7).margin(1e-10));
    REQUIRE(sys.ell[i] / sys.w == Approx(std::exp(-x)).epsilon(1e-6).margin(1e-12));
  }
  REQUIRE(sys.ell.back() == Approx(std::exp(-x_max)).epsilon(1e-5));  // ~ 6e-6 by design

  // with drift: w = ell(0) and e^{fa} (k' ell - ell' k) constant; the horizon
  // must match the mass bound or the tail guard fires
  const double xd = default_halfline_horizon(lambda, 0.5);
  const double hd = xd / n;
  auto a = sample_edge_drift([](double x) { return 2.0 * std::exp(-4.0 * x); }, xd, n);
  HalfLineSystem sd = solve_halfline_system(a, hd, lambda, 0.5);
  REQUIRE(sd.w == Approx(sd.ell.front()).margin(1e-8));
  for (int i = 0; i <= n; i += 500) {
    const double c = std::exp(sd.exponent[i]) *
                     (sd.k_deriv[i] * sd.ell[i] - sd.ell_deriv[i] * sd.k[i]);
    REQUIRE(c == Approx(sd.w).epsilon(1e-6));
  }
}

TEST_CASE("closed-form limits") {
  ClosedFormLimits cf = closed_form_limits(0.5, 1.0);
  REQUIRE(cf.w() == Approx(std::cosh(1.0)).margin(1e-14));
  REQUIRE(cf.k_alpha(0.7, 0.0) == Approx(cf.k(0.7)));
  REQUIRE(cf.k_alpha(1.0, 0.5 * std::log(2.0)) == Approx(std::sinh(1.0) / 2.0).margin(1e-13));
  REQUIRE(ClosedFormLimits::limit_kernel(0.3, 0.25, -0.1, 0.2) ==
          Approx(std::exp(-0.6) * 0.25));
  REQUIRE(ClosedFormLimits::limit_kernel(0.3, 0.25, 0.1, 0.2) == 1.0);
}

TEST_CASE("eigenfunctions converge to the limit over the eps ladder") {
  const double lambda = 1.0, p = 0.8;
  SkewParams skew = SkewParams::from_p(p);
  // rate-4 exponential drift: its concentration zone stays inside |x| < 0.1
  // for every rung of the ladder, so the tested nodes see clean convergence
  DriftFn base = [](double x) {
    return x < 0.0 ? 2.0 * std::exp(4.0 * x) : 2.0 * std::exp(-4.0 * x);
  };
  const double alpha = 1.0, mass = 1.0;
  const double gamma_tilde = skew.gamma * std::exp(-2.0 * alpha);

  std::vector<double> sups, derivs_err;
  for (int m = 0; m < 5; ++m) {
    const double eps = 0.2 * std::pow(2.0, -m);
    const int n = static_cast<int>(std::ceil(20.0 / eps));
    auto drift = sample_drift(scale_drift(base, eps), 1.0, n);
    IntervalSolution keps = solve_k_interval(drift, lambda, skew.gamma, mass);
    IntervalSolution klim =
        solve_k_interval(IntervalFunction::zeros(1.0, n), lambda, gamma_tilde, 0.0);
    REQUIRE(sup_distance(keps.value, keps.value) == 0.0);
    sups.push_back(sup_distance(keps.value, klim.value));
    // derivative convergence away from the membrane (|x| >= 0.1)
    double derr = 0.0;
    for (double x : {-0.75, -0.25, -0.1, 0.1, 0.5, 0.9}) {
      const int j = static_cast<int>(std::lround((x < 0 ? x + 1.0 : x) * n));
      const double de = x < 0 ? keps.deriv.left[j] : keps.deriv.right[j];
      const double dl = x < 0 ? klim.deriv.left[j] : klim.deriv.right[j];
      derr = std::max(derr, std::abs(de - dl));
    }
    derivs_err.push_back(derr);
  }
  for (int m = 1; m < 5; ++m) {
    REQUIRE(sups[m] < sups[m - 1]);
    REQUIRE(derivs_err[m] < derivs_err[m - 1]);
  }
}

TEST_CASE("fixed-point certificate: one extra map application") {
  // independent re-application of the edge map to the converged iterate
  const double lambda = 0.5, mass = 1.0;
  const int n = 1000;
  const double h = 1.0 / n;
  auto a = sample_edge_drift([](double x) { return std::exp(-x); }, 1.0, n);
  EdgeSolution sol = solve_k_edge(a, h, lambda, mass);

  auto fa = cumulative_integral(a, h);
  std::vector<double> egrow(n + 1), edecay(n + 1), weighted(n + 1);
  for (int i = 0; i <= n; ++i) {
    egrow[i] = std::exp(2.0 * fa[i]);
    edecay[i] = std::exp(-2.0 * fa[i]);
  }
  for (int i = 0; i <= n; ++i) weighted[i] = egrow[i] * sol.value[i];
  auto inner = cumulative_integral(weighted, h);
  std::vector<double> slope(n + 1);
  for (int i = 0; i <= n; ++i) slope[i] = edecay[i] * (1.0 + 2.0 * lambda * inner[i]);
  auto mapped = cumulative_integral(slope, h);
  double update = 0.0;
  for (int i = 0; i <= n; ++i)
    update = std::max(update,
                      std::exp(-sol.omega * h * i) * std::abs(mapped[i] - sol.value[i]));
  REQUIRE(update <= 4.0 / 3.0 * std::max(sol.residual, 1e-15) + 1e-15);
}

TEST_CASE("iteration cap raises numeric_failure") {
  std::vector<double> zero(101, 0.0);
  REQUIRE_THROWS_AS(picard_edge(zero, 0.01, 1.0, 0.0, true, /*tol=*/0.0), numeric_failure);
}
