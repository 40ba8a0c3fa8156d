#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "membrane/grid.hpp"

using namespace membrane;
using Catch::Approx;

TEST_CASE("make_grid produces equispaced points") {
  EdgeGrid g = make_grid(StarGraphSpec::finite(1, 1.0), 4);
  auto xs = g.points();
  REQUIRE(xs.size() == 5);
  for (int j = 0; j <= 4; ++j) REQUIRE(xs[j] == Approx(0.25 * j).margin(1e-15));

  EdgeGrid g3 = make_grid(StarGraphSpec::finite(3, 2.0), 2);
  REQUIRE(g3.step == Approx(1.0));
  REQUIRE(g3.point(2) == Approx(2.0));

  REQUIRE_THROWS_AS(make_grid(StarGraphSpec::finite(1, 1.0), 1), invalid_argument);
  REQUIRE_THROWS_AS(StarGraphSpec::finite(1, -1.0), invalid_argument);
}

TEST_CASE("cumulative integral on simple integrands") {
  const int n = 10;
  const double h = 1.0 / n;
  std::vector<double> ones(n + 1, 1.0);
  auto F = cumulative_integral(ones, h);
  for (int j = 0; j <= n; ++j) REQUIRE(F[j] == Approx(h * j).margin(1e-14));

  std::vector<double> lin(n + 1);
  for (int j = 0; j <= n; ++j) lin[j] = h * j;
  REQUIRE(cumulative_integral(lin, h).back() == Approx(0.5).margin(1e-12));

  const int m = 100;
  std::vector<double> ex(m + 1);
  for (int j = 0; j <= m; ++j) ex[j] = std::exp(j / 100.0);
  REQUIRE(cumulative_integral(ex, 0.01).back() == Approx(std::exp(1.0) - 1.0).margin(1e-8));
}

TEST_CASE("cumulative integral is exact for cubics at every node") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (int n : {4, 5, 11, 16, 33}) {
    const double h = 1.0 / n;
    const double a = coef(gen), b = coef(gen), c = coef(gen), d = coef(gen);
    std::vector<double> f(n + 1);
    for (int j = 0; j <= n; ++j) {
      const double x = h * j;
      f[j] = a + b * x + c * x * x + d * x * x * x;
    }
    auto F = cumulative_integral(f, h);
    for (int j = 0; j <= n; ++j) {
      const double x = h * j;
      const double exact = a * x + b * x * x / 2 + c * x * x * x / 3 + d * x * x * x * x / 4;
      REQUIRE(F[j] == Approx(exact).margin(1e-12));
    }
  }
}

TEST_CASE("backward cumulative matches total minus prefix") {
  // the two passes use different panel decompositions, so they agree only to
  // quadrature accuracy on transcendental integrands but exactly on cubics
  const int n = 40;
  const double h = 0.05;
  std::vector<double> f(n + 1), cub(n + 1);
  for (int j = 0; j <= n; ++j) {
    f[j] = std::sin(1.0 + 3.0 * h * j);
    const double x = h * j;
    cub[j] = 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
  }
  auto F = cumulative_integral(f, h);
  auto G = cumulative_integral_backward(f, h);
  for (int j = 0; j <= n; ++j) REQUIRE(F[j] + G[j] == Approx(F.back()).margin(5e-5));
  auto Fc = cumulative_integral(cub, h);
  auto Gc = cumulative_integral_backward(cub, h);
  for (int j = 0; j <= n; ++j) REQUIRE(Fc[j] + Gc[j] == Approx(Fc.back()).margin(1e-13));
}

TEST_CASE("bielecki norm on the interval") {
  auto one = IntervalFunction::sample(1.0, 100, [](double) { return 1.0; });
  REQUIRE(bielecki_norm(one, 1.0) == Approx(1.0));  // attained at x=-r

  auto ex = IntervalFunction::sample(1.0, 100, [](double x) { return std::exp(x); });
  REQUIRE(bielecki_norm(ex, 1.0) == Approx(std::exp(-1.0)).margin(1e-12));

  auto zero = IntervalFunction::zeros(1.0, 10);
  REQUIRE(bielecki_norm(zero, 1.0) == 0.0);
}

TEST_CASE("bielecki norm is equivalent to the sup norm") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double r = 1.5, omega = 2.0;
  for (int trial = 0; trial < 25; ++trial) {
    auto f = IntervalFunction::sample(r, 64, [&](double) { return u(gen); });
    const double bn = bielecki_norm(f, omega);
    const double sn = sup_norm(f);
    REQUIRE(bn <= sn + 1e-14);
    REQUIRE(sn <= std::exp(omega * 2.0 * r) * bn + 1e-14);
  }
}

TEST_CASE("sup distance between edge functions") {
  EdgeGrid g = make_grid(StarGraphSpec::finite(2, 1.0), 200);
  auto f = EdgeFunctionVec::zeros(g);
  auto q = EdgeFunctionVec::zeros(g);
  REQUIRE(sup_distance(f, q) == 0.0);

  for (auto& v : f.values) std::fill(v.begin(), v.end(), 1.0);
  REQUIRE(sup_distance(f, q) == Approx(1.0));

  for (int e = 0; e < 2; ++e)
    for (int j = 0; j <= g.n; ++j) {
      const double x = g.point(j);
      f.values[e][j] = x;
      q.values[e][j] = x * x;
    }
  REQUIRE(sup_distance(f, q) == Approx(0.25).margin(g.step * g.step));

  EdgeGrid other = make_grid(StarGraphSpec::finite(2, 1.0), 100);
  auto p = EdgeFunctionVec::zeros(other);
  REQUIRE_THROWS_AS(sup_distance(f, p), invalid_argument);
}

TEST_CASE("one-sided derivatives") {
  const int n = 100;
  const double h = 1.0 / n;
  std::vector<double> lin(n + 1), quad(n + 1);
  for (int j = 0; j <= n; ++j) {
    lin[j] = h * j;
    quad[j] = (h * j) * (h * j);
  }
  REQUIRE(one_sided_derivative(lin, 0, h, Side::plus) == Approx(1.0).margin(1e-10));
  REQUIRE(one_sided_derivative(quad, 50, h, Side::plus) == Approx(1.0).margin(h * h));
  REQUIRE(one_sided_derivative(quad, 50, h, Side::minus) == Approx(1.0).margin(h * h));

  auto absf = IntervalFunction::sample(1.0, 50, [](double x) { return std::abs(x); });
  REQUIRE(derivative_at_zero(absf, Side::plus) == Approx(1.0).margin(1e-12));
  REQUIRE(derivative_at_zero(absf, Side::minus) == Approx(-1.0).margin(1e-12));

  std::vector<double> tiny{0.0, 1.0};
  REQUIRE_THROWS_AS(one_sided_derivative(tiny, 0, 1.0, Side::plus), invalid_argument);
}

TEST_CASE("one-sided derivative converges at second order") {
  auto err_at = [](int n) {
    const double h = 1.0 / n;
    std::vector<double> f(n + 1);
    for (int j = 0; j <= n; ++j) f[j] = std::sin(1.0 + h * j);
    double worst = 0.0;
    for (int j : {0, n / 4, n / 2}) {
      const double d = one_sided_derivative(f, j, h, Side::plus);
      worst = std::max(worst, std::abs(d - std::cos(1.0 + h * j)));
    }
    return worst;
  };
  const double e1 = err_at(64), e2 = err_at(128);
  REQUIRE(e1 / e2 > 4.0 / 1.5);
  REQUIRE(e1 / e2 < 4.0 * 1.5);
}

TEST_CASE("edge function center consistency") {
  EdgeGrid g = make_grid(StarGraphSpec::finite(3, 1.0), 10);
  auto f = EdgeFunctionVec::zeros(g);
  REQUIRE(f.center_consistent());
  f.values[2][0] = 0.5;
  REQUIRE_FALSE(f.center_consistent());
}
