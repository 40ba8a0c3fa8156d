#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "membrane/errors.hpp"
#include "membrane/grid.hpp"

namespace membrane {

using DriftFn = std::function<double(double)>;

/// x -> a(x/eps)/eps. Mass and sign pattern are eps-invariant.
inline DriftFn scale_drift(DriftFn base, double eps) {
  require(eps > 0.0, "scale_drift: eps must be positive");
  return [base = std::move(base), eps](double x) { return base(x / eps) / eps; };
}

/// Simpson integral of a drift over [0, horizon] (edge case) or
/// [-horizon, horizon] (interval case, two half-panels so a jump at 0 is fine).
inline double alpha_of(const DriftFn& a, double horizon, bool interval = false, int n = 20000) {
  require(horizon > 0.0, "alpha_of: horizon must be positive");
  const double h = horizon / n;
  std::vector<double> right(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) right[static_cast<std::size_t>(j)] = a(h * j);
  double total = integral(right, h);
  if (interval) {
    std::vector<double> left(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j < n; ++j) left[static_cast<std::size_t>(j)] = a(-horizon + h * j);
    left[static_cast<std::size_t>(n)] = a(-horizon * 1e-15);  // left limit a(0-)
    total += integral(left, h);
  }
  return total;
}

/// int_y^z a; the harness probes the concentration hypothesis with this.
inline double window_integral(const DriftFn& a, double y, double z, int n = 4000) {
  require(y < z, "window_integral: need y < z");
  if (n % 2) ++n;
  const double h = (z - y) / n;
  std::vector<double> f(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) f[static_cast<std::size_t>(j)] = a(y + h * j);
  return integral(f, h);
}

/// Drift family on the k edges at a fixed eps, with its limit data.
struct DriftFamily {
  std::vector<DriftFn> base;   // unscaled a_i on [0, inf)
  double eps = 1.0;
  std::vector<double> alpha;   // alpha_i = int_0^inf a_i
  double mass_bound = 0.0;     // M = max_i sup_eps int |a_{eps,i}|

  std::size_t edges() const { return base.size(); }
  DriftFn scaled(std::size_t i) const { return scale_drift(base.at(i), eps); }
};

inline DriftFamily make_drift_family(std::vector<DriftFn> base, double eps, double horizon = 40.0) {
  require(eps > 0.0, "make_drift_family: eps must be positive");
  DriftFamily fam;
  fam.base = std::move(base);
  fam.eps = eps;
  double m = 0.0;
  for (const auto& a : fam.base) {
    fam.alpha.push_back(alpha_of(a, horizon));
    auto abs_a = [&a](double x) { return std::abs(a(x)); };
    m = std::max(m, alpha_of(abs_a, horizon));
  }
  fam.mass_bound = m;
  return fam;
}

/// Sample a scaled drift on an edge grid and return the cumulative exponent
/// samples: frak_a(x_j) = 2 int_0^{x_j} a_{eps,i}. |frak_a| <= 2M always.
/// The grid must resolve the concentration scale: h <= eps/20.
inline std::vector<double> cumulative_exponent(const DriftFn& a_scaled, double eps,
                                               const EdgeGrid& grid) {
  if (grid.step > eps / 20.0 + 1e-15)
    throw resolution_error("cumulative_exponent: grid step " + std::to_string(grid.step) +
                           " too coarse for eps " + std::to_string(eps) + " (need h <= eps/20)");
  std::vector<double> samples(static_cast<std::size_t>(grid.nodes()));
  for (int j = 0; j < grid.nodes(); ++j)
    samples[static_cast<std::size_t>(j)] = a_scaled(grid.point(j));
  auto F = cumulative_integral(samples, grid.step);
  for (auto& v : F) v *= 2.0;
  return F;
}

// Built-in drift shapes for configs and tests.

/// rate*e^{-rate x} scaled to mass `mass` on [0, inf).
inline DriftFn exp_decay_drift(double rate, double mass = 1.0) {
  require(rate > 0.0, "exp_decay_drift: rate must be positive");
  return [rate, mass](double x) { return x < 0.0 ? 0.0 : mass * rate * std::exp(-rate * x); };
}

/// The two-sided interval drift e^{x/2}[x<0] + e^{-5x}[x>=0]; total mass 2.2.
inline DriftFn figure1_drift() {
  return [](double x) { return x < 0.0 ? std::exp(0.5 * x) : std::exp(-5.0 * x); };
}

inline DriftFn zero_drift() {
  return [](double) { return 0.0; };
}

/// Piecewise-linear drift through the sample table (x ascending); zero outside.
inline DriftFn table_drift(std::vector<double> xs, std::vector<double> as) {
  require(xs.size() == as.size() && xs.size() >= 2, "table_drift: need matching tables, size >= 2");
  for (std::size_t i = 1; i < xs.size(); ++i)
    require(xs[i] > xs[i - 1], "table_drift: abscissae must be strictly increasing");
  return [xs = std::move(xs), as = std::move(as)](double x) {
    if (x <= xs.front() || x >= xs.back()) {
      if (x == xs.front()) return as.front();
      if (x == xs.back()) return as.back();
      return 0.0;
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return as[i - 1] + t * (as[i] - as[i - 1]);
  };
}

}  // namespace membrane
