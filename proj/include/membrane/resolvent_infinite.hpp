#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "membrane/drift.hpp"
#include "membrane/errors.hpp"
#include "membrane/grid.hpp"
#include "membrane/sturm_liouville.hpp"

namespace membrane {

// Resolvents on the infinite star graph. Functions live in C[0,inf]: sampled
// values on [0, X_max] plus the limit scalar; every integral to infinity is
// closed with the limit value against the e^{-sqrt(2 lambda) x} envelope.

struct HalfLineResolventData {
  double lambda = 0.0;
  EdgeGrid grid;                       // infinite spec, horizon X_max
  std::vector<HalfLineSystem> edges;   // per-edge j/k/ell systems
  std::vector<double> alpha;           // per-edge masses (limit operator data)
  std::vector<double> weights;         // p_i
};

namespace detail {

struct HalfLineApplication {
  std::vector<double> value;
  std::vector<double> deriv;
  double limit = 0.0;
  double c = 0.0;
};

/// (R0 g)(x) = (2 ell(x)/w) int_0^x k e^{fa} g + (2 k(x)/w) int_x^inf ell e^{fa} g.
/// The integral beyond the horizon closes against ell's e^{-s y} envelope with
/// the boundary sample g(X): the weight concentrates the tail within ~1/s of
/// the horizon, where the boundary sample beats the limit scalar whenever g
/// settles slowly. The limit scalar fixes the output's value at infinity.
inline HalfLineApplication halfline_minimal_apply(const HalfLineSystem& sys,
                                                  std::span<const double> g, double g_limit) {
  const std::size_t nn = sys.j.size();
  require(g.size() == nn, "halfline_minimal_apply: size mismatch");
  const double s = std::sqrt(2.0 * sys.lambda);
  std::vector<double> up(nn), down(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double weight = std::exp(sys.exponent[i]);
    up[i] = sys.k[i] * weight * g[i];
    down[i] = sys.ell[i] * weight * g[i];
  }
  auto P = cumulative_integral(up, sys.h);
  auto U = cumulative_integral_backward(down, sys.h);
  const double tail = sys.ell.back() * std::exp(sys.exponent.back()) * g.back() / s;
  HalfLineApplication out;
  out.value.resize(nn);
  out.deriv.resize(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    const double hold = U[i] + tail;
    out.value[i] = (2.0 * sys.ell[i] / sys.w) * P[i] + (2.0 * sys.k[i] / sys.w) * hold;
    out.deriv[i] =
        (2.0 * sys.ell_deriv[i] / sys.w) * P[i] + (2.0 * sys.k_deriv[i] / sys.w) * hold;
  }
  out.limit = g_limit / sys.lambda;
  out.c = (2.0 / sys.w) * (U[0] + tail);
  return out;
}

}  // namespace detail

class InfiniteGraphResolvent {
 public:
  static InfiniteGraphResolvent minimal(HalfLineResolventData data) {
    return InfiniteGraphResolvent(ResolventKindInf::minimal, std::move(data));
  }
  static InfiniteGraphResolvent full(HalfLineResolventData data) {
    return InfiniteGraphResolvent(ResolventKindInf::full, std::move(data));
  }

  /// Limit operator: drift-free half-line forms j=cosh, k=sinh/s, ell=e^{-sx},
  /// w=1 on every edge, vertex weights p_i e^{2 alpha_i}.
  static InfiniteGraphResolvent limit(const EdgeGrid& grid, double lambda,
                                      const std::vector<double>& alpha,
                                      const std::vector<double>& weights) {
    require(grid.spec.infinite, "limit: need an infinite graph grid");
    require(alpha.size() == weights.size(), "limit: alpha/weights size mismatch");
    const double s = std::sqrt(2.0 * lambda);
    HalfLineSystem base;
    base.lambda = lambda;
    base.h = grid.step;
    const std::size_t nn = static_cast<std::size_t>(grid.nodes());
    base.j.resize(nn);
    base.j_deriv.resize(nn);
    base.k.resize(nn);
    base.k_deriv.resize(nn);
    base.ell.resize(nn);
    base.ell_deriv.resize(nn);
    base.exponent.assign(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
      const double x = grid.step * static_cast<double>(i);
      base.j[i] = std::cosh(s * x);
      base.j_deriv[i] = s * std::sinh(s * x);
      base.k[i] = std::sinh(s * x) / s;
      base.k_deriv[i] = std::cosh(s * x);
      base.ell[i] = std::exp(-s * x);
      base.ell_deriv[i] = -s * std::exp(-s * x);
    }
    base.w = 1.0;
    HalfLineResolventData data;
    data.lambda = lambda;
    data.grid = grid;
    data.edges.assign(weights.size(), base);
    data.alpha = alpha;
    data.weights = weights;
    InfiniteGraphResolvent op(ResolventKindInf::limit, std::move(data));
    for (std::size_t i = 0; i < op.tilted_.size(); ++i)
      op.tilted_[i] = weights[i] * std::exp(2.0 * alpha[i]);
    return op;
  }

  enum class ResolventKindInf { minimal, full, limit };

  ResolventKindInf kind() const { return kind_; }
  double lambda() const { return data_.lambda; }
  const EdgeGrid& grid() const { return data_.grid; }
  const HalfLineResolventData& data() const { return data_; }
  double c_one(std::size_t edge) const { return c_one_.at(edge); }
  const EdgeFunctionVec& exit_law() const { return exit_law_; }

  double c_functional(std::size_t edge, const EdgeFunctionVec& g) const {
    return detail::halfline_minimal_apply(data_.edges.at(edge), g.values.at(edge),
                                          g.limits.at(edge))
        .c;
  }

  EdgeFunctionVec apply(const EdgeFunctionVec& g) const {
    auto [f, fd] = apply_with_deriv(g);
    (void)fd;
    return f;
  }

  std::pair<EdgeFunctionVec, EdgeFunctionVec> apply_with_deriv(const EdgeFunctionVec& g) const {
    require(g.grid.same_as(data_.grid), "InfiniteGraphResolvent: grid mismatch");
    require(g.values.size() == data_.edges.size(), "InfiniteGraphResolvent: edge count mismatch");
    require(g.limits.size() == data_.edges.size(), "InfiniteGraphResolvent: missing limits");
    require(g.center_consistent(1e-9), "InfiniteGraphResolvent: g is not in the graph space");
    EdgeFunctionVec f = EdgeFunctionVec::zeros(data_.grid);
    EdgeFunctionVec fd = EdgeFunctionVec::zeros(data_.grid);
    std::vector<double> cs(data_.edges.size());
    for (std::size_t e = 0; e < data_.edges.size(); ++e) {
      auto app = detail::halfline_minimal_apply(data_.edges[e], g.values[e], g.limits[e]);
      f.values[e] = std::move(app.value);
      fd.values[e] = std::move(app.deriv);
      f.limits[e] = app.limit;
      cs[e] = app.c;
    }
    if (kind_ != ResolventKindInf::minimal) {
      const auto& w = kind_ == ResolventKindInf::limit ? tilted_ : data_.weights;
      double num = 0.0, den = 0.0;
      for (std::size_t e = 0; e < cs.size(); ++e) {
        num += w[e] * cs[e];
        den += w[e] * c_one_[e];
      }
      const double vertex = num / (data_.lambda * den);
      for (std::size_t e = 0; e < cs.size(); ++e) {
        for (std::size_t i = 0; i < f.values[e].size(); ++i) {
          f.values[e][i] += vertex * exit_law_.values[e][i];
          fd.values[e][i] += vertex * exit_deriv_.values[e][i];
        }
        // exit law vanishes at infinity, so the limit is untouched
      }
    }
    return {std::move(f), std::move(fd)};
  }

 private:
  InfiniteGraphResolvent(ResolventKindInf kind, HalfLineResolventData data)
      : kind_(kind), data_(std::move(data)) {
    require(!data_.edges.empty(), "InfiniteGraphResolvent: no edges");
    require(data_.grid.spec.infinite, "InfiniteGraphResolvent: grid must be infinite");
    require(static_cast<int>(data_.edges.size()) == data_.grid.spec.edge_count,
            "InfiniteGraphResolvent: edge count mismatch");
    if (kind_ == ResolventKindInf::full) {
      double sum = 0.0;
      for (double v : data_.weights) {
        require(v > 0.0, "InfiniteGraphResolvent: weights must be positive");
        sum += v;
      }
      require(std::abs(sum - 1.0) <= 1e-10, "InfiniteGraphResolvent: weights must sum to 1");
    }
    tilted_ = data_.weights;
    exit_law_ = EdgeFunctionVec::zeros(data_.grid);
    exit_deriv_ = EdgeFunctionVec::zeros(data_.grid);
    c_one_.resize(data_.edges.size());
    std::vector<double> ones(static_cast<std::size_t>(data_.grid.nodes()), 1.0);
    for (std::size_t e = 0; e < data_.edges.size(); ++e) {
      auto app = detail::halfline_minimal_apply(data_.edges[e], ones, 1.0);
      c_one_[e] = app.c;
      require(c_one_[e] > 0.0, "InfiniteGraphResolvent: C_i(1) must be positive");
      for (std::size_t i = 0; i < ones.size(); ++i) {
        exit_law_.values[e][i] = 1.0 - data_.lambda * app.value[i];
        exit_deriv_.values[e][i] = -data_.lambda * app.deriv[i];
      }
      exit_law_.limits[e] = 0.0;
    }
  }

  ResolventKindInf kind_;
  HalfLineResolventData data_;
  std::vector<double> tilted_;  // p_i e^{2 alpha_i} for the limit operator
  EdgeFunctionVec exit_law_;
  EdgeFunctionVec exit_deriv_;
  std::vector<double> c_one_;
};

/// Solve all edges of an infinite graph at one (lambda, eps) and assemble
/// the full operator.
inline InfiniteGraphResolvent solve_full_resolvent_inf(const EdgeGrid& grid,
                                                       const DriftFamily& fam, double lambda,
                                                       std::vector<double> weights) {
  require(grid.spec.infinite, "solve_full_resolvent_inf: need an infinite grid");
  require(static_cast<std::size_t>(grid.spec.edge_count) == fam.edges(),
          "solve_full_resolvent_inf: drift family size mismatch");
  HalfLineResolventData data;
  data.lambda = lambda;
  data.grid = grid;
  data.alpha = fam.alpha;
  data.weights = std::move(weights);
  data.edges.reserve(fam.edges());
  for (std::size_t e = 0; e < fam.edges(); ++e) {
    auto scaled = fam.scaled(e);
    std::vector<double> samples(static_cast<std::size_t>(grid.nodes()));
    for (int j = 0; j < grid.nodes(); ++j)
      samples[static_cast<std::size_t>(j)] = scaled(grid.point(j));
    data.edges.push_back(solve_halfline_system(samples, grid.step, lambda, fam.mass_bound));
  }
  return InfiniteGraphResolvent::full(std::move(data));
}

}  // namespace membrane
