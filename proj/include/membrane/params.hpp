#pragma once

#include <cmath>
#include <vector>

#include "membrane/errors.hpp"

namespace membrane {

/// The four equivalent parameterizations of a skew membrane:
/// p in (0,1), gamma = (1-p)/p, c = 2p-1, beta = -ln(gamma)/2.
struct SkewParams {
  double p = 0.5;
  double gamma = 1.0;
  double c = 0.0;
  double beta = 0.0;

  static SkewParams from_p(double p) {
    // the open interval (0,1); beta degenerates at the ends, so clamp loudly
    if (p < 1e-12 || p > 1.0 - 1e-12) {
      require(p > 0.0 && p < 1.0, "SkewParams: p must lie in (0,1)");
      p = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
    }
    SkewParams s;
    s.p = p;
    s.gamma = (1.0 - p) / p;
    s.c = 2.0 * p - 1.0;
    s.beta = -0.5 * std::log(s.gamma);
    return s;
  }
  static SkewParams from_gamma(double gamma) {
    require(gamma > 0.0, "SkewParams: gamma must be positive");
    return from_p(1.0 / (1.0 + gamma));
  }
  static SkewParams from_c(double c) {
    require(c > -1.0 && c < 1.0, "SkewParams: c must lie in (-1,1)");
    return from_p(0.5 * (c + 1.0));
  }
  static SkewParams from_beta(double beta) { return from_gamma(std::exp(-2.0 * beta)); }
};

/// Limit of the skew parameter under drift of total mass alpha:
/// p~ = p/(p + (1-p)e^{-2 alpha}); equivalently gamma~ = e^{-2 alpha} gamma
/// and c~ = tanh(alpha + beta).
inline SkewParams transform_skew(double p, double alpha) {
  SkewParams in = SkewParams::from_p(p);
  return SkewParams::from_gamma(std::exp(-2.0 * alpha) * in.gamma);
}

struct WalshParams {
  std::vector<double> p;       // positive, sums to 1
  std::vector<double> alpha;   // per-edge drift masses
  std::vector<double> p_tilde; // limit weights, positive, sums to 1
};

/// p~_i = p_i e^{2 alpha_i} / sum_j p_j e^{2 alpha_j}.
inline std::vector<double> transform_walsh(const std::vector<double>& p,
                                           const std::vector<double>& alpha) {
  require(!p.empty() && p.size() == alpha.size(), "transform_walsh: size mismatch");
  double sum_p = 0.0, denom = 0.0;
  for (double pi : p) {
    require(pi > 0.0, "transform_walsh: weights must be positive");
    sum_p += pi;
  }
  require(std::abs(sum_p - 1.0) <= 1e-10, "transform_walsh: weights must sum to 1");
  std::vector<double> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out[i] = p[i] * std::exp(2.0 * alpha[i]);
    denom += out[i];
  }
  for (auto& v : out) v /= denom;
  return out;
}

inline WalshParams make_walsh_params(std::vector<double> p, std::vector<double> alpha) {
  WalshParams w;
  w.p_tilde = transform_walsh(p, alpha);
  w.p = std::move(p);
  w.alpha = std::move(alpha);
  return w;
}

/// p -> gamma -> c -> beta -> p; the representations must agree to 1e-12.
inline SkewParams roundtrip_reps(const SkewParams& s) {
  return SkewParams::from_beta(SkewParams::from_c(SkewParams::from_gamma(s.gamma).c).beta);
}

}  // namespace membrane
