#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace membrane {

// Counter-style RNG: every path owns a SplitMix64 stream with its own odd
// increment derived from (seed, path index), so results do not depend on how
// paths are distributed over threads.

namespace rngdetail {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct ZigguratTable {
  static constexpr int layers = 128;
  std::array<double, layers + 1> x{};
  std::array<double, layers + 1> y{};

  ZigguratTable() {
    const double R = 3.442619855899;
    const double V = 9.91256303526217e-3;
    double f = std::exp(-0.5 * R * R);
    x[0] = V / f;
    x[1] = R;
    x[layers] = 0.0;
    for (int i = 2; i < layers; ++i) {
      x[i] = std::sqrt(-2.0 * std::log(V / x[i - 1] + f));
      f = std::exp(-0.5 * x[i] * x[i]);
    }
    for (int i = 0; i <= layers; ++i) y[i] = std::exp(-0.5 * x[i] * x[i]);
  }
};

inline const ZigguratTable& ziggurat() {
  static const ZigguratTable table;
  return table;
}

}  // namespace rngdetail

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    state_ = rngdetail::mix64(seed ^ rngdetail::mix64(stream));
    gamma_ = rngdetail::mix64(stream ^ rngdetail::mix64(~seed)) | 1ull;
  }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return rngdetail::mix64(state_);
  }

  /// Uniform in [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0,1] (safe for logs).
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via the 128-layer ziggurat.
  double next_normal() {
    const auto& t = rngdetail::ziggurat();
    for (;;) {
      const std::uint64_t bits = next_u64();
      const int layer = static_cast<int>(bits & 127u);
      const bool negative = (bits >> 7) & 1u;
      // 53-bit uniform from the remaining bits
      const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
      const double x = u * t.x[static_cast<std::size_t>(layer)];
      if (x < t.x[static_cast<std::size_t>(layer) + 1]) return negative ? -x : x;
      if (layer == 0) {
        // tail beyond R
        const double R = t.x[1];
        for (;;) {
          const double e1 = -std::log(next_double_open()) / R;
          const double e2 = -std::log(next_double_open());
          if (2.0 * e2 >= e1 * e1) return negative ? -(R + e1) : (R + e1);
        }
      }
      const double y0 = t.y[static_cast<std::size_t>(layer)];
      const double y1 = t.y[static_cast<std::size_t>(layer) + 1];
      if (y1 + next_double() * (y0 - y1) < std::exp(-0.5 * x * x)) return negative ? -x : x;
    }
  }

  /// Categorical draw from cumulative weights (last entry ~ 1).
  template <class Cum>
  int next_category(const Cum& cumulative) {
    const double u = next_double();
    int i = 0;
    const int last = static_cast<int>(cumulative.size()) - 1;
    while (i < last && u >= cumulative[static_cast<std::size_t>(i)]) ++i;
    return i;
  }

 private:
  std::uint64_t state_;
  std::uint64_t gamma_;
};

inline Rng path_rng(std::uint64_t seed, std::uint64_t path_index) {
  return Rng(seed, path_index);
}

}  // namespace membrane
