#pragma once

// Random sampling built on std::mt19937_64 with hand-rolled transforms
// (Box-Muller normal, Marsaglia-Tsang gamma, gamma-ratio Dirichlet), so
// streams are reproducible across standard-library implementations.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace lobsim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  // (0, 1); safe under log()
  double uniform_pos() { return ((engine_() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive integer range, rejection sampled to avoid modulo bias.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(engine_());
    std::uint64_t limit = (~std::uint64_t{0} / range) * range;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Number of failures before the first success, success probability p.
  std::int64_t geometric(double p) {
    return static_cast<std::int64_t>(std::log(uniform_pos()) / std::log1p(-p));
  }

  // Marsaglia-Tsang; alpha < 1 handled via the boost Gamma(a+1) * U^(1/a).
  double gamma(double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("gamma alpha must be > 0");
    if (alpha < 1.0)
      return gamma(alpha + 1.0) * std::pow(uniform_pos(), 1.0 / alpha);
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Normalized independent Gamma(alpha_i, 1) variates.
  template <std::size_t N>
  std::array<double, N> dirichlet(const std::array<double, N>& alpha) {
    std::array<double, N> out{};
    double total = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = gamma(alpha[i]);
      total += out[i];
    }
    for (auto& v : out) v /= total;
    return out;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lobsim
