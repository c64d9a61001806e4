#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace relkit {

// splitmix64 step; used to derive decorrelated stream seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded pseudo-random stream. std::mt19937_64 output is fixed by the
// standard, and the [0,1) mapping below avoids std::uniform_real_distribution,
// whose results are implementation-defined — so streams are reproducible
// across platforms, not just across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (own implementation for portability)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

// Additive-recurrence (Kronecker) low-discrepancy sequence in [0,1)^dim.
// Step vector: powers of the generalized golden ratio phi_d, the positive
// root of x^(d+1) = x + 1; the seed only shifts the starting phase, so two
// sequences with the same seed are identical point for point.
class QuasiRandom {
 public:
  QuasiRandom(int dim, std::uint64_t seed) : dim_(dim), alpha_(dim), state_(dim) {
    double phi = 2.0;
    for (int it = 0; it < 64; ++it) phi = std::pow(1.0 + phi, 1.0 / (dim + 1));
    std::uint64_t s = seed;
    for (int i = 0; i < dim; ++i) {
      alpha_[i] = frac(std::pow(1.0 / phi, i + 1));
      state_[i] = frac(0.5 + static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53);
    }
  }

  int dim() const { return dim_; }

  // next point; writes dim values into out
  void next(double* out) {
    for (int i = 0; i < dim_; ++i) {
      state_[i] = frac(state_[i] + alpha_[i]);
      out[i] = state_[i];
    }
  }

 private:
  static double frac(double x) { return x - std::floor(x); }
  int dim_;
  std::vector<double> alpha_;
  std::vector<double> state_;
};

}  // namespace relkit
