#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ambulo {

/// Deterministic random stream. mt19937_64 is fully specified by the
/// standard, and the distributions below are hand-rolled so identical seeds
/// give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller (second value cached).
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  double gauss(double mean, double sigma) { return mean + sigma * gauss(); }

  double exponential(double mean) {
    double u = uniform01();
    while (u <= 0.0) u = uniform01();
    return -mean * std::log(u);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// FNV-1a 64-bit, used to derive independent named substreams from one seed.
inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// splitmix64 finalizer; decorrelates derived seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return mix_seed(seed ^ hash_label(label));
}

/// Stationary AR(1) Gaussian process: marginal sigma is preserved while
/// consecutive values correlate with coefficient rho.
class Ar1 {
 public:
  Ar1(double sigma, double rho) : sigma_(sigma), rho_(rho) {}

  double step(Rng& rng) {
    if (!started_) {
      started_ = true;
      value_ = rng.gauss(0.0, sigma_);
    } else {
      value_ = rho_ * value_ + std::sqrt(1.0 - rho_ * rho_) * rng.gauss(0.0, sigma_);
    }
    return value_;
  }

 private:
  double sigma_;
  double rho_;
  double value_ = 0.0;
  bool started_ = false;
};

}  // namespace ambulo
