#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace greenwave {

// Stream derivation for reproducible sub-seeds: one master seed, stable
// per-purpose streams. splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream + 0x51'7c'c1'b7'27'22'0a'95ULL));
}

// mt19937_64 engine with hand-rolled samplers. The standard pins the engine
// sequence; distributions are implementation-defined, so they live here to
// keep trajectories identical across library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // 53-bit uniform in [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased-enough integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  // Knuth product method, chunked so large means stay exact.
  int poisson(double mean) {
    if (mean < 0) throw std::invalid_argument("Rng::poisson: negative mean");
    int total = 0;
    while (mean > 30.0) {
      total += poisson_small(30.0);
      mean -= 30.0;
    }
    return total + poisson_small(mean);
  }

  // exponential with unit rate
  double exponential() {
    double u;
    do { u = uniform01(); } while (u <= 0.0);
    return -std::log(u);
  }

 private:
  int poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 engine_;
};

}  // namespace greenwave
