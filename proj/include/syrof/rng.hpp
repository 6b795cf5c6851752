#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace syrof {

/// Deterministic random source. mt19937_64 output is pinned by the standard and
/// the derived distributions below are implemented by hand, so a (seed, call
/// sequence) pair produces the same stream on every platform. Never use
/// std::uniform_real_distribution / std::normal_distribution here: their
/// algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, n). n must be > 0.
  uint32_t uniform_u32(uint32_t n) {
    return static_cast<uint32_t>((static_cast<__uint128_t>(gen_()) * n) >> 64);
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller (no cached spare, so replay is call-exact).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Derive an independent child stream (e.g. one per robot or per link).
  Rng fork(uint64_t salt) {
    return Rng(gen_() ^ (salt * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace syrof
