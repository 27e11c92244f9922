#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace refcheck {

// ---------------------------------------------------------------------------
// Deterministic hashing / pseudo-random streams.
// std::uniform_real_distribution is implementation-defined, so traces would
// not be reproducible across standard libraries; these are fully pinned.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

/// Seeded deterministic stream (splitmix64 sequence).
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  /// Uniform in [0, 1) with 53 bits.
  double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t next_in(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// Solver step arithmetic shared by the simulation engine and the equation
// evaluator. Both sides must perform bit-identical floating point work, so
// every arithmetic decision lives here.
// ---------------------------------------------------------------------------

/// Time grid point t0 + k*h (never accumulated addition; avoids drift).
inline double time_at(double t0, double h, std::int64_t k) {
  return t0 + static_cast<double>(k) * h;
}

/// Neumaier-compensated accumulator for integrator state. Keeps the
/// discretization error visible above the rounding floor on fine grids.
struct StateCell {
  double base = 0.0;
  double carry = 0.0;

  static StateCell of(double v) { return {v, 0.0}; }

  double read() const { return base + carry; }

  void accumulate(double v) {
    double t = base + v;
    if (std::fabs(base) >= std::fabs(v)) {
      carry += (base - t) + v;
    } else {
      carry += (v - t) + base;
    }
    base = t;
  }

  /// Hard assignment (unit delay semantics).
  void assign(double v) {
    base = v;
    carry = 0.0;
  }
};

inline double euler_increment(double deriv, double h) { return h * deriv; }

inline double rk4_increment(double k1, double k2, double k3, double k4, double h) {
  return h * ((k1 + 2.0 * (k2 + k3) + k4) / 6.0);
}

}  // namespace refcheck
