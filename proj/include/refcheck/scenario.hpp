#pragma once

#include "refcheck/numerics.hpp"
#include "refcheck/rational.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>

namespace refcheck {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Input generators — how inports are driven during simulation.
// ---------------------------------------------------------------------------

struct ConstantInput {
  Rational value;
};
/// `before` until t reaches t_step, `after` from t_step on (inclusive).
struct StepInput {
  Rational t_step;
  Rational before;
  Rational after;
};
struct SineInput {
  Rational amplitude;
  Rational angular_frequency;
  Rational phase;
};
/// Uniform noise in [-amplitude, amplitude), held constant within each major
/// step. The stream is a pure function of (seed, port name, step index).
struct SeededNoise {
  std::uint64_t seed = 0;
  Rational amplitude = 1;
};

using InputGen = std::variant<ConstantInput, StepInput, SineInput, SeededNoise>;

struct Scenario {
  std::map<std::string, InputGen> inputs;  // inport id -> generator
};

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

inline double eval_input(const InputGen& gen, std::string_view port, double t, std::int64_t step) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, ConstantInput>) {
          return to_double(g.value);
        } else if constexpr (std::is_same_v<T, StepInput>) {
          return t >= to_double(g.t_step) ? to_double(g.after) : to_double(g.before);
        } else if constexpr (std::is_same_v<T, SineInput>) {
          return to_double(g.amplitude) *
                 std::sin(to_double(g.angular_frequency) * t + to_double(g.phase));
        } else {
          std::uint64_t r = splitmix64(splitmix64(g.seed ^ fnv1a(port)) +
                                       static_cast<std::uint64_t>(step));
          double unit = static_cast<double>(r >> 11) * 0x1.0p-53;  // [0, 1)
          return to_double(g.amplitude) * (2.0 * unit - 1.0);
        }
      },
      gen);
}

/// Zero-config scenario: seeded noise on every inport. The fixed seed keeps
/// unconfigured runs reproducible; the port name separates the streams.
inline Scenario default_scenario(const std::set<std::string>& inports) {
  Scenario s;
  for (const auto& name : inports) s.inputs.emplace(name, SeededNoise{kDefaultSeed, 1});
  return s;
}

// ---------------------------------------------------------------------------
// Fixed-step solver configuration
// ---------------------------------------------------------------------------

enum class Method { ForwardEuler, RK4 };

inline int method_order(Method m) { return m == Method::ForwardEuler ? 1 : 4; }

inline const char* method_name(Method m) { return m == Method::ForwardEuler ? "euler" : "rk4"; }

struct SolverConfig {
  Method method = Method::RK4;
  double h = 1e-3;
  double t0 = 0.0;
  double t_end = 1.0;
  bool record_wires = false;  // also record every non-outport block output
};

/// Number of uniform steps, (t_end - t0) / h rounded up. The small slack
/// keeps binary round-off of an exact quotient from adding a spurious step.
inline std::int64_t step_count(const SolverConfig& cfg) {
  if (!(cfg.h > 0)) throw ConfigError("step size h must be positive");
  if (!(cfg.t_end > cfg.t0)) throw ConfigError("t_end must be greater than t0");
  double ratio = (cfg.t_end - cfg.t0) / cfg.h;
  auto n = static_cast<std::int64_t>(std::ceil(ratio - 1e-9));
  return n < 1 ? 1 : n;
}

}  // namespace refcheck
