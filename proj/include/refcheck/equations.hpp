#pragma once

#include "refcheck/expr.hpp"
#include "refcheck/model.hpp"

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

namespace refcheck {

/// Integrator state recurrence: value(0) = init, d/dt value = deriv.
struct StateDef {
  Rational init;
  SignalExpr deriv;
};

/// Per-model equations: one expression per outport, fully substituted
/// through the feedthrough graph. Discrete delays are self-contained Shift
/// nodes; continuous state appears as IntState symbols with a StateDef.
struct EquationSystem {
  ModelClass klass = ModelClass::Unsampled;
  std::map<std::string, SignalExpr> outputs;    // outport id -> expression
  std::map<std::string, StateDef> state_defs;   // integrator id -> recurrence
  std::set<std::string> inports;
  Rational sample_time = 1;
};

enum class ExtractIssue { Hybrid, DelayCycle };

class ExtractError : public std::runtime_error {
 public:
  ExtractError(ExtractIssue issue, const std::string& message)
      : std::runtime_error(message), issue(issue) {}
  ExtractIssue issue;
};

namespace extract_detail {

struct Extractor {
  const ValidatedModel& vm;
  std::map<std::string, SignalExpr> memo;
  std::set<std::string> in_progress;

  SignalExpr output_of(const std::string& id) {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    if (!in_progress.insert(id).second) {
      // Re-entry can only happen through a delay: feedthrough cycles were
      // rejected by validate and integrators stop recursion at IntState.
      throw ExtractError(ExtractIssue::DelayCycle,
                         "feedback cycle through unit delay at '" + id +
                             "' cannot be expressed as a self-contained delay equation");
    }
    SignalExpr e = build(id);
    in_progress.erase(id);
    memo.emplace(id, e);
    return e;
  }

  SignalExpr input_of(const std::string& id, int port) {
    const PortRef& src = vm.driver(id, port);
    return output_of(src.block);
  }

  SignalExpr build(const std::string& id) {
    const Block& b = vm.block(id);
    return std::visit(
        [&](const auto& k) -> SignalExpr {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Inport>) {
            return SignalExpr::var(id);
          } else if constexpr (std::is_same_v<T, Constant>) {
            return SignalExpr::rat(k.value);
          } else if constexpr (std::is_same_v<T, Clock>) {
            return SignalExpr::time();
          } else if constexpr (std::is_same_v<T, Gain>) {
            return SignalExpr::mul({SignalExpr::rat(k.k), input_of(id, 0)});
          } else if constexpr (std::is_same_v<T, Sum>) {
            std::vector<SignalExpr> terms;
            terms.reserve(k.signs.size());
            for (std::size_t p = 0; p < k.signs.size(); ++p) {
              SignalExpr in = input_of(id, static_cast<int>(p));
              if (k.signs[p] == '-') {
                in = SignalExpr::mul({SignalExpr::rat(-1), in});
              }
              terms.push_back(in);
            }
            return SignalExpr::add(std::move(terms));
          } else if constexpr (std::is_same_v<T, Product>) {
            std::vector<SignalExpr> factors;
            factors.reserve(static_cast<std::size_t>(k.arity));
            for (int p = 0; p < k.arity; ++p) factors.push_back(input_of(id, p));
            return SignalExpr::mul(std::move(factors));
          } else if constexpr (std::is_same_v<T, UnaryFn>) {
            return SignalExpr::apply(k.op, input_of(id, 0));
          } else if constexpr (std::is_same_v<T, UnitDelay>) {
            SignalExpr in = input_of(id, 0);
            // Nested delays merge: the outer init prefix is emitted first.
            if (const auto* s = in.get_if<ShiftNode>()) {
              std::vector<Rational> inits{k.init};
              inits.insert(inits.end(), s->inits.begin(), s->inits.end());
              return SignalExpr::shift(*s->arg, s->depth + 1, std::move(inits));
            }
            return SignalExpr::shift(std::move(in), 1, {k.init});
          } else if constexpr (std::is_same_v<T, Integrator>) {
            return SignalExpr::int_state(id);
          } else {
            return input_of(id, 0);  // Outport: its input's expression
          }
        },
        b.kind);
  }
};

}  // namespace extract_detail

/// Builds the equation representation of a validated non-hybrid model.
inline EquationSystem extract(const ValidatedModel& vm) {
  ModelClass klass = classify(vm);
  if (klass == ModelClass::Hybrid) {
    throw ExtractError(ExtractIssue::Hybrid, "hybrid models are not supported");
  }

  extract_detail::Extractor ex{vm, {}, {}};
  EquationSystem eqs;
  eqs.klass = klass;
  eqs.sample_time = vm.model.sample_time;

  for (const Block& b : vm.model.blocks) {
    if (std::holds_alternative<Inport>(b.kind)) eqs.inports.insert(b.id);
  }
  for (const Block& b : vm.model.blocks) {
    if (std::holds_alternative<Outport>(b.kind)) {
      eqs.outputs.emplace(b.id, ex.output_of(b.id));
    }
  }
  for (const Block& b : vm.model.blocks) {
    if (const auto* integ = std::get_if<Integrator>(&b.kind)) {
      eqs.state_defs.emplace(b.id, StateDef{integ->init, ex.input_of(b.id, 0)});
    }
  }
  return eqs;
}

/// Printable equation text, one line per output (then per state), in
/// deterministic name order.
inline std::string equations_to_text(const EquationSystem& eqs) {
  std::ostringstream out;
  for (const auto& [name, expr] : eqs.outputs) {
    out << name << " = " << expr_to_string(expr) << "\n";
  }
  for (const auto& [id, def] : eqs.state_defs) {
    out << id << "' = " << expr_to_string(def.deriv) << "\n";
    out << id << "(0) = " << rational_to_string(def.init) << "\n";
  }
  return out.str();
}

}  // namespace refcheck
