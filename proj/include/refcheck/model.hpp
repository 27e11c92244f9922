#pragma once

#include "refcheck/rational.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace refcheck {

// ===========================================================================
// Block vocabulary
// ===========================================================================

enum class UnaryOp { Sin, Cos, Neg, Abs };

inline const char* unary_op_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Neg: return "neg";
    case UnaryOp::Abs: return "abs";
  }
  return "?";
}

struct Inport {
  bool operator==(const Inport&) const = default;
};
struct Outport {
  bool operator==(const Outport&) const = default;
};
struct Constant {
  Rational value;
  bool operator==(const Constant&) const = default;
};
/// Emits the current simulation time t.
struct Clock {
  bool operator==(const Clock&) const = default;
};
struct Gain {
  Rational k;
  bool operator==(const Gain&) const = default;
};
/// signs is a string over {+,-}; its length is the input arity (>= 2).
struct Sum {
  std::string signs;
  bool operator==(const Sum&) const = default;
};
struct Product {
  int arity = 2;
  bool operator==(const Product&) const = default;
};
struct UnaryFn {
  UnaryOp op = UnaryOp::Sin;
  bool operator==(const UnaryFn&) const = default;
};
/// Emits the previous major-step input sample; `init` seeds step 0.
struct UnitDelay {
  Rational init;
  bool operator==(const UnitDelay&) const = default;
};
/// Accumulated integral of the input, advanced by the configured solver.
struct Integrator {
  Rational init;
  bool operator==(const Integrator&) const = default;
};

using BlockKind = std::variant<Inport, Outport, Constant, Clock, Gain, Sum,
                               Product, UnaryFn, UnitDelay, Integrator>;

struct Block {
  std::string id;
  BlockKind kind;
  bool operator==(const Block&) const = default;
};

struct PortRef {
  std::string block;
  int port = 0;
  auto operator<=>(const PortRef&) const = default;
};

struct Wire {
  PortRef src;
  PortRef dst;
  auto operator<=>(const Wire&) const = default;
};

struct Model {
  std::string name;
  std::vector<Block> blocks;
  std::vector<Wire> wires;
  Rational sample_time = 1;  // base step for unit delay semantics
};

enum class ModelClass { Unsampled, Discrete, Continuous, Hybrid };

inline const char* model_class_name(ModelClass c) {
  switch (c) {
    case ModelClass::Unsampled: return "Unsampled";
    case ModelClass::Discrete: return "Discrete";
    case ModelClass::Continuous: return "Continuous";
    case ModelClass::Hybrid: return "Hybrid";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Kind predicates
// ---------------------------------------------------------------------------

inline int input_arity(const BlockKind& k) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Inport> || std::is_same_v<T, Constant> ||
                      std::is_same_v<T, Clock>) {
          return 0;
        } else if constexpr (std::is_same_v<T, Sum>) {
          return static_cast<int>(v.signs.size());
        } else if constexpr (std::is_same_v<T, Product>) {
          return v.arity;
        } else {
          return 1;  // Outport, Gain, UnaryFn, UnitDelay, Integrator
        }
      },
      k);
}

inline bool has_output(const BlockKind& k) { return !std::holds_alternative<Outport>(k); }

inline bool is_state_block(const BlockKind& k) {
  return std::holds_alternative<UnitDelay>(k) || std::holds_alternative<Integrator>(k);
}

/// Output at time t depends on input at time t. False only for state blocks.
inline bool direct_feedthrough(const BlockKind& k) { return !is_state_block(k); }

inline const char* kind_name(const BlockKind& k) {
  return std::visit(
      [](const auto& v) -> const char* {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Inport>) return "Inport";
        if constexpr (std::is_same_v<T, Outport>) return "Outport";
        if constexpr (std::is_same_v<T, Constant>) return "Constant";
        if constexpr (std::is_same_v<T, Clock>) return "Clock";
        if constexpr (std::is_same_v<T, Gain>) return "Gain";
        if constexpr (std::is_same_v<T, Sum>) return "Sum";
        if constexpr (std::is_same_v<T, Product>) return "Product";
        if constexpr (std::is_same_v<T, UnaryFn>) return "UnaryFn";
        if constexpr (std::is_same_v<T, UnitDelay>) return "UnitDelay";
        if constexpr (std::is_same_v<T, Integrator>) return "Integrator";
        return "?";
      },
      k);
}

inline bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
  };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), tail);
}

/// Structural equality: declaration order of blocks and wires is irrelevant.
inline bool models_equal(const Model& a, const Model& b) {
  if (a.name != b.name || a.sample_time != b.sample_time) return false;
  auto blocks_sorted = [](const Model& m) {
    auto v = m.blocks;
    std::sort(v.begin(), v.end(),
              [](const Block& x, const Block& y) { return x.id < y.id; });
    return v;
  };
  auto wires_sorted = [](const Model& m) {
    auto v = m.wires;
    std::sort(v.begin(), v.end());
    return v;
  };
  return blocks_sorted(a) == blocks_sorted(b) && wires_sorted(a) == wires_sorted(b);
}

// ===========================================================================
// Validation
// ===========================================================================

enum class ValidationIssue {
  DuplicateId,
  InvalidId,
  NoOutport,
  DanglingWire,
  UnconnectedInput,
  DuplicateDriver,
  AlgebraicLoop,
  BadParam,
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationIssue issue, std::string message,
                  std::vector<std::string> blocks = {})
      : std::runtime_error(std::move(message)), issue(issue), blocks(std::move(blocks)) {}

  ValidationIssue issue;
  std::vector<std::string> blocks;  // offending block ids (cycle members for AlgebraicLoop)
};

/// Model plus the annotations every later stage relies on: per-block input
/// arity, the unique driver of each input port, and the direct-feedthrough
/// dependency graph. Construction goes through validate().
struct ValidatedModel {
  Model model;
  std::map<std::string, std::size_t> block_index;            // id -> position in model.blocks
  std::map<std::string, std::vector<PortRef>> drivers;       // id -> per-input-port source
  std::map<std::string, std::vector<std::string>> feed_out;  // feedthrough edges src -> dst

  const Block& block(const std::string& id) const { return model.blocks[block_index.at(id)]; }
  const PortRef& driver(const std::string& id, int port) const { return drivers.at(id)[port]; }
};

inline ValidatedModel validate(const Model& m) {
  ValidatedModel vm;
  vm.model = m;

  for (std::size_t i = 0; i < m.blocks.size(); ++i) {
    const Block& b = m.blocks[i];
    if (!valid_identifier(b.id)) {
      throw ValidationError(ValidationIssue::InvalidId, "invalid block id '" + b.id + "'",
                            {b.id});
    }
    if (!vm.block_index.emplace(b.id, i).second) {
      throw ValidationError(ValidationIssue::DuplicateId, "duplicate block id '" + b.id + "'",
                            {b.id});
    }
    if (const auto* s = std::get_if<Sum>(&b.kind)) {
      if (s->signs.size() < 2 ||
          s->signs.find_first_not_of("+-") != std::string::npos) {
        throw ValidationError(ValidationIssue::BadParam,
                              "Sum '" + b.id + "': signs must be a string over {+,-} of length >= 2",
                              {b.id});
      }
    }
    if (const auto* p = std::get_if<Product>(&b.kind)) {
      if (p->arity < 2) {
        throw ValidationError(ValidationIssue::BadParam,
                              "Product '" + b.id + "': arity must be >= 2", {b.id});
      }
    }
  }
  if (vm.model.sample_time <= 0) {
    throw ValidationError(ValidationIssue::BadParam, "sample_time must be positive");
  }

  bool any_outport = std::any_of(m.blocks.begin(), m.blocks.end(), [](const Block& b) {
    return std::holds_alternative<Outport>(b.kind);
  });
  if (!any_outport) {
    throw ValidationError(ValidationIssue::NoOutport, "model has no Outport");
  }

  for (const Block& b : m.blocks) {
    vm.drivers[b.id].assign(static_cast<std::size_t>(input_arity(b.kind)), PortRef{});
  }
  std::map<std::string, std::vector<bool>> seen;
  for (const Block& b : m.blocks) {
    seen[b.id].assign(static_cast<std::size_t>(input_arity(b.kind)), false);
  }

  for (const Wire& w : m.wires) {
    auto src_it = vm.block_index.find(w.src.block);
    if (src_it == vm.block_index.end() || !has_output(m.blocks[src_it->second].kind) ||
        w.src.port != 0) {
      throw ValidationError(ValidationIssue::DanglingWire,
                            "wire source " + w.src.block + "." + std::to_string(w.src.port) +
                                " does not name an output port",
                            {w.src.block});
    }
    auto dst_it = vm.block_index.find(w.dst.block);
    if (dst_it == vm.block_index.end() || w.dst.port < 0 ||
        w.dst.port >= input_arity(m.blocks[dst_it->second].kind)) {
      throw ValidationError(ValidationIssue::DanglingWire,
                            "wire destination " + w.dst.block + "." + std::to_string(w.dst.port) +
                                " does not name an input port",
                            {w.dst.block});
    }
    if (seen[w.dst.block][static_cast<std::size_t>(w.dst.port)]) {
      throw ValidationError(ValidationIssue::DuplicateDriver,
                            "input port " + w.dst.block + "." + std::to_string(w.dst.port) +
                                " has more than one incoming wire",
                            {w.dst.block});
    }
    seen[w.dst.block][static_cast<std::size_t>(w.dst.port)] = true;
    vm.drivers[w.dst.block][static_cast<std::size_t>(w.dst.port)] = w.src;
  }

  for (const Block& b : m.blocks) {
    const auto& flags = seen[b.id];
    for (std::size_t p = 0; p < flags.size(); ++p) {
      if (!flags[p]) {
        throw ValidationError(ValidationIssue::UnconnectedInput,
                              "input port " + b.id + "." + std::to_string(p) + " is unconnected",
                              {b.id});
      }
    }
  }

  // Feedthrough dependency graph: src must be evaluated before dst whenever
  // dst's output instantaneously depends on its inputs.
  for (const Block& b : m.blocks) vm.feed_out[b.id];  // ensure every node exists
  for (const Wire& w : m.wires) {
    const Block& dst = m.blocks[vm.block_index.at(w.dst.block)];
    if (direct_feedthrough(dst.kind)) {
      vm.feed_out[w.src.block].push_back(w.dst.block);
    }
  }
  for (auto& [id, outs] : vm.feed_out) {
    std::sort(outs.begin(), outs.end());
    outs.erase(std::unique(outs.begin(), outs.end()), outs.end());
  }

  // Algebraic loop = cycle in the feedthrough graph (state blocks never have
  // incoming feedthrough edges, so any cycle is feedthrough-only).
  {
    std::map<std::string, int> color;  // 0 unvisited, 1 on stack, 2 done
    std::vector<std::string> stack;
    auto dfs = [&](auto&& self, const std::string& id) -> void {
      color[id] = 1;
      stack.push_back(id);
      for (const std::string& next : vm.feed_out.at(id)) {
        if (color[next] == 1) {
          auto begin = std::find(stack.begin(), stack.end(), next);
          std::vector<std::string> cycle(begin, stack.end());
          auto smallest = std::min_element(cycle.begin(), cycle.end());
          std::rotate(cycle.begin(), smallest, cycle.end());
          std::string msg = "algebraic loop:";
          for (const auto& c : cycle) msg += " " + c;
          throw ValidationError(ValidationIssue::AlgebraicLoop, msg, cycle);
        }
        if (color[next] == 0) self(self, next);
      }
      stack.pop_back();
      color[id] = 2;
    };
    for (const Block& b : m.blocks) {
      if (color[b.id] == 0) dfs(dfs, b.id);
    }
  }

  return vm;
}

/// Pure function of the multiset of block kinds.
inline ModelClass classify(const ValidatedModel& vm) {
  bool delay = false, integ = false;
  for (const Block& b : vm.model.blocks) {
    delay = delay || std::holds_alternative<UnitDelay>(b.kind);
    integ = integ || std::holds_alternative<Integrator>(b.kind);
  }
  if (delay && integ) return ModelClass::Hybrid;
  if (delay) return ModelClass::Discrete;
  if (integ) return ModelClass::Continuous;
  return ModelClass::Unsampled;
}

/// Topological order of the feedthrough graph; state blocks act as sources
/// of their outputs. Ties broken by lexicographic block id.
inline std::vector<std::string> execution_order(const ValidatedModel& vm) {
  std::map<std::string, int> indegree;
  for (const auto& [id, outs] : vm.feed_out) indegree[id];
  for (const auto& [id, outs] : vm.feed_out) {
    for (const auto& dst : outs) ++indegree[dst];
  }

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree) {
    if (deg == 0) ready.push(id);
  }
  std::vector<std::string> order;
  order.reserve(indegree.size());
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& dst : vm.feed_out.at(id)) {
      if (--indegree[dst] == 0) ready.push(dst);
    }
  }
  return order;  // complete: validate() already rejected algebraic loops
}

}  // namespace refcheck
