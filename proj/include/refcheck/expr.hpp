#pragma once

#include "refcheck/model.hpp"
#include "refcheck/rational.hpp"

#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace refcheck {

// ===========================================================================
// SignalExpr — immutable AST relating an output signal to input signals,
// time and state. Nodes are shared; copies are cheap and thread-safe.
// ===========================================================================

class SignalExpr;

struct VarNode {
  std::string name;  // inport id
};
struct TimeNode {};
struct RatNode {
  Rational value;
};
struct AddNode {
  std::vector<SignalExpr> terms;  // length >= 2
};
struct MulNode {
  std::vector<SignalExpr> factors;  // length >= 2
};
struct ApplyNode {
  UnaryOp op;
  std::shared_ptr<const SignalExpr> arg;
};
/// Delay by `depth` major steps; sample k reads inits[k] while k < depth.
struct ShiftNode {
  std::shared_ptr<const SignalExpr> arg;
  int depth = 1;
  std::vector<Rational> inits;  // size == depth, inits[0] emitted first
};
struct IntStateNode {
  std::string id;  // integrator block id
};

using ExprNode =
    std::variant<VarNode, TimeNode, RatNode, AddNode, MulNode, ApplyNode, ShiftNode, IntStateNode>;

class SignalExpr {
 public:
  SignalExpr() : node_(std::make_shared<ExprNode>(RatNode{Rational(0)})) {}
  explicit SignalExpr(ExprNode node) : node_(std::make_shared<ExprNode>(std::move(node))) {}

  static SignalExpr var(std::string name) { return SignalExpr(VarNode{std::move(name)}); }
  static SignalExpr time() { return SignalExpr(TimeNode{}); }
  static SignalExpr rat(Rational q) { return SignalExpr(RatNode{std::move(q)}); }
  static SignalExpr add(std::vector<SignalExpr> terms) {
    return SignalExpr(AddNode{std::move(terms)});
  }
  static SignalExpr mul(std::vector<SignalExpr> factors) {
    return SignalExpr(MulNode{std::move(factors)});
  }
  static SignalExpr apply(UnaryOp op, SignalExpr arg) {
    return SignalExpr(ApplyNode{op, std::make_shared<const SignalExpr>(std::move(arg))});
  }
  static SignalExpr shift(SignalExpr arg, int depth, std::vector<Rational> inits) {
    return SignalExpr(
        ShiftNode{std::make_shared<const SignalExpr>(std::move(arg)), depth, std::move(inits)});
  }
  static SignalExpr int_state(std::string id) { return SignalExpr(IntStateNode{std::move(id)}); }

  const ExprNode& node() const { return *node_; }

  template <typename T>
  const T* get_if() const {
    return std::get_if<T>(node_.get());
  }

 private:
  std::shared_ptr<const ExprNode> node_;
};

inline bool expr_equal(const SignalExpr& a, const SignalExpr& b);

namespace expr_detail {

inline bool vec_equal(const std::vector<SignalExpr>& a, const std::vector<SignalExpr>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!expr_equal(a[i], b[i])) return false;
  }
  return true;
}

}  // namespace expr_detail

/// Deep structural equality.
inline bool expr_equal(const SignalExpr& a, const SignalExpr& b) {
  const ExprNode& na = a.node();
  const ExprNode& nb = b.node();
  if (na.index() != nb.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(nb);
        if constexpr (std::is_same_v<T, VarNode>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, TimeNode>) {
          return true;
        } else if constexpr (std::is_same_v<T, RatNode>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, AddNode>) {
          return expr_detail::vec_equal(x.terms, y.terms);
        } else if constexpr (std::is_same_v<T, MulNode>) {
          return expr_detail::vec_equal(x.factors, y.factors);
        } else if constexpr (std::is_same_v<T, ApplyNode>) {
          return x.op == y.op && expr_equal(*x.arg, *y.arg);
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          return x.depth == y.depth && x.inits == y.inits && expr_equal(*x.arg, *y.arg);
        } else {
          return x.id == std::get<IntStateNode>(nb).id;
        }
      },
      na);
}

namespace expr_detail {

inline void print(std::ostream& out, const SignalExpr& e, int parent_prec);

// Precedence: 0 = additive context, 1 = multiplicative context.
inline void print_terms(std::ostream& out, const std::vector<SignalExpr>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const SignalExpr& term = terms[i];
    bool negated = false;
    SignalExpr shown = term;
    if (const auto* r = term.get_if<RatNode>(); r && r->value < 0) {
      negated = true;
      shown = SignalExpr::rat(-r->value);
    } else if (const auto* m = term.get_if<MulNode>()) {
      if (const auto* r0 = m->factors[0].get_if<RatNode>(); r0 && r0->value == -1) {
        negated = true;
        shown = m->factors.size() == 2 ? m->factors[1]
                                       : SignalExpr::mul({m->factors.begin() + 1, m->factors.end()});
      }
    }
    if (i == 0) {
      if (negated) out << "-";
    } else {
      out << (negated ? " - " : " + ");
    }
    print(out, shown, 0);
  }
}

inline void print(std::ostream& out, const SignalExpr& e, int parent_prec) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarNode>) {
          out << n.name;
        } else if constexpr (std::is_same_v<T, TimeNode>) {
          out << "t";
        } else if constexpr (std::is_same_v<T, RatNode>) {
          if (n.value < 0 && parent_prec >= 1) {
            out << "(" << rational_to_string(n.value) << ")";
          } else {
            out << rational_to_string(n.value);
          }
        } else if constexpr (std::is_same_v<T, AddNode>) {
          if (parent_prec >= 1) out << "(";
          print_terms(out, n.terms);
          if (parent_prec >= 1) out << ")";
        } else if constexpr (std::is_same_v<T, MulNode>) {
          for (std::size_t i = 0; i < n.factors.size(); ++i) {
            if (i > 0) out << "*";
            print(out, n.factors[i], 1);
          }
        } else if constexpr (std::is_same_v<T, ApplyNode>) {
          out << unary_op_name(n.op) << "(";
          print(out, *n.arg, 0);
          out << ")";
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          out << "shift(";
          print(out, *n.arg, 0);
          out << ", " << n.depth << ", [";
          for (std::size_t i = 0; i < n.inits.size(); ++i) {
            if (i > 0) out << ", ";
            out << rational_to_string(n.inits[i]);
          }
          out << "])";
        } else {
          out << n.id;
        }
      },
      e.node());
}

}  // namespace expr_detail

inline std::string expr_to_string(const SignalExpr& e) {
  std::ostringstream out;
  expr_detail::print(out, e, 0);
  return out.str();
}

}  // namespace refcheck
