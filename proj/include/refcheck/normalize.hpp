#pragma once

#include "refcheck/expr.hpp"
#include "refcheck/rational.hpp"

#include <memory>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace refcheck {

// ===========================================================================
// NormalForm — canonical polynomial over opaque atoms.
//
// A normal form is a sum of monomials; each monomial is an exact rational
// coefficient times a sorted multiset of atoms. Atoms are variables, time,
// opaque function applications, delays and integrator states; their
// arguments are recursively normalized. Commutative-ring equivalences plus
// constant folding and delay-chain merging hold; no identities are applied
// under function atoms, so equality of normal forms is sound but incomplete.
// ===========================================================================

struct NormalForm;

struct VarAtom {
  std::string name;
};
struct TimeAtom {};
struct ApplyAtom {
  UnaryOp op;
  std::shared_ptr<const NormalForm> arg;
};
struct ShiftAtom {
  std::shared_ptr<const NormalForm> arg;
  int depth = 1;
  std::vector<Rational> inits;
};
struct IntStateAtom {
  std::string id;
};

using Atom = std::variant<VarAtom, TimeAtom, ApplyAtom, ShiftAtom, IntStateAtom>;

struct Factor {
  Atom atom;
  int power = 1;
};

struct Monomial {
  Rational coeff;
  std::vector<Factor> factors;  // sorted by atom order, powers >= 1
};

struct NormalForm {
  std::vector<Monomial> monomials;  // sorted by factor key; no zero coefficients
};

// ---------------------------------------------------------------------------
// Total order
// ---------------------------------------------------------------------------

inline int nf_cmp(const NormalForm& a, const NormalForm& b);

inline int rat_cmp(const Rational& a, const Rational& b) {
  if (a < b) return -1;
  if (b < a) return 1;
  return 0;
}

inline int atom_cmp(const Atom& a, const Atom& b) {
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  return std::visit(
      [&](const auto& x) -> int {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, VarAtom>) {
          return x.name.compare(y.name);
        } else if constexpr (std::is_same_v<T, TimeAtom>) {
          return 0;
        } else if constexpr (std::is_same_v<T, ApplyAtom>) {
          if (x.op != y.op) return static_cast<int>(x.op) < static_cast<int>(y.op) ? -1 : 1;
          return nf_cmp(*x.arg, *y.arg);
        } else if constexpr (std::is_same_v<T, ShiftAtom>) {
          if (int c = nf_cmp(*x.arg, *y.arg)) return c;
          if (x.depth != y.depth) return x.depth < y.depth ? -1 : 1;
          for (std::size_t i = 0; i < x.inits.size(); ++i) {
            if (int c = rat_cmp(x.inits[i], y.inits[i])) return c;
          }
          return 0;
        } else {
          return x.id.compare(std::get<IntStateAtom>(b).id);
        }
      },
      a);
}

/// Order on the atom multiset only (the monomial merge key).
inline int factors_cmp(const std::vector<Factor>& a, const std::vector<Factor>& b) {
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = atom_cmp(a[i].atom, b[i].atom)) return c;
    if (a[i].power != b[i].power) return a[i].power < b[i].power ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

inline int monomial_cmp(const Monomial& a, const Monomial& b) {
  if (int c = factors_cmp(a.factors, b.factors)) return c;
  return rat_cmp(a.coeff, b.coeff);
}

inline int nf_cmp(const NormalForm& a, const NormalForm& b) {
  std::size_t n = std::min(a.monomials.size(), b.monomials.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = monomial_cmp(a.monomials[i], b.monomials[i])) return c;
  }
  if (a.monomials.size() != b.monomials.size()) {
    return a.monomials.size() < b.monomials.size() ? -1 : 1;
  }
  return 0;
}

/// Structural equality of canonical forms: sound for equality of the denoted
/// functions under the rewrite theory above, incomplete for identities of
/// the opaque atoms (e.g. trigonometric ones).
inline bool equal_normal(const NormalForm& a, const NormalForm& b) { return nf_cmp(a, b) == 0; }

// ---------------------------------------------------------------------------
// Ring operations
// ---------------------------------------------------------------------------

inline NormalForm nf_zero() { return {}; }

inline NormalForm nf_const(Rational q) {
  if (q == 0) return {};
  return {{Monomial{std::move(q), {}}}};
}

inline NormalForm nf_atom(Atom a) { return {{Monomial{Rational(1), {Factor{std::move(a), 1}}}}}; }

namespace nf_detail {

/// Sorts by merge key, sums equal keys, drops zero coefficients.
inline NormalForm canonicalize(std::vector<Monomial> monomials) {
  std::sort(monomials.begin(), monomials.end(),
            [](const Monomial& a, const Monomial& b) { return factors_cmp(a.factors, b.factors) < 0; });
  NormalForm out;
  for (auto& m : monomials) {
    if (!out.monomials.empty() && factors_cmp(out.monomials.back().factors, m.factors) == 0) {
      out.monomials.back().coeff += m.coeff;
    } else {
      out.monomials.push_back(std::move(m));
    }
  }
  std::erase_if(out.monomials, [](const Monomial& m) { return m.coeff == 0; });
  return out;
}

inline std::vector<Factor> merge_factors(const std::vector<Factor>& a,
                                         const std::vector<Factor>& b) {
  std::vector<Factor> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    int c = atom_cmp(a[i].atom, b[j].atom);
    if (c < 0) {
      out.push_back(a[i++]);
    } else if (c > 0) {
      out.push_back(b[j++]);
    } else {
      out.push_back({a[i].atom, a[i].power + b[j].power});
      ++i;
      ++j;
    }
  }
  while (i < a.size()) out.push_back(a[i++]);
  while (j < b.size()) out.push_back(b[j++]);
  return out;
}

}  // namespace nf_detail

inline NormalForm nf_add(const NormalForm& a, const NormalForm& b) {
  std::vector<Monomial> all = a.monomials;
  all.insert(all.end(), b.monomials.begin(), b.monomials.end());
  return nf_detail::canonicalize(std::move(all));
}

inline NormalForm nf_mul(const NormalForm& a, const NormalForm& b) {
  std::vector<Monomial> all;
  all.reserve(a.monomials.size() * b.monomials.size());
  for (const Monomial& ma : a.monomials) {
    for (const Monomial& mb : b.monomials) {
      all.push_back({ma.coeff * mb.coeff, nf_detail::merge_factors(ma.factors, mb.factors)});
    }
  }
  return nf_detail::canonicalize(std::move(all));
}

inline NormalForm nf_scale(const NormalForm& a, const Rational& q) {
  if (q == 0) return {};
  NormalForm out = a;
  for (Monomial& m : out.monomials) m.coeff *= q;
  return out;
}

// ---------------------------------------------------------------------------
// normalize
// ---------------------------------------------------------------------------

/// Rewrites to the canonical polynomial, applying to fixpoint: flattening of
/// nested sums/products, distribution of products over sums, rational
/// constant folding, monomial collection, delay-chain collapsing, zero
/// cancellation, and recursion under function and delay atoms. Total.
inline NormalForm normalize(const SignalExpr& e) {
  return std::visit(
      [&](const auto& n) -> NormalForm {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, VarNode>) {
          return nf_atom(VarAtom{n.name});
        } else if constexpr (std::is_same_v<T, TimeNode>) {
          return nf_atom(TimeAtom{});
        } else if constexpr (std::is_same_v<T, RatNode>) {
          return nf_const(n.value);
        } else if constexpr (std::is_same_v<T, AddNode>) {
          NormalForm acc;
          for (const SignalExpr& term : n.terms) acc = nf_add(acc, normalize(term));
          return acc;
        } else if constexpr (std::is_same_v<T, MulNode>) {
          NormalForm acc = nf_const(Rational(1));
          for (const SignalExpr& factor : n.factors) acc = nf_mul(acc, normalize(factor));
          return acc;
        } else if constexpr (std::is_same_v<T, ApplyNode>) {
          if (n.op == UnaryOp::Neg) return nf_scale(normalize(*n.arg), Rational(-1));
          return nf_atom(ApplyAtom{n.op, std::make_shared<const NormalForm>(normalize(*n.arg))});
        } else if constexpr (std::is_same_v<T, ShiftNode>) {
          NormalForm arg = normalize(*n.arg);
          // shift(shift(e, m, i1), n, i2) == shift(e, m+n, i2 ++ i1)
          if (arg.monomials.size() == 1 && arg.monomials[0].coeff == 1 &&
              arg.monomials[0].factors.size() == 1 && arg.monomials[0].factors[0].power == 1) {
            if (const auto* inner = std::get_if<ShiftAtom>(&arg.monomials[0].factors[0].atom)) {
              std::vector<Rational> inits = n.inits;
              inits.insert(inits.end(), inner->inits.begin(), inner->inits.end());
              return nf_atom(ShiftAtom{inner->arg, inner->depth + n.depth, std::move(inits)});
            }
          }
          return nf_atom(
              ShiftAtom{std::make_shared<const NormalForm>(std::move(arg)), n.depth, n.inits});
        } else {
          return nf_atom(IntStateAtom{n.id});
        }
      },
      e.node());
}

// ---------------------------------------------------------------------------
// Conversions and printing
// ---------------------------------------------------------------------------

inline SignalExpr nf_to_expr(const NormalForm& nf);

namespace nf_detail {

inline SignalExpr atom_to_expr(const Atom& a) {
  return std::visit(
      [](const auto& x) -> SignalExpr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, VarAtom>) {
          return SignalExpr::var(x.name);
        } else if constexpr (std::is_same_v<T, TimeAtom>) {
          return SignalExpr::time();
        } else if constexpr (std::is_same_v<T, ApplyAtom>) {
          return SignalExpr::apply(x.op, nf_to_expr(*x.arg));
        } else if constexpr (std::is_same_v<T, ShiftAtom>) {
          return SignalExpr::shift(nf_to_expr(*x.arg), x.depth, x.inits);
        } else {
          return SignalExpr::int_state(x.id);
        }
      },
      a);
}

}  // namespace nf_detail

/// Expression denoting the normal form (used for re-normalization checks and
/// for feeding normalized systems back into evaluators).
inline SignalExpr nf_to_expr(const NormalForm& nf) {
  std::vector<SignalExpr> terms;
  for (const Monomial& m : nf.monomials) {
    std::vector<SignalExpr> factors;
    if (m.coeff != 1 || m.factors.empty()) factors.push_back(SignalExpr::rat(m.coeff));
    for (const Factor& f : m.factors) {
      for (int p = 0; p < f.power; ++p) factors.push_back(nf_detail::atom_to_expr(f.atom));
    }
    terms.push_back(factors.size() == 1 ? factors[0] : SignalExpr::mul(std::move(factors)));
  }
  if (terms.empty()) return SignalExpr::rat(Rational(0));
  if (terms.size() == 1) return terms[0];
  return SignalExpr::add(std::move(terms));
}

inline std::string nf_to_string(const NormalForm& nf);

namespace nf_detail {

inline std::string atom_to_string(const Atom& a) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, VarAtom>) {
          return x.name;
        } else if constexpr (std::is_same_v<T, TimeAtom>) {
          return "t";
        } else if constexpr (std::is_same_v<T, ApplyAtom>) {
          return std::string(unary_op_name(x.op)) + "(" + nf_to_string(*x.arg) + ")";
        } else if constexpr (std::is_same_v<T, ShiftAtom>) {
          std::string s = "shift(" + nf_to_string(*x.arg) + ", " + std::to_string(x.depth) + ", [";
          for (std::size_t i = 0; i < x.inits.size(); ++i) {
            if (i > 0) s += ", ";
            s += rational_to_string(x.inits[i]);
          }
          return s + "])";
        } else {
          return x.id;
        }
      },
      a);
}

}  // namespace nf_detail

inline std::string nf_to_string(const NormalForm& nf) {
  if (nf.monomials.empty()) return "0";
  std::ostringstream out;
  for (std::size_t i = 0; i < nf.monomials.size(); ++i) {
    const Monomial& m = nf.monomials[i];
    Rational mag = abs(m.coeff);
    if (i == 0) {
      if (m.coeff < 0) out << "-";
    } else {
      out << (m.coeff < 0 ? " - " : " + ");
    }
    bool printed = false;
    if (mag != 1 || m.factors.empty()) {
      out << rational_to_string(mag);
      printed = true;
    }
    for (const Factor& f : m.factors) {
      if (printed) out << "*";
      out << nf_detail::atom_to_string(f.atom);
      if (f.power > 1) out << "^" << f.power;
      printed = true;
    }
  }
  return out.str();
}

}  // namespace refcheck
