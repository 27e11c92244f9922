#pragma once

#include "refcheck/model.hpp"
#include "refcheck/rational.hpp"

#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refcheck {

// ===========================================================================
// BDL — the textual block diagram format.
//
//   file    := "model" IDENT NEWLINE (blockln | wireln | sampleln)*
//   blockln := "block" IDENT KIND (IDENT "=" VALUE)*
//   wireln  := "wire" IDENT "." NAT "->" IDENT "." NAT
//   sampleln:= "sample_time" NUMBER
//
// '#' starts a comment; blank lines are ignored. Numeric literals are exact
// decimals (optionally "p/q"); they are stored as exact rationals.
// ===========================================================================

struct SourceSpan {
  int line = 1;    // 1-based
  int column = 1;  // 1-based
  int length = 1;
  bool operator==(const SourceSpan&) const = default;
};

enum class ParseErrorKind { Lex, Syntax, UnknownKind, BadParam };

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind kind, SourceSpan span, const std::string& message)
      : std::runtime_error(message), kind(kind), span(span) {}

  ParseErrorKind kind;
  SourceSpan span;
};

namespace bdl_detail {

struct Token {
  std::string text;
  SourceSpan span;
};

// Splits one line into whitespace-separated tokens with column spans;
// truncates at '#'.
inline std::vector<Token> tokenize_line(std::string_view line, int line_no) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '#') ++i;
    tokens.push_back({std::string(line.substr(start, i - start)),
                      {line_no, static_cast<int>(start) + 1, static_cast<int>(i - start)}});
  }
  return tokens;
}

inline Rational require_number(const Token& tok, ParseErrorKind kind) {
  auto q = parse_rational(tok.text);
  if (!q) throw ParseError(kind, tok.span, "malformed number '" + tok.text + "'");
  return *q;
}

inline std::optional<int> parse_nat(std::string_view s) {
  if (s.empty() || s.size() > 6) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

inline PortRef parse_endpoint(const Token& tok) {
  auto dot = tok.text.rfind('.');
  if (dot == std::string::npos) {
    throw ParseError(ParseErrorKind::Syntax, tok.span,
                     "expected BLOCK.PORT endpoint, got '" + tok.text + "'");
  }
  std::string block = tok.text.substr(0, dot);
  auto port = parse_nat(tok.text.substr(dot + 1));
  if (!valid_identifier(block) || !port) {
    throw ParseError(ParseErrorKind::Syntax, tok.span,
                     "expected BLOCK.PORT endpoint, got '" + tok.text + "'");
  }
  return {block, *port};
}

struct ParamList {
  std::vector<std::pair<Token, Token>> entries;  // (key, value) token pairs

  const Token* find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
      if (k.text == key) return &v;
    }
    return nullptr;
  }
};

inline ParamList parse_params(const std::vector<Token>& tokens, std::size_t from) {
  ParamList params;
  for (std::size_t i = from; i < tokens.size(); ++i) {
    const Token& tok = tokens[i];
    auto eq = tok.text.find('=');
    if (eq == std::string::npos) {
      throw ParseError(ParseErrorKind::Syntax, tok.span,
                       "expected NAME=VALUE parameter, got '" + tok.text + "'");
    }
    std::string key = tok.text.substr(0, eq);
    std::string value = tok.text.substr(eq + 1);
    if (!valid_identifier(key) || value.empty()) {
      throw ParseError(ParseErrorKind::BadParam, tok.span,
                       "malformed parameter '" + tok.text + "'");
    }
    Token key_tok{key, {tok.span.line, tok.span.column, static_cast<int>(eq)}};
    Token val_tok{value,
                  {tok.span.line, tok.span.column + static_cast<int>(eq) + 1,
                   static_cast<int>(value.size())}};
    for (const auto& [k, v] : params.entries) {
      if (k.text == key) {
        throw ParseError(ParseErrorKind::BadParam, key_tok.span,
                         "duplicate parameter '" + key + "'");
      }
    }
    params.entries.emplace_back(key_tok, val_tok);
  }
  return params;
}

inline Rational param_number(const ParamList& params, std::string_view key,
                             const Token& anchor) {
  const Token* tok = params.find(key);
  if (!tok) {
    throw ParseError(ParseErrorKind::BadParam, anchor.span,
                     "missing required parameter '" + std::string(key) + "'");
  }
  auto q = parse_rational(tok->text);
  if (!q) {
    throw ParseError(ParseErrorKind::BadParam, tok->span,
                     "parameter '" + std::string(key) + "' is not a number");
  }
  return *q;
}

inline void reject_unknown_params(const ParamList& params,
                                  std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : params.entries) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k.text == a;
    if (!ok) {
      throw ParseError(ParseErrorKind::BadParam, k.span, "unknown parameter '" + k.text + "'");
    }
  }
}

inline BlockKind parse_kind(const Token& kind_tok, const ParamList& params) {
  const std::string& kind = kind_tok.text;
  if (kind == "Inport") {
    reject_unknown_params(params, {});
    return Inport{};
  }
  if (kind == "Outport") {
    reject_unknown_params(params, {});
    return Outport{};
  }
  if (kind == "Clock") {
    reject_unknown_params(params, {});
    return Clock{};
  }
  if (kind == "Constant") {
    reject_unknown_params(params, {"value"});
    return Constant{param_number(params, "value", kind_tok)};
  }
  if (kind == "Gain") {
    reject_unknown_params(params, {"k"});
    return Gain{param_number(params, "k", kind_tok)};
  }
  if (kind == "Sum") {
    reject_unknown_params(params, {"signs"});
    const Token* tok = params.find("signs");
    if (!tok) {
      throw ParseError(ParseErrorKind::BadParam, kind_tok.span,
                       "missing required parameter 'signs'");
    }
    if (tok->text.size() < 2 || tok->text.find_first_not_of("+-") != std::string::npos) {
      throw ParseError(ParseErrorKind::BadParam, tok->span,
                       "signs must be a string over {+,-} of length >= 2");
    }
    return Sum{tok->text};
  }
  if (kind == "Product") {
    reject_unknown_params(params, {"arity"});
    const Token* tok = params.find("arity");
    if (!tok) {
      throw ParseError(ParseErrorKind::BadParam, kind_tok.span,
                       "missing required parameter 'arity'");
    }
    auto arity = parse_nat(tok->text);
    if (!arity || *arity < 2) {
      throw ParseError(ParseErrorKind::BadParam, tok->span, "arity must be an integer >= 2");
    }
    return Product{*arity};
  }
  if (kind == "UnaryFn") {
    reject_unknown_params(params, {"op"});
    const Token* tok = params.find("op");
    if (!tok) {
      throw ParseError(ParseErrorKind::BadParam, kind_tok.span,
                       "missing required parameter 'op'");
    }
    if (tok->text == "sin") return UnaryFn{UnaryOp::Sin};
    if (tok->text == "cos") return UnaryFn{UnaryOp::Cos};
    if (tok->text == "neg") return UnaryFn{UnaryOp::Neg};
    if (tok->text == "abs") return UnaryFn{UnaryOp::Abs};
    throw ParseError(ParseErrorKind::BadParam, tok->span,
                     "op must be one of sin, cos, neg, abs");
  }
  if (kind == "UnitDelay") {
    reject_unknown_params(params, {"init"});
    return UnitDelay{param_number(params, "init", kind_tok)};
  }
  if (kind == "Integrator") {
    reject_unknown_params(params, {"init"});
    return Integrator{param_number(params, "init", kind_tok)};
  }
  throw ParseError(ParseErrorKind::UnknownKind, kind_tok.span, "unknown block kind '" + kind + "'");
}

}  // namespace bdl_detail

/// Parses BDL text into a Model. Syntax only: wire targets and graph-level
/// invariants are checked later by validate(). Throws ParseError at the
/// first failure.
inline Model parse_bdl(std::string_view text) {
  using namespace bdl_detail;

  Model model;
  bool have_header = false;
  bool have_sample_time = false;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos
                                                                           : eol - pos);
    if (!line.empty() && line.back() == '\r') line = line.substr(0, line.size() - 1);
    ++line_no;

    auto tokens = tokenize_line(line, line_no);
    if (!tokens.empty()) {
      const Token& head = tokens[0];
      if (!have_header) {
        if (head.text != "model") {
          throw ParseError(ParseErrorKind::Syntax, head.span, "expected 'model NAME' header");
        }
        if (tokens.size() != 2 || !valid_identifier(tokens[1].text)) {
          SourceSpan sp = tokens.size() > 1 ? tokens[1].span : head.span;
          throw ParseError(ParseErrorKind::Syntax, sp, "expected 'model NAME' header");
        }
        model.name = tokens[1].text;
        have_header = true;
      } else if (head.text == "block") {
        if (tokens.size() < 3) {
          throw ParseError(ParseErrorKind::Syntax, head.span, "expected 'block ID KIND ...'");
        }
        if (!valid_identifier(tokens[1].text)) {
          throw ParseError(ParseErrorKind::Lex, tokens[1].span,
                           "invalid identifier '" + tokens[1].text + "'");
        }
        auto params = parse_params(tokens, 3);
        model.blocks.push_back({tokens[1].text, parse_kind(tokens[2], params)});
      } else if (head.text == "wire") {
        if (tokens.size() != 4 || tokens[2].text != "->") {
          throw ParseError(ParseErrorKind::Syntax, head.span,
                           "expected 'wire SRC.P -> DST.P'");
        }
        model.wires.push_back({parse_endpoint(tokens[1]), parse_endpoint(tokens[3])});
      } else if (head.text == "sample_time") {
        if (tokens.size() != 2) {
          throw ParseError(ParseErrorKind::Syntax, head.span, "expected 'sample_time NUMBER'");
        }
        if (have_sample_time) {
          throw ParseError(ParseErrorKind::Syntax, head.span, "duplicate sample_time line");
        }
        Rational st = require_number(tokens[1], ParseErrorKind::Lex);
        if (st <= 0) {
          throw ParseError(ParseErrorKind::BadParam, tokens[1].span,
                           "sample_time must be positive");
        }
        model.sample_time = st;
        have_sample_time = true;
      } else {
        throw ParseError(ParseErrorKind::Syntax, head.span,
                         "expected 'block', 'wire' or 'sample_time', got '" + head.text + "'");
      }
    }

    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }

  if (!have_header) {
    throw ParseError(ParseErrorKind::Syntax, {1, 1, 1}, "empty input: expected 'model NAME'");
  }
  return model;
}

namespace bdl_detail {

inline void emit_block(std::ostringstream& out, const Block& b) {
  out << "block " << b.id << " " << kind_name(b.kind);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Constant>) {
          out << " value=" << rational_to_string(v.value);
        } else if constexpr (std::is_same_v<T, Gain>) {
          out << " k=" << rational_to_string(v.k);
        } else if constexpr (std::is_same_v<T, Sum>) {
          out << " signs=" << v.signs;
        } else if constexpr (std::is_same_v<T, Product>) {
          out << " arity=" << v.arity;
        } else if constexpr (std::is_same_v<T, UnaryFn>) {
          out << " op=" << unary_op_name(v.op);
        } else if constexpr (std::is_same_v<T, UnitDelay> || std::is_same_v<T, Integrator>) {
          out << " init=" << rational_to_string(v.init);
        }
      },
      b.kind);
  out << "\n";
}

}  // namespace bdl_detail

/// Canonical serialization: blocks sorted by id, wires sorted by
/// (dst id, dst port), LF line endings. parse_bdl(serialize_bdl(m))
/// is structurally equal to m, and the form is a fixed point.
inline std::string serialize_bdl(const Model& m) {
  std::ostringstream out;
  out << "model " << m.name << "\n";
  if (m.sample_time != 1) {
    out << "sample_time " << rational_to_string(m.sample_time) << "\n";
  }

  auto blocks = m.blocks;
  std::sort(blocks.begin(), blocks.end(),
            [](const Block& a, const Block& b) { return a.id < b.id; });
  for (const Block& b : blocks) bdl_detail::emit_block(out, b);

  auto wires = m.wires;
  std::sort(wires.begin(), wires.end(), [](const Wire& a, const Wire& b) {
    return std::tie(a.dst.block, a.dst.port, a.src.block, a.src.port) <
           std::tie(b.dst.block, b.dst.port, b.src.block, b.src.port);
  });
  for (const Wire& w : wires) {
    out << "wire " << w.src.block << "." << w.src.port << " -> " << w.dst.block << "."
        << w.dst.port << "\n";
  }
  return out.str();
}

}  // namespace refcheck
