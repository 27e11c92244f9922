#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace refcheck {

/// Exact rational number; all symbolic arithmetic in the library is done in
/// this type so that syntactic comparison of equations is sound.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Rational -> nearest double. Single-rounding fast path when numerator and
/// denominator are exactly representable.
inline double to_double(const Rational& q) {
  const BigInt num = numerator(q);
  const BigInt den = denominator(q);
  static const BigInt limit = BigInt(1) << 53;
  if (abs(num) < limit && den < limit) {
    return num.convert_to<double>() / den.convert_to<double>();
  }
  return q.convert_to<double>();
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

}  // namespace detail

/// Parses a decimal literal (sign, digits, optional fraction, optional
/// base-10 exponent) or a "p/q" ratio into an exact Rational.
/// Returns nullopt on malformed input; never rounds.
inline std::optional<Rational> parse_rational(std::string_view text) {
  if (text.empty()) return std::nullopt;

  // "p/q" ratio form.
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view ns = text.substr(0, slash);
    std::string_view ds = text.substr(slash + 1);
    bool neg = false;
    if (!ns.empty() && (ns[0] == '+' || ns[0] == '-')) {
      neg = ns[0] == '-';
      ns.remove_prefix(1);
    }
    if (!detail::all_digits(ns) || !detail::all_digits(ds)) return std::nullopt;
    BigInt num(std::string(ns));
    BigInt den(std::string(ds));
    if (den == 0) return std::nullopt;
    Rational q(num, den);
    return neg ? Rational(-q) : q;
  }

  std::size_t i = 0;
  bool neg = false;
  if (text[i] == '+' || text[i] == '-') {
    neg = text[i] == '-';
    ++i;
  }
  std::string int_digits, frac_digits;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') int_digits += text[i++];
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') frac_digits += text[i++];
  }
  if (int_digits.empty() && frac_digits.empty()) return std::nullopt;

  long long exp10 = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
      eneg = text[i] == '-';
      ++i;
    }
    std::string edigits;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') edigits += text[i++];
    if (edigits.empty() || edigits.size() > 6) return std::nullopt;
    exp10 = std::stoll(edigits);
    if (eneg) exp10 = -exp10;
  }
  if (i != text.size()) return std::nullopt;

  BigInt mantissa(int_digits.empty() ? "0" : int_digits);
  for (char c : frac_digits) {
    mantissa *= 10;
    mantissa += c - '0';
  }
  long long scale = exp10 - static_cast<long long>(frac_digits.size());
  Rational q(mantissa);
  if (scale > 0) {
    q *= Rational(pow(BigInt(10), static_cast<unsigned>(scale)));
  } else if (scale < 0) {
    q /= Rational(pow(BigInt(10), static_cast<unsigned>(-scale)));
  }
  if (neg) q = -q;
  return q;
}

/// Canonical text form: exact decimal when the reduced denominator is
/// 2^a*5^b (e.g. "0.1", "-3.25", "2"), otherwise "p/q".
inline std::string rational_to_string(const Rational& q) {
  BigInt num = numerator(q);
  BigInt den = denominator(q);
  if (den == 1) return num.str();

  unsigned twos = 0, fives = 0;
  BigInt rest = den;
  while (rest % 2 == 0) {
    rest /= 2;
    ++twos;
  }
  while (rest % 5 == 0) {
    rest /= 5;
    ++fives;
  }
  if (rest != 1) return num.str() + "/" + den.str();

  unsigned shift = std::max(twos, fives);
  BigInt scaled = num * pow(BigInt(10), shift) / den;
  bool neg = scaled < 0;
  std::string digits = abs(scaled).str();
  if (digits.size() <= shift) digits.insert(0, shift + 1 - digits.size(), '0');
  digits.insert(digits.size() - shift, ".");
  return neg ? "-" + digits : digits;
}

}  // namespace refcheck
