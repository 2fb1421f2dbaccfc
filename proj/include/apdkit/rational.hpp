#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <string>
#include <string_view>

#include "apdkit/errors.hpp"

namespace apdkit {

// Exact arbitrary-precision rational; all probabilities, weights and
// diversity values are carried in this type unless float mode is requested.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

namespace detail {

inline BigInt parse_bigint(std::string_view s) {
  if (s.empty()) throw InputError("empty integer literal");
  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (s.empty()) throw InputError("malformed integer literal");
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw InputError("malformed integer literal '" + std::string(s) + "'");
  // Strip leading zeros: cpp_int would read "0..." as an octal literal.
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  BigInt value{std::string(s)};
  return negative ? -value : value;
}

}  // namespace detail

// Parses "p/q", integer, plain decimal ("0.3" -> 3/10) or scientific
// notation ("2.5e-3"). Decimal conversion is exact, never via binary floats.
inline Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) throw InputError("empty numeric literal");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    BigInt num = detail::parse_bigint(s.substr(0, slash));
    BigInt den = detail::parse_bigint(s.substr(slash + 1));
    if (den == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  bool negative = false;
  if (s.front() == '+' || s.front() == '-') {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }

  long long exponent = 0;
  if (auto epos = s.find_first_of("eE"); epos != std::string_view::npos) {
    std::string_view etail = s.substr(epos + 1);
    if (etail.empty()) throw InputError("malformed exponent in '" + std::string(text) + "'");
    try {
      exponent = std::stoll(std::string(etail));
    } catch (const std::exception&) {
      throw InputError("malformed exponent in '" + std::string(text) + "'");
    }
    s = s.substr(0, epos);
  }

  std::string digits;
  long long frac_digits = 0;
  bool seen_dot = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) throw InputError("malformed number '" + std::string(text) + "'");
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (seen_dot) ++frac_digits;
    } else {
      throw InputError("malformed number '" + std::string(text) + "'");
    }
  }
  if (digits.empty()) throw InputError("malformed number '" + std::string(text) + "'");

  BigInt num = detail::parse_bigint(digits);
  if (negative) num = -num;
  long long net_exp = exponent - frac_digits;
  BigInt scale = 1;
  for (long long i = 0; i < (net_exp < 0 ? -net_exp : net_exp); ++i) scale *= 10;
  return net_exp >= 0 ? Rational(num * scale) : Rational(num, scale);
}

// "p/q" for non-integers, plain digits otherwise. Round-trips exactly.
inline std::string to_fraction_string(const Rational& r) {
  std::string s = numerator(r).str();
  if (denominator(r) != 1) s += "/" + denominator(r).str();
  return s;
}

// Shortest exact decimal representation, or empty if none exists
// (denominator has a prime factor other than 2 and 5).
inline std::string to_exact_decimal(const Rational& r) {
  BigInt den = denominator(r);
  int twos = 0, fives = 0;
  while (den % 2 == 0) { den /= 2; ++twos; }
  while (den % 5 == 0) { den /= 5; ++fives; }
  if (den != 1) return {};
  int shift = twos > fives ? twos : fives;
  BigInt scaled = numerator(r);
  for (int i = 0; i < shift - twos; ++i) scaled *= 2;
  for (int i = 0; i < shift - fives; ++i) scaled *= 5;
  bool neg = scaled < 0;
  if (neg) scaled = -scaled;
  std::string digits = scaled.str();
  if (static_cast<int>(digits.size()) <= shift)
    digits.insert(0, shift + 1 - digits.size(), '0');
  std::string out;
  if (neg) out += '-';
  out += digits.substr(0, digits.size() - shift);
  if (shift > 0) out += "." + digits.substr(digits.size() - shift);
  return out;
}

// Decimal rendering for display: exact when possible, else rounded to
// `precision` digits and marked with '~'.
inline std::string to_decimal_string(const Rational& r, int precision = 12) {
  if (std::string exact = to_exact_decimal(r); !exact.empty() || r == 0)
    return r == 0 ? "0" : exact;
  BigInt scale = 1;
  for (int i = 0; i < precision; ++i) scale *= 10;
  Rational scaled = r * scale;
  BigInt rounded = numerator(scaled) / denominator(scaled);
  std::string s = to_exact_decimal(Rational(rounded, scale));
  return "~" + s;
}

}  // namespace apdkit
