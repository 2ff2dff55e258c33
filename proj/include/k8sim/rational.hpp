#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace k8sim {

// All resource arithmetic is exact. Costs, budgets and series values are
// rationals (GMP-backed); doubles appear only at the reporting boundary.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

using Millicores = Rational;
using MegaBytes = Rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

// Accepts "12", "-3", "273.52", ".5" and "7/3". No exponents.
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  if (text.empty()) return std::nullopt;

  auto parse_decimal = [](std::string_view s) -> std::optional<Rational> {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
      negative = s.front() == '-';
      s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;
    BigInt num = 0;
    BigInt den = 1;
    bool seen_point = false;
    bool seen_digit = false;
    for (char c : s) {
      if (c == '.') {
        if (seen_point) return std::nullopt;
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        num = num * 10 + (c - '0');
        if (seen_point) den *= 10;
        seen_digit = true;
      } else {
        return std::nullopt;
      }
    }
    if (!seen_digit) return std::nullopt;
    Rational r(num, den);
    return negative ? Rational(-r) : r;
  };

  auto slash = text.find('/');
  if (slash == std::string_view::npos) return parse_decimal(text);
  auto num = parse_decimal(trim(text.substr(0, slash)));
  auto den = parse_decimal(trim(text.substr(slash + 1)));
  if (!num || !den || *den == 0) return std::nullopt;
  return *num / *den;
}

// Terminating decimals print as decimals ("273.52"), anything else as "p/q".
// parse_rational(to_exact_string(r)) == r for every r.
inline std::string to_exact_string(const Rational& r) {
  BigInt num = boost::multiprecision::numerator(r);
  BigInt den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  BigInt d = den;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return num.str() + "/" + den.str();

  int digits = std::max(twos, fives);
  BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(digits));
  BigInt scaled = num * (scale / den);
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s = scaled.str();
  if (digits > 0) {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, static_cast<std::size_t>(digits) - s.size() + 1, '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  return negative ? "-" + s : s;
}

// Fixed notation with six significant digits: 526 -> "526.000",
// 0.0909091 -> "0.0909091". Zero prints as "0".
inline std::string format_sig6(double x) {
  if (x == 0.0 || !std::isfinite(x)) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    return "0";
  }
  int magnitude = static_cast<int>(std::floor(std::log10(std::fabs(x))));
  int decimals = std::max(0, 5 - magnitude);
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

inline std::string format_sig6(const Rational& r) { return format_sig6(to_double(r)); }

}  // namespace k8sim
