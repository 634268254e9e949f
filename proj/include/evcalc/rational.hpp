#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "evcalc/errors.hpp"

namespace evcalc {

using Int = boost::multiprecision::cpp_int;

/// Exact rational, kept in lowest terms with a positive denominator.
/// Every probability, mass and belief value in this library is a Rat;
/// nothing in the library ever rounds.
using Rat = boost::multiprecision::cpp_rational;

inline bool is_probability(const Rat& r) { return r >= 0 && r <= 1; }

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

inline Int int_from_digits(std::string_view s) {
  return Int(std::string(s));
}

}  // namespace detail

/// Parses "p", "p/q" or a terminating decimal such as "0.25", all exactly.
/// A leading '-' is accepted. Exponents and anything float-shaped beyond a
/// plain decimal point are rejected.
inline Rat parse_rational(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  auto fail = [&]() -> Rat {
    throw ParseError("not a rational: '" + std::string(text) + "'");
  };
  if (s.empty()) return fail();

  Rat value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    std::string_view num = s.substr(0, slash);
    std::string_view den = s.substr(slash + 1);
    if (!detail::all_digits(num) || !detail::all_digits(den)) return fail();
    Int d = detail::int_from_digits(den);
    if (d == 0) throw ParseError("zero denominator: '" + std::string(text) + "'");
    value = Rat(detail::int_from_digits(num), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if (!detail::all_digits(whole) || !detail::all_digits(frac)) return fail();
    Int scale = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
    value = Rat(detail::int_from_digits(whole) * scale + detail::int_from_digits(frac), scale);
  } else {
    if (!detail::all_digits(s)) return fail();
    value = Rat(detail::int_from_digits(s));
  }
  if (negative) value = -value;
  return value;
}

/// "p/q", or just "p" when the denominator is 1.
inline std::string fraction_string(const Rat& r) {
  std::string out = numerator(r).str();
  if (denominator(r) != 1) {
    out += '/';
    out += denominator(r).str();
  }
  return out;
}

/// Decimal approximation with `digits` places, rounded half away from zero.
/// Reporting only; never feeds back into any computation.
inline std::string decimal_string(const Rat& r, unsigned digits) {
  const bool negative = r < 0;
  const Rat a = negative ? Rat(-r) : r;
  Int scale = 1;
  for (unsigned i = 0; i < digits; ++i) scale *= 10;
  // round(a * scale) with ties away from zero
  const Int scaled = (numerator(a) * scale * 2 + denominator(a)) / (denominator(a) * 2);
  std::string s = scaled.str();
  std::string out;
  if (digits == 0) {
    out = s;
  } else {
    if (s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
    out = s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
  }
  if (negative && scaled != 0) out.insert(out.begin(), '-');
  return out;
}

}  // namespace evcalc
