#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include <boost/multiprecision/cpp_int.hpp>

namespace robustseg {

/// Exact rational scalar. Used whenever instance data is given as integers or
/// fractions so that the seller's min-argmax tie rule is decided exactly.
using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

/// Thrown for malformed or out-of-range inputs.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an internal post-condition check fails.
class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

/// Relative tolerance for revenue comparisons in floating point.
inline constexpr double kTieTolerance = 1e-12;

template <class T>
double to_double(const T& x) {
  if constexpr (is_exact_v<T>) {
    return x.template convert_to<double>();
  } else {
    return static_cast<double>(x);
  }
}

template <class T>
T from_double(double x) {
  if constexpr (is_exact_v<T>) {
    // cpp_rational converts a finite double exactly.
    return Rational(x);
  } else {
    return static_cast<T>(x);
  }
}

/// `a > b` beyond tie tolerance. Exact for rationals; for floating point the
/// comparison is relative to max(|a|, |b|).
template <class T>
bool strictly_greater(const T& a, const T& b) {
  if constexpr (is_exact_v<T>) {
    return a > b;
  } else {
    const double scale = std::max(std::abs(a), std::abs(b));
    return a - b > kTieTolerance * scale;
  }
}

template <class T>
bool tie_equal(const T& a, const T& b) {
  return !strictly_greater(a, b) && !strictly_greater(b, a);
}

template <class T>
T clamp_nonnegative(const T& x) {
  return x < T(0) ? T(0) : x;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool is_integer_literal(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Base-10 integer; cpp_int's string constructor would read "010" as octal.
inline boost::multiprecision::cpp_int decimal_int(std::string_view s) {
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  boost::multiprecision::cpp_int v(0);
  for (char c : s) v = v * 10 + (c - '0');
  return neg ? boost::multiprecision::cpp_int(-v) : v;
}

inline double parse_double_strict(std::string_view s) {
  std::string buf(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(buf, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + buf + "'");
  }
  if (used != buf.size() || !std::isfinite(v)) throw ValidationError("not a number: '" + buf + "'");
  return v;
}

}  // namespace detail

/// True if the literal is an integer or an integer fraction like "1/3".
inline bool is_exact_literal(std::string_view text) {
  text = detail::trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return detail::is_integer_literal(text);
  return detail::is_integer_literal(detail::trim(text.substr(0, slash))) &&
         detail::is_integer_literal(detail::trim(text.substr(slash + 1)));
}

/// Parses "3", "1/3", "0.25", "1e-3". Rationals accept every form exactly
/// (decimals are read as their exact decimal value); doubles evaluate
/// fractions in floating point.
template <class T>
T parse_number(std::string_view text) {
  text = detail::trim(text);
  if (text.empty()) throw ValidationError("empty number");
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    auto num = detail::trim(text.substr(0, slash));
    auto den = detail::trim(text.substr(slash + 1));
    if (!detail::is_integer_literal(num) || !detail::is_integer_literal(den))
      throw ValidationError("malformed fraction: '" + std::string(text) + "'");
    if (den.find_first_not_of("+-0") == std::string_view::npos)
      throw ValidationError("zero denominator: '" + std::string(text) + "'");
    if constexpr (is_exact_v<T>) {
      return Rational(detail::decimal_int(num), detail::decimal_int(den));
    } else {
      return static_cast<T>(detail::parse_double_strict(num) / detail::parse_double_strict(den));
    }
  }
  if constexpr (is_exact_v<T>) {
    if (detail::is_integer_literal(text)) return Rational(detail::decimal_int(text));
    // Exact decimal: mantissa digits over a power of ten.
    std::string s(text);
    int exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      exp10 = std::stoi(s.substr(e + 1));
      s.erase(e);
    }
    bool neg = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      neg = s[0] == '-';
      s.erase(0, 1);
    }
    if (auto dot = s.find('.'); dot != std::string::npos) {
      exp10 -= static_cast<int>(s.size() - dot - 1);
      s.erase(dot, 1);
    }
    if (!detail::is_integer_literal(s)) throw ValidationError("not a number: '" + std::string(text) + "'");
    boost::multiprecision::cpp_int mant = detail::decimal_int(s);
    if (neg) mant = -mant;
    boost::multiprecision::cpp_int scale = boost::multiprecision::pow(boost::multiprecision::cpp_int(10),
                                                                      static_cast<unsigned>(std::abs(exp10)));
    return exp10 >= 0 ? Rational(mant * scale) : Rational(mant, scale);
  } else {
    return static_cast<T>(detail::parse_double_strict(text));
  }
}

/// Decimal text with `digits` significant digits ("%.*g").
inline std::string format_number(double x, int digits = 12) {
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

template <class T>
std::string format_number(const T& x, int digits = 12) {
  return format_number(to_double(x), digits);
}

}  // namespace robustseg
