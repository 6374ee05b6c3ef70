#pragma once

#include <cstdint>
#include <string>
#include <type_traits>

#include <boost/rational.hpp>

namespace psim {

/// Exact time/happiness arithmetic for the proposition scenarios.
using Rational = boost::rational<std::int64_t>;

template <class Num>
inline constexpr bool is_exact_v = std::is_same_v<Num, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return boost::rational_cast<double>(x); }

/// Slack used for "a < b" sanity checks. Zero for exact arithmetic.
template <class Num>
Num comparison_epsilon() {
  if constexpr (is_exact_v<Num>) {
    return Num(0);
  } else {
    return Num(1e-9);
  }
}

template <class Num>
Num abs_value(const Num& x) {
  return x < Num(0) ? -x : x;
}

/// Parses "7", "-3/4" or "1.25" into an exact rational. Throws std::invalid_argument.
Rational parse_rational(const std::string& text);

std::string to_string(const Rational& x);

}  // namespace psim
