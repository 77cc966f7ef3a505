#pragma once

#include <boost/rational.hpp>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace treelen {

// All metric quantities in the library are exact rationals. Equality tests
// throughout the compatibility machinery are exact equalities, never
// tolerance comparisons.
//
// Beware: under C++20's rewritten comparison candidates, boost::rational's
// heterogeneous operator== recurses infinitely. Never write `r == 0`; use
// `r == Rat(0)` or `r.numerator() == 0`. (Ordering comparisons are safe.)
using Rat = boost::rational<long long>;

inline std::string to_string(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Parses "p" or "p/q".
inline Rat parse_rat(const std::string& s) {
  auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rat(std::stoll(s));
    long long num = std::stoll(s.substr(0, slash));
    long long den = std::stoll(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rat(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational literal: '" + s + "'");
  }
}

inline long long rat_ceil(const Rat& r) {
  long long q = r.numerator() / r.denominator();
  if (r.numerator() % r.denominator() != 0 && r.numerator() > 0) ++q;
  return q;
}

}  // namespace treelen
