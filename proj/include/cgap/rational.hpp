#pragma once

#include <boost/rational.hpp>

#include <string>

namespace cgap {

/// Exact arithmetic for closed-form gap identities with rational inputs.
using Rational = boost::rational<long long>;

inline double to_double(const Rational& r) { return boost::rational_cast<double>(r); }

inline std::string to_string(const Rational& r)
{
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

}  // namespace cgap
