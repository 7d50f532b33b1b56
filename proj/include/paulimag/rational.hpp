#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace paulimag {

using Rational = boost::multiprecision::mpq_rational;
using RationalVector = std::vector<Rational>;

/// Parses "p/q", an integer, or a decimal such as "-1.2935" or "2.5e-3".
/// Decimals are converted exactly by scanning digits, never through double.
Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& value);

double to_double(const Rational& value);

/// Exact rational image of a finite double (every double is a dyadic rational).
Rational from_double(double value);

Rational dot(const RationalVector& lhs, const RationalVector& rhs);

Rational sum(const RationalVector& values);

/// Parses a comma separated list of rationals ("7/5,7/5,1").
RationalVector parse_rational_list(std::string_view text);

std::string to_string(const RationalVector& values);

std::vector<double> to_double(const RationalVector& values);

/// Divides by the positive factor that makes all entries coprime integers.
/// Zero vectors are returned unchanged.
RationalVector primitive(const RationalVector& values);

}  // namespace paulimag
