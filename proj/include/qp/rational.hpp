#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace qp {

/// Arbitrary-precision rational scalar; always kept in canonical form.
using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

/// Parses "p/q", "p" or a plain decimal such as "-0.125" into an exact
/// rational. Throws Error(ParseError) on malformed text or zero denominator.
Rational parse_rational(std::string_view text);

/// Exact conversion of a finite double (every double is a dyadic rational).
Rational rational_from_double(double value);

std::string to_string(const Rational& value);

/// Nearest double (mpq_get_d alone truncates toward zero).
double to_double(const Rational& value);

std::vector<double> to_doubles(const RationalVector& values);

}  // namespace qp
