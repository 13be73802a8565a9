#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace actmc {

using Integer = mpz_class;
using Rational = mpq_class;

// n/d in canonical form.
Rational frac(const Integer& n, const Integer& d);

// Parses "7/10", "-3", "1.39", "25e-3" exactly.  Throws std::invalid_argument.
Rational parse_rational(const std::string& text);

// Canonical "p/q" (or "p" for integers).
std::string to_string(const Rational& q);

// Decimal rendering with `digits` significant digits; scientific notation
// for very large or very small magnitudes.
std::string to_decimal(const Rational& q, int digits = 17);

double to_double(const Rational& q);

// Decimal exponent estimate: floor(log10 |q|) (q != 0).
long log10_floor(const Rational& q);

Integer floor(const Rational& q);
Integer ceil(const Rational& q);

// Smallest e with |q| <= 2^e (q != 0).
long ceil_log2(const Rational& q);

// m * 2^e
Rational dyadic(const Integer& m, long e);

Rational pow(const Rational& q, unsigned long e);

Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

// floor(a * n / d) and ceil(a * n / d) for d > 0.
Integer mul_div_floor(const Integer& a, const Integer& n, const Integer& d);
Integer mul_div_ceil(const Integer& a, const Integer& n, const Integer& d);

// Floor / ceil of q * 2^prec.
Integer to_fixed_floor(const Rational& q, long prec);
Integer to_fixed_ceil(const Rational& q, long prec);

// Least common multiple of the denominators.
Integer common_denominator(const std::vector<Rational>& v);

}  // namespace actmc
