#pragma once

#include "actmc/poly.hpp"
#include "actmc/rational.hpp"

#include <gmpxx.h>

#include <vector>

namespace actmc {

// Integer polynomial, a[i] is the coefficient of x^i.  Trailing zeros are
// trimmed by the helpers that can create them.
using IntPoly = std::vector<Integer>;

void trim(IntPoly& p);
long degree(const IntPoly& p);
// Primitive integer multiple of p (positive scalar).
IntPoly to_int_poly(const RationalPoly& p);
RationalPoly to_rational_poly(const IntPoly& p);
void remove_content(IntPoly& p);

// p(x) -> p(x + 1) in place.  The parallel version runs the same recurrence
// along anti-diagonals and produces identical coefficients.
void taylor_shift1(IntPoly& p);
void taylor_shift1_serial(IntPoly& p);
// p(x) -> p(x + c)
void taylor_shift(IntPoly& p, const Integer& c);
// p(x) -> 2^(k deg p) p(x / 2^k)
void scale_half(IntPoly& p, unsigned k = 1);
// p(x) -> x^n p(1/x)
void reverse(IntPoly& p);
// Sign changes of the coefficient sequence, zeros skipped.
long sign_variations(const IntPoly& p);
IntPoly derivative(const IntPoly& p);

// Exact sign of p at a rational point.
int sign_at(const IntPoly& p, const Rational& x);
Rational eval(const IntPoly& p, const Rational& x);

// Floating evaluation of p and p' (heuristic use only).
void eval_mpf(const IntPoly& p, const mpf_class& x, mpf_class& v, mpf_class& dv);
// Also sum |p_i| |x|^i, which bounds the rounding error of v.
void eval_mpf(const IntPoly& p, const mpf_class& x, mpf_class& v, mpf_class& dv, mpf_class& mag);

// True when p is provably square-free; false means "unknown".  Checks that
// gcd(p, p') is constant modulo a few word-size primes.
bool square_free_modular(const IntPoly& p);

}  // namespace actmc
