#pragma once

#include "actmc/rational.hpp"

namespace actmc {

struct Bracket {
    Rational lo, hi;
};

// lo <= e^x <= hi and hi - lo <= tol, for x <= 0.
Bracket exp_bracket(const Rational& x, const Rational& tol);

// Fixed-point form: lo <= e^x * 2^prec <= hi with hi - lo <= 8, x <= 0.
void exp_fixed(const Rational& x, long prec, Integer& lo, Integer& hi);

}  // namespace actmc
