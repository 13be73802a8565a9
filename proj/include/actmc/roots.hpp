#pragma once

#include "actmc/intpoly.hpp"
#include "actmc/poly.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace actmc {

struct IdenticallyZero : std::domain_error {
    IdenticallyZero() : std::domain_error("identically zero") {}
};

// One approximation per distinct real root of p in [lo, hi], ascending,
// each within `precision`.  Roots at lo or hi are reported exactly.
std::vector<Rational> isolate_roots(const RationalPoly& p, const Rational& lo, const Rational& hi,
                                    const Rational& precision);

// Number of distinct real roots in [lo, hi] (Sturm sequence).
long sturm_count(const RationalPoly& p, const Rational& lo, const Rational& hi);

// Certified sign of the target function at a point; it must agree with the
// sign of the isolated polynomial on the search interval.
using SignOracle = std::function<int(const Rational&)>;

struct IsolatingInterval {
    Rational a, b;
    bool exact = false;  // a == b is a root
};

// Descartes/VCA isolation of the real roots of a square-free p in [lo, hi].
std::vector<IsolatingInterval> isolate_intervals(const IntPoly& p, const Rational& lo, const Rational& hi);

// Narrows an interval holding exactly one simple root until the returned
// value is within `precision`.  sa, sb are the signs just inside a and b.
// Safeguarded Newton steps on p (floating) choose the probe points; every
// decision is made by `sign`.
Rational refine_root(const IntPoly& p, Rational a, Rational b, int sa, int sb, const Rational& precision,
                     const SignOracle& sign);

// Square-free isolation + refinement of an integer polynomial.  With no
// oracle, exact rational evaluation is used.
std::vector<Rational> isolate_roots(const IntPoly& p, const Rational& lo, const Rational& hi,
                                    const Rational& precision, const SignOracle& sign = nullptr);

// Square-free part of an integer polynomial (primitive).
IntPoly square_free(const IntPoly& p);

}  // namespace actmc
