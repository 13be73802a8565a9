#pragma once

#include "actmc/model.hpp"
#include "actmc/poly.hpp"

#include <map>
#include <string>
#include <vector>

namespace actmc {

struct AssumptionABounds {
    Rational pi_min, theta_min, theta_max, c_max;
    Rational p_min, r_max, i_max;
    // Weibull only: [window_lo, window_hi] carries probability at least `mass`
    Rational window_lo, window_hi, mass;
};

struct GlobalBounds {
    Rational q_min, t_min, t_max, r_max, w_max;
    size_t n = 0;
};

struct SynthesisPlan {
    Rational epsilon, kappa, xi;
    Rational kernel_accuracy;        // point and symbolic kernels are built to this
    std::map<size_t, Rational> delta;  // setting state -> grid step
    std::map<size_t, AssumptionABounds> bounds;
    GlobalBounds globals;
    std::vector<std::pair<std::string, std::string>> provenance;
};

// Bounds for a setting state (family of its alarm) or an off state.
AssumptionABounds assumption_a_bounds(const Model& m, size_t s);

// Largest perturbation of numerator and denominator keeping a/b within phi.
Rational fraction_threshold(const Rational& a_bar, const Rational& b_bar, const Rational& b_under,
                            const Rational& phi);

GlobalBounds global_bounds(const Model& m);

Rational kappa_for_epsilon(const GlobalBounds& g, const Rational& epsilon);

Rational delta_for_kappa(const Model& m, size_t s, const Rational& kappa);

// kappa / bound
Rational delta_from_derivative_bound(const Rational& bound, const Rational& kappa);

// Certified upper bound on |p'| over [lo, hi].
Rational derivative_bound(const RationalPoly& p, const Rational& lo, const Rational& hi);

SynthesisPlan plan(const Model& m, const Rational& epsilon);

// Largest power of two <= x (x > 0).
Rational floor_pow2(const Rational& x);

// Dyadic lower bound on e^x for x <= 0, about 64 bits of relative precision.
Rational exp_lower(const Rational& x);

}  // namespace actmc
