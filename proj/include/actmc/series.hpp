#pragma once

#include "actmc/expbracket.hpp"
#include "actmc/intpoly.hpp"
#include "actmc/model.hpp"

#include <vector>

namespace actmc {

// Upper bound on sum_{i > k} e^{-mu} mu^i / i!.
Rational poisson_tail_bound(const Rational& mu, unsigned long k);

// Smallest k > n_states with weight * tail_k(lambda * tau) <= budget.
unsigned long poisson_truncation_order(const Rational& lambda, const Rational& tau, const Rational& budget,
                                       const Rational& weight, size_t n_states);

// Fixed-point brackets lo[m] <= e^{-z} z^m / m! * 2^prec <= hi[m], m = 0..k.
void poisson_weights(const Rational& z, size_t k, long prec, std::vector<Integer>& lo, std::vector<Integer>& hi);

// Transient data of the chain observed while an alarm is running.  States
// outside the enabling set are absorbing and carry no costs.
struct SubChain {
    struct Entry {
        size_t to;
        Integer num, den;
    };
    size_t n = 0;
    std::vector<bool> inner;               // s in S_a
    std::vector<std::vector<Entry>> step;  // rows of P restricted to S_a
    std::vector<std::vector<Entry>> fire;  // rows of P_a restricted to S_a
    std::vector<Rational> rate, delay_imp, alarm_imp;
    size_t nnz = 0;  // max(#step entries, #fire entries)
    Rational lambda;

    SubChain(const Model& m, size_t alarm);
    // x -> x P̄ with floor rounding (error < nnz ulps in L1).
    void advance(std::vector<Integer>& x) const;
};

// Coefficients of Pi, Theta and C in the Poisson basis:
//   Q(d) = sum_m e^{-lambda d} (lambda d)^m / m! * b_m,
// stored as integers at scale 2^-prec.
struct PoissonSeries {
    Rational lambda;
    long prec = 0;
    size_t order = 0;  // coefficients m = 0..order
    std::vector<size_t> support;
    std::vector<std::vector<Integer>> y;  // y[m][i]: Pi coefficient of support[i]
    std::vector<Integer> theta, cost;
    std::vector<Integer> alarm_cost;  // the alarm-impulse part of cost
    Integer coef_err;  // ulps, bounds the error of every coefficient
    Rational tail;     // bound on the omitted terms, for every quantity

    // Coefficient error in ulps for a start vector with L1 error x0_err.
    static Integer error_bound(const SubChain& c, size_t order, const Integer& x0_err);
    // x0 at scale 2^-prec with L1 error x0_err ulps, total mass <= 1.
    static PoissonSeries build(const SubChain& c, std::vector<Integer> x0, const Integer& x0_err, long prec,
                               size_t order, const std::vector<size_t>& support, const Rational& tail);
};

struct SeriesValue {
    std::vector<Bracket> pi;
    Bracket theta, cost;
};

// Certified brackets (tail included) of all quantities at parameter d.
SeriesValue evaluate(const PoissonSeries& s, const Rational& d);

// Certified bracket of sum_m c[m] 2^-scale e^{-z} z^m / m!.
Bracket poisson_value(const std::vector<Integer>& c, long scale, const Rational& z);

// Certified sign of sum_m c[m] e^{-z} z^m / m!; exact fallback when the
// brackets cannot decide.
int poisson_sign(const std::vector<Integer>& c, const Rational& z);

// W(z) = sum_m c[m] z^m / m! scaled by (len-1)! to integers.
IntPoly poisson_to_monomial(const std::vector<Integer>& c);

// Bit length helper.
long bit_length(const Integer& x);

}  // namespace actmc
