#include "actmc/bounds.hpp"

#include "actmc/expbracket.hpp"
#include "actmc/intpoly.hpp"
#include "actmc/kernels.hpp"
#include "actmc/roots.hpp"

#include <stdexcept>

namespace actmc {

Rational floor_pow2(const Rational& x) {
    if (x <= 0) throw std::invalid_argument("floor_pow2: nonpositive argument");
    long e = ceil_log2(x);
    Rational p = dyadic(1, e);
    return p == x ? p : dyadic(1, e - 1);
}

Rational exp_lower(const Rational& x) {
    if (x > 0) throw std::invalid_argument("exp_lower: positive exponent");
    long prec = 64 + static_cast<long>(mpz_get_si(ceil(-x * Rational(14427, 10000)).get_mpz_t()));
    Integer lo, hi;
    exp_fixed(x, prec, lo, hi);
    if (lo < 0) lo = 0;
    return dyadic(lo, -prec);
}

namespace {

// (P_min)^n * min{ e^{-lambda d} (lambda d)^j / j! : j <= n, d in {lo, hi} }
Rational dirac_pi_min(const Model& m, const Rational& lo, const Rational& hi) {
    size_t n = m.size();
    Rational best = -1;
    for (const Rational& d : {lo, hi}) {
        Rational z = m.lambda * d;
        Rational t = exp_lower(-z);
        for (size_t j = 0; j <= n; ++j) {
            if (j > 0) t = t * z / static_cast<unsigned long>(j);
            if (best < 0 || t < best) best = t;
        }
    }
    return pow(m.p_min(), static_cast<unsigned>(n)) * best;
}

Rational dirac_c_max(const Model& m, const Rational& tau) {
    return m.r_max() * tau + m.i_max() * (m.lambda * tau + 1);
}

}  // namespace

AssumptionABounds assumption_a_bounds(const Model& m, size_t s) {
    AssumptionABounds b;
    b.p_min = m.p_min();
    b.r_max = m.r_max();
    b.i_max = m.i_max();
    const Rational& lam = m.lambda;
    auto owner = m.alarm_at(s);
    if (!owner) {
        b.pi_min = b.p_min;
        b.theta_min = b.theta_max = 1 / lam;
        b.c_max = m.rate_cost[s] / lam + m.expected_delay_impulse(s);
        return b;
    }
    const Alarm& a = m.alarms[*owner];
    const Rational &l = a.lower, &u = a.upper;
    switch (a.family.kind) {
        case FamilyKind::Dirac:
            b.pi_min = dirac_pi_min(m, l, u);
            b.theta_min = (1 - exp_bracket(-lam * l, dyadic(1, -64)).hi) / lam;
            b.theta_max = u;
            b.c_max = dirac_c_max(m, u);
            break;
        case FamilyKind::UniformZero:
            // at least half of the mass lies in [l/2, u]
            b.pi_min = dirac_pi_min(m, l / 2, u) / 2;
            b.theta_min = (1 - exp_bracket(-lam * l / 2, dyadic(1, -64)).hi) / (2 * lam);
            b.theta_max = u;
            b.c_max = dirac_c_max(m, u);
            break;
        case FamilyKind::UniformShift: {
            Rational top = u + a.family.width;
            b.pi_min = dirac_pi_min(m, l, top);
            b.theta_min = (1 - exp_bracket(-lam * l, dyadic(1, -64)).hi) / lam;
            b.theta_max = top;
            b.c_max = dirac_c_max(m, top);
            break;
        }
        case FamilyKind::Exponential:
        case FamilyKind::Weibull: {
            unsigned k = a.family.kind == FamilyKind::Exponential ? 1 : a.family.shape;
            WeibullCutoff cut = weibull_cutoff(k, l, u, lam, b.r_max, b.i_max, frac(1, 4));
            Rational hi = cut.m, c_hi = dirac_c_max(m, hi);
            Rational big = max(Rational(1), max(hi, c_hi));
            // P(T < lo) <= (lo u)^k <= 1 / (4 big)
            Rational lo = floor_pow2(1 / u);
            while (pow(lo * u, k) * 4 * big > 1) lo /= 2;
            b.window_lo = lo;
            b.window_hi = hi;
            b.mass = 1 - pow(lo * u, k) - cut.tail_prob;
            b.pi_min = b.mass * dirac_pi_min(m, lo, hi);
            b.theta_min = b.mass * (1 - exp_bracket(-lam * lo, dyadic(1, -64)).hi) / lam;
            b.theta_max = hi + frac(1, 2);
            b.c_max = c_hi + frac(1, 2);
            break;
        }
    }
    return b;
}

Rational fraction_threshold(const Rational& a_bar, const Rational& b_bar, const Rational& b_under,
                            const Rational& phi) {
    if (a_bar <= 0 || b_bar <= 0 || b_under <= 0 || phi <= 0)
        throw std::invalid_argument("fraction_threshold: arguments must be positive");
    return b_under * b_under * phi / (a_bar + b_bar + b_bar * phi);
}

GlobalBounds global_bounds(const Model& m) {
    StateClassification c = classify(m);
    GlobalBounds g;
    g.n = c.regen.size();
    bool first = true;
    for (size_t s : c.regen) {
        AssumptionABounds b = assumption_a_bounds(m, s);
        if (first) {
            g.q_min = b.pi_min;
            g.t_min = b.theta_min;
            g.t_max = b.theta_max;
            g.r_max = b.c_max;
            first = false;
        } else {
            g.q_min = min(g.q_min, b.pi_min);
            g.t_min = min(g.t_min, b.theta_min);
            g.t_max = max(g.t_max, b.theta_max);
            g.r_max = max(g.r_max, b.c_max);
        }
    }
    if (g.r_max == 0) g.r_max = 1;
    g.w_max = max(g.r_max, g.t_max);
    return g;
}

Rational kappa_for_epsilon(const GlobalBounds& g, const Rational& epsilon) {
    if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
    Rational n = static_cast<long>(g.n);
    Rational en = epsilon / n;
    Rational grow = pow(2 / g.q_min, static_cast<unsigned>(g.n));
    Rational half_t = g.t_min / 2;
    Rational first = half_t * half_t * en / (2 * g.w_max * grow * (2 + en) * (1 + 2 * n * g.w_max * grow));
    return min(min(first, g.q_min / 2), min(g.t_min / 2, g.r_max / 2));
}

Rational delta_from_derivative_bound(const Rational& bound, const Rational& kappa) {
    if (bound <= 0) throw std::invalid_argument("derivative bound must be positive");
    return kappa / bound;
}

namespace {

// Bound on |q| over [c - 2^{1-e}, c + 2^{1-e}] from the Taylor expansion of q
// at the dyadic cn / 2^e, in exact integers.
Rational local_sup(const RationalPoly& q, const Integer& cn, long e) {
    Integer den = common_denominator(q.coeffs());
    size_t n = static_cast<size_t>(q.degree());
    IntPoly b(n + 1);
    for (size_t i = 0; i <= n; ++i) {
        Rational a = q.coeff(i) * den;
        b[i] = a.get_num() << static_cast<mp_bitcnt_t>(e * static_cast<long>(n - i));
    }
    taylor_shift(b, cn);
    Integer sum = 0;
    for (size_t j = 0; j <= n; ++j) sum += abs(b[j]) << static_cast<mp_bitcnt_t>(j);
    return Rational(sum) / (Rational(den) * dyadic(1, e * static_cast<long>(n)));
}

}  // namespace

Rational derivative_bound(const RationalPoly& p, const Rational& lo, const Rational& hi) {
    RationalPoly d1 = p.derivative(), d2 = d1.derivative();
    Rational best = max(abs(d1(lo)), abs(d1(hi)));
    if (d2.is_zero() || lo == hi) return best;
    // |p'| peaks at the ends or at roots of p''
    long e = 40 - ceil_log2(hi - lo);
    for (const auto& c : isolate_roots(d2, lo, hi, dyadic(1, -e))) {
        Integer cn = floor(c * dyadic(1, e) + frac(1, 2));
        best = max(best, local_sup(d1, cn, e));
    }
    return best;
}

Rational delta_for_kappa(const Model& m, size_t s, const Rational& kappa) {
    auto owner = m.alarm_at(s);
    if (!owner) throw std::invalid_argument("delta_for_kappa: '" + m.states[s] + "' is not a setting state");
    const Alarm& a = m.alarms[*owner];
    const Rational &l = a.lower, &u = a.upper, &lam = m.lambda;
    Rational r = m.r_max(), i = m.i_max();
    switch (a.family.kind) {
        case FamilyKind::Dirac: {
            Rational slope = r + 2 * lam * i;
            return slope > 0 ? min(kappa, kappa / slope) : kappa;
        }
        case FamilyKind::UniformZero: {
            Rational best = min(kappa * l / u, kappa * l);
            Rational c = dirac_c_max(m, u);
            return c > 0 ? min(best, kappa * l / c) : best;
        }
        case FamilyKind::UniformShift: {
            const Rational& w = a.family.width;
            Rational top = u + w;
            return kappa * w / max(Rational(1), max(top, dirac_c_max(m, top)));
        }
        case FamilyKind::Exponential:
        case FamilyKind::Weibull: {
            // the polynomial is within kappa/4 of the kernel, so a change of
            // kappa/2 in the polynomial keeps the kernel within kappa
            AnalyticKernel k = build_kernel(m, s, kappa / 4)->analytic();
            Rational bound = derivative_bound(k.theta.poly(), l, u);
            bound = max(bound, derivative_bound(k.cost.poly(), l, u));
            for (const auto& [t, p] : k.pi) bound = max(bound, derivative_bound(p.poly(), l, u));
            if (bound == 0) return u > l ? u - l : Rational(1);
            return delta_from_derivative_bound(bound, kappa / 2);
        }
    }
    throw std::logic_error("unknown family");
}

SynthesisPlan plan(const Model& m, const Rational& epsilon) {
    StateClassification c = classify(m);
    SynthesisPlan p;
    p.epsilon = epsilon;
    for (size_t s : c.regen) p.bounds[s] = assumption_a_bounds(m, s);
    p.globals = global_bounds(m);
    Rational k = kappa_for_epsilon(p.globals, epsilon);
    p.kappa = floor_pow2(k / 2);
    p.provenance.emplace_back("kappa", "kappa_for_epsilon halved for the two-kappa budget, rounded down to a power of two");
    Rational xi = p.kappa / 4;
    for (size_t s : c.setting) {
        p.delta[s] = floor_pow2(delta_for_kappa(m, s, p.kappa));
        xi = min(xi, p.bounds[s].pi_min / 3);
    }
    p.provenance.emplace_back("delta", "per-family discretization bound at kappa, rounded down to a power of two");
    p.xi = xi;
    p.provenance.emplace_back("xi", "min{kappa/4, Pi_min(s)/3 over setting states}");
    p.kernel_accuracy = floor_pow2(xi / 2);
    p.provenance.emplace_back("kernel_accuracy", "xi/2 rounded down to a power of two; the other half absorbs rounding of g and h");
    return p;
}

}  // namespace actmc
