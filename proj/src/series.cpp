#include "actmc/series.hpp"

#include <algorithm>
#include <stdexcept>

namespace actmc {

long bit_length(const Integer& x) {
    if (x == 0) return 0;
    return static_cast<long>(mpz_sizeinbase(x.get_mpz_t(), 2));
}

namespace {

const Rational kLog2e(14427, 10000);  // > log2(e)

// Dyadic upper bound of q > 0 with about `bits` significant bits.
Rational round_up(const Rational& q, long bits) {
    long e = ceil_log2(q);
    long shift = bits - e;
    return dyadic(ceil(dyadic(1, shift) * q), -shift);
}

Rational exp_neg_upper(const Rational& mu) {
    long prec = static_cast<long>(mpz_get_si(ceil(mu * kLog2e).get_mpz_t())) + 64;
    Integer lo, hi;
    exp_fixed(-mu, prec, lo, hi);
    return dyadic(hi, -prec);
}

}  // namespace

Rational poisson_tail_bound(const Rational& mu, unsigned long k) {
    if (mu <= 0) return 0;
    if (Rational(static_cast<long>(k) + 2) <= mu) return 1;
    Rational t = round_up(mu, 128);  // mu^{i+1} / (i+1)!
    for (unsigned long i = 1; i <= k; ++i) t = round_up(t * mu / (i + 1), 128);
    Rational b = exp_neg_upper(mu) * t / (1 - mu / (k + 2));
    return min(b, Rational(1));
}

unsigned long poisson_truncation_order(const Rational& lambda, const Rational& tau, const Rational& budget,
                                       const Rational& weight, size_t n_states) {
    if (!(lambda > 0) || !(tau > 0)) throw std::invalid_argument("poisson_truncation_order: lambda, tau must be positive");
    if (!(budget > 0)) throw std::invalid_argument("poisson_truncation_order: budget must be positive");
    Rational mu = lambda * tau;
    Rational e = exp_neg_upper(mu);
    Rational t = round_up(mu, 128);
    for (unsigned long k = 0;; ++k) {
        if (k > 0) t = round_up(t * mu / (k + 1), 128);
        if (k <= n_states) continue;
        if (Rational(static_cast<long>(k) + 2) <= mu) continue;
        Rational b = e * t / (1 - mu / (k + 2));
        if (weight * b <= budget) return k;
    }
}

void poisson_weights(const Rational& z, size_t k, long prec, std::vector<Integer>& lo, std::vector<Integer>& hi) {
    lo.assign(k + 1, 0);
    hi.assign(k + 1, 0);
    exp_fixed(-z, prec, lo[0], hi[0]);
    const Integer& zn = z.get_num();
    const Integer& zd = z.get_den();
    Integer den;
    for (size_t m = 1; m <= k; ++m) {
        // beyond the mode the weights fall by at least half per step
        if (Rational(static_cast<long>(m)) >= 2 * z && hi[m - 1] <= 1) {
            for (size_t j = m; j <= k; ++j) hi[j] = 1;
            return;
        }
        den = zd * static_cast<unsigned long>(m);
        mpz_mul(lo[m].get_mpz_t(), lo[m - 1].get_mpz_t(), zn.get_mpz_t());
        mpz_fdiv_q(lo[m].get_mpz_t(), lo[m].get_mpz_t(), den.get_mpz_t());
        mpz_mul(hi[m].get_mpz_t(), hi[m - 1].get_mpz_t(), zn.get_mpz_t());
        mpz_cdiv_q(hi[m].get_mpz_t(), hi[m].get_mpz_t(), den.get_mpz_t());
    }
}

SubChain::SubChain(const Model& m, size_t alarm) : n(m.size()), lambda(m.lambda) {
    const Alarm& a = m.alarms[alarm];
    inner.assign(n, false);
    for (size_t s : a.enabled) inner[s] = true;
    step.resize(n);
    fire.resize(n);
    rate.assign(n, 0);
    delay_imp.assign(n, 0);
    alarm_imp.assign(n, 0);
    size_t ns = 0, nf = 0;
    for (size_t s = 0; s < n; ++s) {
        if (!inner[s]) continue;
        for (const auto& tr : m.delay[s])
            if (tr.prob > 0) step[s].push_back({tr.to, tr.prob.get_num(), tr.prob.get_den()});
        if (a.rows[s].empty()) {
            fire[s].push_back({s, 1, 1});
        } else {
            for (const auto& tr : a.rows[s])
                if (tr.prob > 0) fire[s].push_back({tr.to, tr.prob.get_num(), tr.prob.get_den()});
        }
        ns += step[s].size();
        nf += fire[s].size();
        rate[s] = m.rate_cost[s];
        delay_imp[s] = m.expected_delay_impulse(s);
        alarm_imp[s] = m.expected_alarm_impulse(s);
    }
    nnz = std::max(ns, nf);
}

namespace {

void add_product_floor(Integer& acc, const Integer& x, const Integer& num, const Integer& den, Integer& tmp) {
    if (den == 1) {
        mpz_addmul(acc.get_mpz_t(), x.get_mpz_t(), num.get_mpz_t());
        return;
    }
    mpz_mul(tmp.get_mpz_t(), x.get_mpz_t(), num.get_mpz_t());
    mpz_fdiv_q(tmp.get_mpz_t(), tmp.get_mpz_t(), den.get_mpz_t());
    acc += tmp;
}

void add_product_floor(Integer& acc, const Integer& x, const Rational& q, Integer& tmp) {
    if (q == 0) return;
    add_product_floor(acc, x, q.get_num(), q.get_den(), tmp);
}

}  // namespace

void SubChain::advance(std::vector<Integer>& x) const {
    std::vector<Integer> y(n);
    Integer tmp;
    for (size_t r = 0; r < n; ++r) {
        if (x[r] == 0) continue;
        if (!inner[r]) {
            y[r] += x[r];
            continue;
        }
        for (const auto& e : step[r]) add_product_floor(y[e.to], x[r], e.num, e.den, tmp);
    }
    x.swap(y);
}

Integer PoissonSeries::error_bound(const SubChain& c, size_t order, const Integer& x0_err) {
    Rational r_max = 0, i_delay = 0, i_alarm = 0;
    size_t n_inner = 0;
    for (size_t r = 0; r < c.n; ++r) {
        if (!c.inner[r]) continue;
        ++n_inner;
        r_max = max(r_max, c.rate[r]);
        i_delay = max(i_delay, c.delay_imp[r]);
        i_alarm = max(i_alarm, c.alarm_imp[r]);
    }
    Rational k1 = static_cast<long>(order + 1);
    Rational e = Rational(x0_err) + Rational(static_cast<long>(order * c.nnz));
    Rational na = static_cast<long>(n_inner);
    Rational b1 = e + static_cast<long>(c.nnz);
    Rational b2 = k1 * e / c.lambda + 1;
    Rational b3 = k1 * (r_max * e + na) / c.lambda + 1 + k1 * (i_delay * e + na) + i_alarm * e + na;
    return ceil(max(b1, max(b2, b3)));
}

PoissonSeries PoissonSeries::build(const SubChain& c, std::vector<Integer> x, const Integer& x0_err, long prec,
                                   size_t order, const std::vector<size_t>& support, const Rational& tail) {
    PoissonSeries s;
    s.lambda = c.lambda;
    s.prec = prec;
    s.order = order;
    s.support = support;
    s.tail = tail;
    s.y.assign(order + 1, std::vector<Integer>(support.size()));
    s.theta.assign(order + 1, 0);
    s.cost.assign(order + 1, 0);
    s.alarm_cost.assign(order + 1, 0);
    std::vector<long> slot(c.n, -1);
    for (size_t i = 0; i < support.size(); ++i) slot[support[i]] = static_cast<long>(i);

    const Integer& ln = c.lambda.get_num();
    const Integer& ld = c.lambda.get_den();
    Integer t_sum = 0, rr_sum = 0, ii_sum = 0, tmp, q;
    std::vector<Integer> f(c.n);
    for (size_t m = 0; m <= order; ++m) {
        // alarm transition out of x_m
        for (auto& v : f) v = 0;
        Integer ia = 0, mass = 0, rr = 0, ii = 0;
        for (size_t r = 0; r < c.n; ++r) {
            if (x[r] == 0) continue;
            if (!c.inner[r]) {
                f[r] += x[r];
                continue;
            }
            for (const auto& e : c.fire[r]) add_product_floor(f[e.to], x[r], e.num, e.den, tmp);
            mass += x[r];
            add_product_floor(rr, x[r], c.rate[r], tmp);
            add_product_floor(ii, x[r], c.delay_imp[r], tmp);
            add_product_floor(ia, x[r], c.alarm_imp[r], tmp);
        }
        for (size_t t = 0; t < c.n; ++t) {
            if (f[t] == 0) continue;
            if (slot[t] < 0) throw std::logic_error("PoissonSeries: mass outside the structural support");
            s.y[m][static_cast<size_t>(slot[t])] = f[t];
        }
        // b^Theta_m = T_{m-1} / lambda, b^C_m = RR_{m-1} / lambda + II_m + IA_m
        mpz_mul(q.get_mpz_t(), t_sum.get_mpz_t(), ld.get_mpz_t());
        mpz_fdiv_q(s.theta[m].get_mpz_t(), q.get_mpz_t(), ln.get_mpz_t());
        mpz_mul(q.get_mpz_t(), rr_sum.get_mpz_t(), ld.get_mpz_t());
        mpz_fdiv_q(q.get_mpz_t(), q.get_mpz_t(), ln.get_mpz_t());
        s.cost[m] = q + ii_sum + ia;
        s.alarm_cost[m] = ia;
        t_sum += mass;
        rr_sum += rr;
        ii_sum += ii;
        if (m < order) c.advance(x);
    }

    s.coef_err = error_bound(c, order, x0_err);
    return s;
}

namespace {

// sum_m w[m] * max(c[m] - err, 0) and sum_m w[m] * (c[m] + err)
void bracket_dot(const std::vector<Integer>& wl, const std::vector<Integer>& wh, const std::vector<Integer>& c,
                 const Integer& err, Integer& lo, Integer& hi) {
    lo = 0;
    hi = 0;
    Integer t;
    for (size_t m = 0; m < c.size(); ++m) {
        t = c[m] - err;
        if (t > 0 && wl[m] != 0) mpz_addmul(lo.get_mpz_t(), wl[m].get_mpz_t(), t.get_mpz_t());
        t = c[m] + err;
        mpz_addmul(hi.get_mpz_t(), wh[m].get_mpz_t(), t.get_mpz_t());
    }
}

long guard_bits(const Rational& z) { return static_cast<long>(mpz_get_si(ceil(z * kLog2e).get_mpz_t())); }

}  // namespace

SeriesValue evaluate(const PoissonSeries& s, const Rational& d) {
    Rational z = s.lambda * d;
    size_t k = s.order;
    long wprec = s.prec + 2 * bit_length(Integer(static_cast<unsigned long>(k + 1))) + 16;
    long g = guard_bits(z) + 8;
    std::vector<Integer> wl, wh;
    poisson_weights(z, k, wprec + g, wl, wh);
    for (size_t m = 0; m <= k; ++m) {
        mpz_fdiv_q_2exp(wl[m].get_mpz_t(), wl[m].get_mpz_t(), static_cast<mp_bitcnt_t>(g));
        mpz_cdiv_q_2exp(wh[m].get_mpz_t(), wh[m].get_mpz_t(), static_cast<mp_bitcnt_t>(g));
    }
    long scale = wprec + s.prec;
    auto finish = [&](const Integer& lo, const Integer& hi) {
        return Bracket{dyadic(lo, -scale), dyadic(hi, -scale) + s.tail};
    };
    SeriesValue v;
    Integer lo, hi;
    std::vector<Integer> col(k + 1);
    for (size_t i = 0; i < s.support.size(); ++i) {
        for (size_t m = 0; m <= k; ++m) col[m] = s.y[m][i];
        bracket_dot(wl, wh, col, s.coef_err, lo, hi);
        v.pi.push_back(finish(lo, hi));
    }
    bracket_dot(wl, wh, s.theta, s.coef_err, lo, hi);
    v.theta = finish(lo, hi);
    bracket_dot(wl, wh, s.cost, s.coef_err, lo, hi);
    v.cost = finish(lo, hi);
    return v;
}

Bracket poisson_value(const std::vector<Integer>& c, long scale, const Rational& z) {
    size_t k = c.size() - 1;
    long g = guard_bits(z) + 8;
    long prec = scale + 2 * bit_length(Integer(static_cast<unsigned long>(k + 1))) + 16 + g;
    std::vector<Integer> wl, wh;
    poisson_weights(z, k, prec, wl, wh);
    Integer lo = 0, hi = 0;
    for (size_t m = 0; m <= k; ++m) {
        if (c[m] == 0) continue;
        const Integer& a = c[m] > 0 ? wl[m] : wh[m];
        const Integer& b = c[m] > 0 ? wh[m] : wl[m];
        mpz_addmul(lo.get_mpz_t(), c[m].get_mpz_t(), a.get_mpz_t());
        mpz_addmul(hi.get_mpz_t(), c[m].get_mpz_t(), b.get_mpz_t());
    }
    return {dyadic(lo, -(prec + scale)), dyadic(hi, -(prec + scale))};
}

IntPoly poisson_to_monomial(const std::vector<Integer>& c) {
    IntPoly w(c.size());
    Integer f = 1;  // (len-1)! / m!
    for (size_t m = c.size(); m-- > 0;) {
        w[m] = c[m] * f;
        f *= static_cast<unsigned long>(m);
    }
    trim(w);
    return w;
}

int poisson_sign(const std::vector<Integer>& c, const Rational& z) {
    long cbits = 0;
    bool any = false;
    for (const auto& x : c) {
        cbits = std::max(cbits, bit_length(x));
        any = any || x != 0;
    }
    if (!any) return 0;
    size_t k = c.size() - 1;
    long g = guard_bits(z) + 2 * bit_length(Integer(static_cast<unsigned long>(k + 1)));
    long prec = g + 64;
    std::vector<Integer> wl, wh;
    Integer lo, hi;
    for (int attempt = 0; attempt < 6; ++attempt) {
        poisson_weights(z, k, prec, wl, wh);
        lo = 0;
        hi = 0;
        for (size_t m = 0; m <= k; ++m) {
            if (c[m] == 0) continue;
            const Integer& a = c[m] > 0 ? wl[m] : wh[m];
            const Integer& b = c[m] > 0 ? wh[m] : wl[m];
            mpz_addmul(lo.get_mpz_t(), c[m].get_mpz_t(), a.get_mpz_t());
            mpz_addmul(hi.get_mpz_t(), c[m].get_mpz_t(), b.get_mpz_t());
        }
        if (lo > 0) return 1;
        if (hi < 0) return -1;
        prec = 2 * prec + cbits;
    }
    return sign_at(poisson_to_monomial(c), z);
}

}  // namespace actmc
