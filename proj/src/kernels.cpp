#include "actmc/kernels.hpp"

#include "actmc/roots.hpp"

#include <algorithm>
#include <mutex>
#include <set>

namespace actmc {

PointKernel off_state_kernel(const Model& m, size_t s) {
    PointKernel k;
    std::map<size_t, Rational> pi;
    for (const auto& tr : m.delay[s])
        if (tr.prob > 0) pi[tr.to] += tr.prob;
    k.pi.assign(pi.begin(), pi.end());
    k.theta = 1 / m.lambda;
    k.cost = m.rate_cost[s] / m.lambda + m.expected_delay_impulse(s);
    k.error = 0;
    return k;
}

std::vector<size_t> kernel_support(const Model& m, size_t alarm, size_t s) {
    const Alarm& a = m.alarms[alarm];
    std::vector<bool> seen(m.size(), false);
    std::vector<size_t> stack{s};
    seen[s] = true;
    std::set<size_t> out;
    while (!stack.empty()) {
        size_t r = stack.back();
        stack.pop_back();
        if (!a.enables(r)) {
            out.insert(r);
            continue;
        }
        if (a.rows[r].empty()) {
            out.insert(r);
        } else {
            for (const auto& tr : a.rows[r])
                if (tr.prob > 0) out.insert(tr.to);
        }
        for (const auto& tr : m.delay[r])
            if (tr.prob > 0 && !seen[tr.to]) {
                seen[tr.to] = true;
                stack.push_back(tr.to);
            }
    }
    return {out.begin(), out.end()};
}

Bracket eval_component(const ExpPoly& p, const Rational& offset, const Rational& d, const Rational& tol) {
    Bracket b = p.eval(d, tol);
    return {b.lo + offset, b.hi + offset};
}

PointKernel AlarmKernel::point(const Rational& d) const {
    if (d < lower_ || d > upper_)
        throw KernelError("parameter " + to_string(d) + " outside [" + to_string(lower_) + ", " + to_string(upper_) +
                          "]");
    Raw raw = raw_point(d);
    long bits = 16 - ceil_log2(accuracy_);
    Rational ulp = dyadic(1, -bits);
    auto mid = [&](const Bracket& b) { return dyadic(floor(dyadic(1, bits) * (b.lo + b.hi) / 2), -bits); };
    PointKernel k;
    Rational total = 0, widths = 0, wmax = 0;
    for (size_t i = 0; i < support_.size(); ++i) {
        Rational v = mid(raw.pi[i]);
        if (v < 0) v = 0;
        k.pi.emplace_back(support_[i], v);
        total += v;
        Rational w = raw.pi[i].hi - raw.pi[i].lo;
        widths += w;
        wmax = max(wmax, w);
    }
    Rational n = static_cast<long>(support_.size());
    Rational share = (1 - total) / n;
    for (auto& e : k.pi) e.second += share;
    k.theta = mid(raw.theta);
    k.cost = mid(raw.cost);
    Rational e_pi = wmax / 2 + ulp + (widths / 2 + n * ulp) / n;
    k.error = max(e_pi, max((raw.theta.hi - raw.theta.lo) / 2, (raw.cost.hi - raw.cost.lo) / 2) + ulp);
    if (k.error > accuracy_) throw std::logic_error("point kernel misses its accuracy budget");
    return k;
}

namespace {

struct Globals {
    Rational lambda, r_max, i_max;
};

Globals globals(const Model& m) { return {m.lambda, m.r_max(), m.i_max()}; }

// Bound on Dirac Pi/Theta/C values for ringing times up to tau.
Rational weight(const Globals& g, const Rational& tau) {
    return max(Rational(1), max(tau, g.r_max * tau + g.i_max * (g.lambda * tau + 1)));
}

// P with E[coef error] * 2^-P <= budget
long precision_for(const Integer& err, const Rational& budget) {
    return std::max(32L, ceil_log2(Rational(err) / budget) + 1);
}

std::vector<Integer> unit_vector(size_t n, size_t s, long prec) {
    std::vector<Integer> x(n);
    x[s] = Integer(1) << static_cast<mp_bitcnt_t>(prec);
    return x;
}

// Roots of the sign function sum_m c[m] pi_m(z) in [zlo, zhi].
std::vector<Rational> series_roots(const std::vector<Integer>& c, const Rational& zlo, const Rational& zhi,
                                   const Rational& zprec) {
    long v = 0;
    int last = 0;
    for (const auto& x : c) {
        int s = sgn(x);
        if (s == 0) continue;
        if (last != 0 && s != last) ++v;
        last = s;
    }
    if (last == 0) throw IdenticallyZero();
    if (v == 0) return {};
    SignOracle oracle = [&c](const Rational& z) { return poisson_sign(c, z); };
    IntPoly w = poisson_to_monomial(c);
    if (v == 1) {
        // exactly one positive simple root
        int sa = oracle(zlo);
        if (sa == 0) return {zlo};
        int sb = oracle(zhi);
        if (sb == 0) return {zhi};
        if (sa == sb) return {};
        return {refine_root(w, zlo, zhi, sa, sb, zprec, oracle)};
    }
    return isolate_roots(w, zlo, zhi, zprec, oracle);
}

Integer fixed_round(const Rational& q, long prec) { return floor(dyadic(1, prec) * q + Rational(1, 2)); }

// beta_m = C_m - g Theta_m + sum h(t) Pi_m(t) at scale 2^-prec
std::vector<Integer> ranking_coefficients(const PoissonSeries& s, const Rational& g, const std::vector<Rational>& h) {
    Integer gi = fixed_round(g, s.prec);
    std::vector<Integer> hi(s.support.size());
    for (size_t i = 0; i < s.support.size(); ++i) hi[i] = fixed_round(h[s.support[i]], s.prec);
    std::vector<Integer> beta(s.order + 1);
    Integer acc;
    for (size_t m = 0; m <= s.order; ++m) {
        acc = s.cost[m];
        acc <<= static_cast<mp_bitcnt_t>(s.prec);
        mpz_submul(acc.get_mpz_t(), gi.get_mpz_t(), s.theta[m].get_mpz_t());
        for (size_t i = 0; i < hi.size(); ++i)
            if (hi[i] != 0) mpz_addmul(acc.get_mpz_t(), hi[i].get_mpz_t(), s.y[m][i].get_mpz_t());
        mpz_fdiv_q_2exp(beta[m].get_mpz_t(), acc.get_mpz_t(), static_cast<mp_bitcnt_t>(s.prec));
    }
    return beta;
}

// Slope coefficients with beta held constant past the truncation order.
std::vector<Integer> differences(const std::vector<Integer>& beta) {
    std::vector<Integer> c(beta.size() - 1);
    for (size_t m = 0; m + 1 < beta.size(); ++m) c[m] = beta[m + 1] - beta[m];
    return c;
}

// sum_m b_m 2^-prec (lambda d)^m / m!
RationalPoly poisson_poly(const std::vector<Integer>& b, long prec, const Rational& lambda) {
    std::vector<Rational> c(b.size());
    Rational f = dyadic(1, -prec);
    for (size_t m = 0; m < b.size(); ++m) {
        if (m > 0) f *= lambda / static_cast<unsigned long>(m);
        c[m] = f * b[m];
    }
    return RationalPoly(std::move(c));
}

std::vector<Integer> column(const PoissonSeries& s, size_t i) {
    std::vector<Integer> c(s.order + 1);
    for (size_t m = 0; m <= s.order; ++m) c[m] = s.y[m][i];
    return c;
}

// Shared by the families whose ranking lives in the Poisson basis.
class SeriesKernel : public AlarmKernel {
public:
    std::vector<Rational> ranking_roots(const Rational& g, const std::vector<Rational>& h,
                                        const Rational& precision) const override {
        auto c = differences(ranking_coefficients(series_, g, h));
        const Rational& lam = series_.lambda;
        auto zs = series_roots(c, lam * lower_, lam * upper_, lam * precision);
        std::vector<Rational> out;
        for (const auto& z : zs) out.push_back(min(max(z / lam, lower_), upper_));
        return out;
    }

    int ranking_slope(const Rational& g, const std::vector<Rational>& h, const Rational& d) const override {
        return poisson_sign(differences(ranking_coefficients(series_, g, h)), series_.lambda * d);
    }

    Bracket ranking_bracket(const Rational& d, const Rational& g, const std::vector<Rational>& h) const override {
        auto beta = ranking_coefficients(series_, g, h);
        Bracket b = poisson_value(beta, series_.prec, series_.lambda * d);
        Rational off = theta_off_mid_ * -g + cost_off_mid_;
        return {b.lo + off, b.hi + off};
    }

    AnalyticKernel analytic() const override {
        AnalyticKernel k;
        k.family = family_;
        k.lower = lower_;
        k.upper = upper_;
        k.kappa = accuracy_;
        k.tau_hat = tau_hat_;
        k.poisson_order = series_.order;
        const Rational& lam = series_.lambda;
        for (size_t i = 0; i < support_.size(); ++i)
            k.pi.emplace_back(support_[i], ExpPoly::exp(lam, poisson_poly(column(series_, i), series_.prec, lam)));
        k.theta = ExpPoly::exp(lam, poisson_poly(series_.theta, series_.prec, lam));
        k.cost = ExpPoly::exp(lam, poisson_poly(series_.cost, series_.prec, lam));
        k.theta_offset = theta_off_mid_;
        k.cost_offset = cost_off_mid_;
        return k;
    }

    long degree() const override { return static_cast<long>(series_.order); }

protected:
    Raw raw_point(const Rational& d) const override {
        SeriesValue v = evaluate(series_, d);
        Raw r{v.pi, v.theta, v.cost};
        r.theta.lo += theta_off_.lo;
        r.theta.hi += theta_off_.hi;
        r.cost.lo += cost_off_.lo;
        r.cost.hi += cost_off_.hi;
        return r;
    }

    void init_common(const Model& m, size_t s, const Rational& accuracy) {
        state_ = s;
        auto a = m.alarm_at(s);
        if (!a) throw KernelError("state '" + m.states[s] + "' enables no alarm");
        alarm_ = *a;
        lower_ = m.alarms[alarm_].lower;
        upper_ = m.alarms[alarm_].upper;
        accuracy_ = accuracy;
        support_ = kernel_support(m, alarm_, s);
        family_ = m.alarms[alarm_].family.kind;
    }

    PoissonSeries series_;
    FamilyKind family_ = FamilyKind::Dirac;
    Rational tau_hat_;
    Bracket theta_off_{0, 0}, cost_off_{0, 0};
    Rational theta_off_mid_, cost_off_mid_;
};

class DiracKernel : public SeriesKernel {
public:
    DiracKernel(const Model& m, size_t s, const Rational& eta) {
        init_common(m, s, eta);
        Globals g = globals(m);
        tau_hat_ = upper_;
        Rational w = weight(g, upper_);
        size_t k = poisson_truncation_order(g.lambda, upper_, eta / 4, w, m.size()) + 1;
        Rational tail = w * poisson_tail_bound(g.lambda * upper_, k - 1);
        SubChain c(m, alarm_);
        Rational coef_budget = eta / (32 * static_cast<long>(support_.size() + 1));
        long prec = precision_for(PoissonSeries::error_bound(c, k, 0), coef_budget);
        series_ = PoissonSeries::build(c, unit_vector(m.size(), s, prec), 0, prec, k, support_, tail);
    }
};

class UniformShiftKernel : public SeriesKernel {
public:
    UniformShiftKernel(const Model& m, size_t s, const Rational& eta) {
        init_common(m, s, eta);
        Globals g = globals(m);
        const Rational& w = m.alarms[alarm_].family.width;
        tau_hat_ = upper_ + w;
        const Rational& lam = g.lambda;
        Rational mu = lam * w;
        SubChain c(m, alarm_);
        size_t n = m.size();

        // averaging window [0, w]
        Rational w_off = max(Rational(1), max((mu + 1) / (2 * lam), (g.r_max / lam + g.i_max) * (mu + 1) / 2 + g.i_max));
        size_t kw = poisson_truncation_order(lam, w, eta / 64, w_off, n) + 2;
        Rational t2 = poisson_tail_bound(mu, kw - 2);

        // main series over [lower, upper]
        Rational wt = weight(g, upper_);
        size_t k = poisson_truncation_order(lam, upper_, eta / 4, wt, n) + 1;
        Rational coef_budget = eta / (32 * static_cast<long>(support_.size() + 1));
        Integer est = Integer(static_cast<unsigned long>((kw + 2) * (kw + 2))) * static_cast<unsigned long>(c.nnz + 1) +
                      16 * static_cast<unsigned long>(n);
        Integer b0 = PoissonSeries::error_bound(c, k, est), b1 = 4 * PoissonSeries::error_bound(c, kw, 0);
        long prec = precision_for(b0 > b1 ? b0 : b1, coef_budget);

        for (;;) {
            long p2 = prec + 2 * bit_length(Integer(static_cast<unsigned long>(kw + 1))) + 16;
            long guard = static_cast<long>(mpz_get_si(ceil(mu * Rational(14427, 10000)).get_mpz_t())) + 8;
            std::vector<Integer> pl, ph;
            poisson_weights(mu, kw, p2 + guard, pl, ph);
            const Integer one = Integer(1) << static_cast<mp_bitcnt_t>(p2 + guard);
            std::vector<Integer> qlo(kw + 1), qhi(kw + 1);
            Integer sl = 0, sh = 0;
            for (size_t j = 0; j <= kw; ++j) {
                sl += pl[j];
                sh += ph[j];
                qlo[j] = one - sh;
                qhi[j] = one - sl;
                if (qlo[j] < 0) qlo[j] = 0;
                mpz_fdiv_q_2exp(qlo[j].get_mpz_t(), qlo[j].get_mpz_t(), static_cast<mp_bitcnt_t>(guard));
                mpz_cdiv_q_2exp(qhi[j].get_mpz_t(), qhi[j].get_mpz_t(), static_cast<mp_bitcnt_t>(guard));
            }

            // zbar = (1 / mu) sum_j x_j Q_j
            std::vector<Integer> x = unit_vector(n, s, prec);
            std::vector<Integer> acc(n);
            Rational xerr = 0, qwidth = 0;
            for (size_t j = 0; j <= kw; ++j) {
                for (size_t t = 0; t < n; ++t)
                    if (x[t] != 0) mpz_addmul(acc[t].get_mpz_t(), x[t].get_mpz_t(), qlo[j].get_mpz_t());
                xerr += Rational(static_cast<long>(j * c.nnz)) * Rational(qhi[j]);
                qwidth += Rational(qhi[j] - qlo[j]);
                if (j < kw) c.advance(x);
            }
            Integer num = mu.get_den(), den = mu.get_num() << static_cast<mp_bitcnt_t>(p2);
            std::vector<Integer> zbar(n);
            for (size_t t = 0; t < n; ++t) {
                Integer q = acc[t] * num;
                mpz_fdiv_q(zbar[t].get_mpz_t(), q.get_mpz_t(), den.get_mpz_t());
            }
            Rational scale = dyadic(1, -p2) / mu;
            Integer zerr = ceil((xerr + qwidth * dyadic(1, prec)) * scale) + static_cast<unsigned long>(n) + 1;

            Integer b = PoissonSeries::error_bound(c, k, zerr);
            if (Rational(b) > coef_budget * dyadic(1, prec)) {
                prec = precision_for(b, coef_budget) + 2;
                continue;
            }
            Rational zloss = poisson_tail_bound(mu, kw - 1);
            Rational tail = wt * (poisson_tail_bound(lam * upper_, k - 1) + zloss);
            series_ = PoissonSeries::build(c, zbar, zerr, prec, k, support_, tail);

            // offsets from the unit start over the window
            PoissonSeries win = PoissonSeries::build(c, unit_vector(n, s, prec), 0, prec, kw, support_, 0);
            auto offset = [&](bool cost) {
                Integer lo = 0, hi = 0, t;
                for (size_t j = 0; j <= kw; ++j) {
                    Integer v = cost ? Integer(win.cost[j] - win.alarm_cost[j]) : win.theta[j];
                    t = v - win.coef_err;
                    if (t > 0) mpz_addmul(lo.get_mpz_t(), t.get_mpz_t(), qlo[j].get_mpz_t());
                    t = v + win.coef_err;
                    mpz_addmul(hi.get_mpz_t(), t.get_mpz_t(), qhi[j].get_mpz_t());
                }
                Rational sc = dyadic(1, -(p2 + prec)) / mu;
                Rational trunc = (mu + 1) * t2 / (2 * lam);
                if (cost) trunc = (g.r_max / lam + g.i_max) * (mu + 1) * t2 / 2 + g.i_max * t2;
                return Bracket{Rational(lo) * sc, Rational(hi) * sc + trunc};
            };
            theta_off_ = offset(false);
            cost_off_ = offset(true);
            theta_off_mid_ = (theta_off_.lo + theta_off_.hi) / 2;
            cost_off_mid_ = (cost_off_.lo + cost_off_.hi) / 2;
            break;
        }
    }
};

// sum_m b_m Q_m(z) / z with Q_m = P(N(z) > m), coefficients b_m +- err at scale 2^-prec.
Bracket window_average(const std::vector<Integer>& b, const Integer& err, long prec, const Rational& z) {
    size_t k = b.size() - 1;
    Integer bmax = 0;
    for (const auto& x : b) bmax = std::max(bmax, x);
    long extra = 3 * bit_length(Integer(static_cast<unsigned long>(k + 1))) + bit_length(bmax + err) - prec + 16 +
                 std::max(0L, ceil_log2(1 / z));
    long wprec = prec + std::max(0L, extra);
    long guard = static_cast<long>(mpz_get_si(ceil(z * Rational(14427, 10000)).get_mpz_t())) + 8;
    std::vector<Integer> pl, ph;
    poisson_weights(z, k, wprec + guard, pl, ph);
    const Integer one = Integer(1) << static_cast<mp_bitcnt_t>(wprec + guard);
    Integer sl = 0, sh = 0, lo = 0, hi = 0, ql, qh, t;
    for (size_t m = 0; m <= k; ++m) {
        sl += pl[m];
        sh += ph[m];
        ql = one - sh;
        qh = one - sl;
        if (ql < 0) ql = 0;
        mpz_fdiv_q_2exp(ql.get_mpz_t(), ql.get_mpz_t(), static_cast<mp_bitcnt_t>(guard));
        mpz_cdiv_q_2exp(qh.get_mpz_t(), qh.get_mpz_t(), static_cast<mp_bitcnt_t>(guard));
        t = b[m] - err;
        if (t > 0) mpz_addmul(lo.get_mpz_t(), t.get_mpz_t(), ql.get_mpz_t());
        t = b[m] + err;
        mpz_addmul(hi.get_mpz_t(), t.get_mpz_t(), qh.get_mpz_t());
    }
    Rational sc = dyadic(1, -(wprec + prec)) / z;
    return {Rational(lo) * sc, Rational(hi) * sc};
}

// Taylor order L with bound * x^{L+1} / (L+1)! <= budget.
size_t taylor_order(const Rational& x, const Rational& bound, const Rational& budget) {
    Rational t = x;  // x^{L+1} / (L+1)!
    size_t l = 0;
    while (bound * t > budget) {
        ++l;
        t = t * x / static_cast<unsigned long>(l + 1);
    }
    return l;
}

Rational exp_upper(const Rational& x) {  // e^x <= 2^{1.4427 x} for x >= 0
    return dyadic(1, static_cast<long>(mpz_get_si(ceil(x * Rational(14427, 10000)).get_mpz_t())));
}

class UniformZeroKernel : public AlarmKernel {
public:
    UniformZeroKernel(const Model& m, size_t s, const Rational& eta) {
        state_ = s;
        alarm_ = *m.alarm_at(s);
        lower_ = m.alarms[alarm_].lower;
        upper_ = m.alarms[alarm_].upper;
        accuracy_ = eta;
        support_ = kernel_support(m, alarm_, s);
        Globals g = globals(m);
        lambda_ = g.lambda;
        w_ = weight(g, upper_);
        size_t k = poisson_truncation_order(g.lambda, upper_, eta / 4, w_, m.size()) + 1;
        Rational tail = w_ * poisson_tail_bound(g.lambda * upper_, k - 1);
        SubChain c(m, alarm_);
        Rational coef_budget = eta / (32 * static_cast<long>(support_.size() + 1));
        long prec = precision_for(PoissonSeries::error_bound(c, k, 0), coef_budget);
        series_ = PoissonSeries::build(c, unit_vector(m.size(), s, prec), 0, prec, k, support_, tail);
    }

    std::vector<Rational> ranking_roots(const Rational& g, const std::vector<Rational>& h,
                                        const Rational& precision) const override {
        RationalPoly v = ranking_poly(g, h);
        RationalPoly sign = ExpPoly::over_d(v).derivative_sign_poly();
        if (sign.is_zero()) throw IdenticallyZero();
        return isolate_roots(sign, lower_, upper_, precision);
    }

    int ranking_slope(const Rational& g, const std::vector<Rational>& h, const Rational& d) const override {
        return sgn(ExpPoly::over_d(ranking_poly(g, h)).derivative_sign_poly()(d));
    }

    Bracket ranking_bracket(const Rational& d, const Rational& g, const std::vector<Rational>& h) const override {
        Rational v = ranking_poly(g, h)(d) / d;
        return {v, v};
    }

    AnalyticKernel analytic() const override {
        ensure_polys();
        AnalyticKernel k;
        k.family = FamilyKind::UniformZero;
        k.lower = lower_;
        k.upper = upper_;
        k.kappa = accuracy_;
        k.tau_hat = upper_;
        k.poisson_order = series_.order;
        k.taylor_order = taylor_;
        for (size_t i = 0; i < support_.size(); ++i) k.pi.emplace_back(support_[i], ExpPoly::over_d(v_pi_[i]));
        k.theta = ExpPoly::over_d(v_theta_);
        k.cost = ExpPoly::over_d(v_cost_);
        return k;
    }

    long degree() const override {
        ensure_polys();
        return v_cost_.degree() + 1;
    }

protected:
    Raw raw_point(const Rational& d) const override {
        Rational z = lambda_ * d;
        Raw r;
        auto widen = [&](Bracket b) {
            b.hi += series_.tail;
            return b;
        };
        for (size_t i = 0; i < support_.size(); ++i)
            r.pi.push_back(widen(window_average(column(series_, i), series_.coef_err, series_.prec, z)));
        r.theta = widen(window_average(series_.theta, series_.coef_err, series_.prec, z));
        r.cost = widen(window_average(series_.cost, series_.coef_err, series_.prec, z));
        return r;
    }

private:
    RationalPoly ranking_poly(const Rational& g, const std::vector<Rational>& h) const {
        ensure_polys();
        RationalPoly v = v_cost_ - v_theta_ * g;
        for (size_t i = 0; i < support_.size(); ++i)
            if (h[support_[i]] != 0) v += v_pi_[i] * h[support_[i]];
        return v;
    }

    // V(d) = int_0^d P(tau) S_L(tau) dtau with S_L the Taylor polynomial of e^{-lambda tau}
    void ensure_polys() const {
        std::call_once(once_, [this] {
            Rational x = lambda_ * upper_;
            taylor_ = taylor_order(x, 2 * w_ * exp_upper(x), accuracy_ / 4);
            std::vector<Rational> sc(taylor_ + 1);
            Rational f = 1;
            for (size_t n = 0; n <= taylor_; ++n) {
                if (n > 0) f *= -lambda_ / static_cast<unsigned long>(n);
                sc[n] = f;
            }
            RationalPoly taylor(std::move(sc));
            auto build = [&](const std::vector<Integer>& b) {
                return (poisson_poly(b, series_.prec, lambda_) * taylor).integral();
            };
            for (size_t i = 0; i < support_.size(); ++i) v_pi_.push_back(build(column(series_, i)));
            v_theta_ = build(series_.theta);
            v_cost_ = build(series_.cost);
        });
    }

    PoissonSeries series_;
    Rational lambda_, w_;
    mutable std::once_flag once_;
    mutable size_t taylor_ = 0;
    mutable std::vector<RationalPoly> v_pi_;
    mutable RationalPoly v_theta_, v_cost_;
};

// Brackets of T_n = int_0^1 t^n e^{-z t} dt, n = 0..nmax, at scale 2^-q, from
// T_n = (e^{-z} + z T_{n+1}) / (n + 1), run downwards from far above nmax.
void moment_brackets(const Rational& z, size_t nmax, long q, std::vector<Integer>& lo, std::vector<Integer>& hi) {
    Integer elo, ehi;
    exp_fixed(-z, q, elo, ehi);
    const Integer zn = z.get_num(), zd = z.get_den();
    size_t top = nmax + static_cast<size_t>(q) + 2 * static_cast<size_t>(mpz_get_ui(ceil(z).get_mpz_t())) + 8;
    // e^{-z} / (N + 1) <= T_N <= e^{-z} / (N + 1 - z)
    Integer tl = elo / static_cast<unsigned long>(top + 1);
    Integer th = ceil(Rational(ehi) / (Rational(static_cast<long>(top + 1)) - z));
    lo.assign(nmax + 1, 0);
    hi.assign(nmax + 1, 0);
    Integer t;
    for (size_t n = top; n-- > 0;) {
        t = tl * zn;
        mpz_fdiv_q(t.get_mpz_t(), t.get_mpz_t(), zd.get_mpz_t());
        t += elo;
        mpz_fdiv_q_ui(tl.get_mpz_t(), t.get_mpz_t(), n + 1);
        t = th * zn;
        mpz_cdiv_q(t.get_mpz_t(), t.get_mpz_t(), zd.get_mpz_t());
        t += ehi;
        mpz_cdiv_q_ui(th.get_mpz_t(), t.get_mpz_t(), n + 1);
        if (n <= nmax) {
            lo[n] = tl;
            hi[n] = th;
        }
    }
}

// Weibull ringing time with rate d: density k d^k tau^{k-1} e^{-(d tau)^k}.
// With G the Dirac series and e^{-(d tau)^k} replaced by its Taylor
// polynomial of order L, the component integral over [0, M] is
//   sum_j k (-1)^j / j! (M d)^{k(j+1)} mu_j,   mu_j = int_0^1 t^{k(j+1)-1} G(M t) dt,
// and mu_j = sum_m b_m z^m / m! T_{k(j+1)-1+m} with z = lambda M.
class WeibullKernel : public AlarmKernel {
public:
    WeibullKernel(const Model& m, size_t s, const Rational& eta) {
        state_ = s;
        alarm_ = *m.alarm_at(s);
        const Alarm& a = m.alarms[alarm_];
        lower_ = a.lower;
        upper_ = a.upper;
        accuracy_ = eta;
        support_ = kernel_support(m, alarm_, s);
        shape_ = a.family.kind == FamilyKind::Exponential ? 1 : a.family.shape;
        Globals g = globals(m);
        const Rational& lam = g.lambda;

        WeibullCutoff cut = weibull_cutoff(shape_, lower_, upper_, lam, g.r_max, g.i_max, eta / 8);
        cutoff_ = cut.m;
        Rational wm = weight(g, cutoff_);
        size_t order = poisson_truncation_order(lam, cutoff_, eta / 8, wm, m.size()) + 1;
        Rational tail = wm * poisson_tail_bound(lam * cutoff_, order - 1);
        SubChain c(m, alarm_);
        Rational coef_budget = eta / (32 * static_cast<long>(support_.size() + 1));
        long prec = precision_for(PoissonSeries::error_bound(c, order, 0), coef_budget);
        PoissonSeries ser = PoissonSeries::build(c, unit_vector(m.size(), s, prec), 0, prec, order, support_, tail);
        poisson_order_ = order;

        // |remainder of e^{-y}| <= y^{L+1} / (L+1)! and int_0^M density <= (M u)^k
        Rational x = pow(cutoff_ * upper_, shape_);
        taylor_ = taylor_order(x, (wm + 1) * x, eta / 8);
        Rational t = x;
        for (size_t l = 1; l <= taylor_; ++l) t = t * x / static_cast<unsigned long>(l + 1);
        Rational cut_err = max(cut.tail_prob, max(cut.tail_mean, g.r_max * cut.tail_mean +
                                                                      g.i_max * (lam * cut.tail_mean + cut.tail_prob)));
        error_ = cut_err + tail + (wm + 1) * x * t + Rational(ser.coef_err) * dyadic(1, -prec);

        std::vector<const std::vector<Integer>*> comps;
        std::vector<std::vector<Integer>> cols;
        for (size_t i = 0; i < support_.size(); ++i) cols.push_back(column(ser, i));
        for (const auto& col : cols) comps.push_back(&col);
        comps.push_back(&ser.theta);
        comps.push_back(&ser.cost);

        Rational z = lam * cutoff_;
        long q = 64 + ceil_log2((wm + 1) * exp_upper(x + 2 * z) * static_cast<long>(16 * (order + 1) * shape_) / eta);
        std::vector<RationalPoly> polys;
        Rational worst;
        for (;;) {
            polys.clear();
            worst = 0;
            Rational err;
            for (const auto* b : comps) {
                polys.push_back(polynomial(*b, prec, z, q, x, eta, err));
                worst = max(worst, err);
            }
            if (worst <= eta / 8) break;
            q += 64;
        }
        error_ += worst;
        for (size_t i = 0; i < support_.size(); ++i) p_pi_.push_back(std::move(polys[i]));
        p_theta_ = std::move(polys[support_.size()]);
        p_cost_ = std::move(polys[support_.size() + 1]);
    }

    std::vector<Rational> ranking_roots(const Rational& g, const std::vector<Rational>& h,
                                        const Rational& precision) const override {
        RationalPoly d = ranking_poly(g, h).derivative();
        if (d.is_zero()) throw IdenticallyZero();
        return isolate_roots(d, lower_, upper_, precision);
    }

    int ranking_slope(const Rational& g, const std::vector<Rational>& h, const Rational& d) const override {
        return sgn(ranking_poly(g, h).derivative()(d));
    }

    Bracket ranking_bracket(const Rational& d, const Rational& g, const std::vector<Rational>& h) const override {
        Rational v = ranking_poly(g, h)(d);
        return {v, v};
    }

    AnalyticKernel analytic() const override {
        AnalyticKernel k;
        k.family = shape_ == 1 ? FamilyKind::Exponential : FamilyKind::Weibull;
        k.lower = lower_;
        k.upper = upper_;
        k.kappa = accuracy_;
        k.tau_hat = cutoff_;
        k.poisson_order = poisson_order_;
        k.taylor_order = taylor_;
        for (size_t i = 0; i < support_.size(); ++i) k.pi.emplace_back(support_[i], ExpPoly::plain(p_pi_[i]));
        k.theta = ExpPoly::plain(p_theta_);
        k.cost = ExpPoly::plain(p_cost_);
        return k;
    }

    long degree() const override { return p_cost_.degree(); }

protected:
    Raw raw_point(const Rational& d) const override {
        Raw r;
        Rational tol = accuracy_ / 64;
        auto around = [&](const RationalPoly& p) {
            Bracket b = p.eval_bracket(d, tol);
            return Bracket{b.lo - error_, b.hi + error_};
        };
        for (const auto& p : p_pi_) r.pi.push_back(around(p));
        r.theta = around(p_theta_);
        r.cost = around(p_cost_);
        return r;
    }

private:
    RationalPoly ranking_poly(const Rational& g, const std::vector<Rational>& h) const {
        RationalPoly v = p_cost_ - p_theta_ * g;
        for (size_t i = 0; i < support_.size(); ++i)
            if (h[support_[i]] != 0) v += p_pi_[i] * h[support_[i]];
        return v;
    }

    // Dyadic polynomial in d; err bounds the effect of the mu brackets and
    // of the coefficient rounding on [0, upper].
    RationalPoly polynomial(const std::vector<Integer>& b, long prec, const Rational& z, long q, const Rational& x,
                            const Rational& eta, Rational& err) const {
        size_t L = taylor_, k = shape_, K = b.size() - 1;
        size_t nmax = k * (L + 1) - 1 + K;
        if (t_lo_.size() != nmax + 1 || t_q_ != q) {
            moment_brackets(z, nmax, q, t_lo_, t_hi_);
            t_q_ = q;
        }
        // z^m / m! at scale 2^-q
        std::vector<Integer> wl(K + 1), wh(K + 1);
        wl[0] = wh[0] = Integer(1) << static_cast<mp_bitcnt_t>(q);
        const Integer zn = z.get_num(), zd = z.get_den();
        for (size_t m = 1; m <= K; ++m) {
            Integer d = zd * static_cast<unsigned long>(m);
            Integer t = wl[m - 1] * zn;
            mpz_fdiv_q(wl[m].get_mpz_t(), t.get_mpz_t(), d.get_mpz_t());
            t = wh[m - 1] * zn;
            mpz_cdiv_q(wh[m].get_mpz_t(), t.get_mpz_t(), d.get_mpz_t());
        }
        long round_bits = 8 + ceil_log2(Rational(static_cast<long>(16 * (L + 1))) / eta) +
                          static_cast<long>(k * (L + 1)) * std::max(0L, ceil_log2(upper_));
        std::vector<Rational> coeffs(k * (L + 1) + 1);
        Rational mk = pow(cutoff_, static_cast<unsigned>(k));
        Rational mpow = 1, fact = 1, xpow = 1;
        Rational mu_err = 0;
        Rational ulp = dyadic(1, -(prec + 2 * q));
        Integer lo, hi, wt;
        for (size_t j = 0; j <= L; ++j) {
            mpow *= mk;
            xpow *= x;
            if (j > 0) fact *= static_cast<unsigned long>(j);
            size_t e = k * (j + 1) - 1;
            lo = 0;
            hi = 0;
            for (size_t m = 0; m <= K; ++m) {
                int sg = sgn(b[m]);
                if (sg == 0) continue;
                if (sg > 0) {
                    wt = wl[m] * t_lo_[e + m];
                    mpz_addmul(lo.get_mpz_t(), b[m].get_mpz_t(), wt.get_mpz_t());
                    wt = wh[m] * t_hi_[e + m];
                    mpz_addmul(hi.get_mpz_t(), b[m].get_mpz_t(), wt.get_mpz_t());
                } else {
                    wt = wh[m] * t_hi_[e + m];
                    mpz_addmul(lo.get_mpz_t(), b[m].get_mpz_t(), wt.get_mpz_t());
                    wt = wl[m] * t_lo_[e + m];
                    mpz_addmul(hi.get_mpz_t(), b[m].get_mpz_t(), wt.get_mpz_t());
                }
            }
            Rational mu = Rational(lo + hi) * ulp / 2;
            mu_err += Rational(static_cast<long>(k)) * xpow / fact * Rational(hi - lo) * ulp / 2;
            Rational coef = Rational(static_cast<long>(k)) * mpow * mu / fact;
            if (j % 2) coef = -coef;
            coeffs[k * (j + 1)] = dyadic(floor(coef * dyadic(1, round_bits) + Rational(1, 2)), -round_bits);
        }
        err = mu_err + Rational(static_cast<long>(L + 1)) * dyadic(1, -round_bits - 1) *
                           pow(max(Rational(1), upper_), static_cast<unsigned>(k * (L + 1)));
        return RationalPoly(std::move(coeffs));
    }

    unsigned shape_ = 1;
    Rational cutoff_, error_;
    size_t poisson_order_ = 0, taylor_ = 0;
    std::vector<RationalPoly> p_pi_;
    RationalPoly p_theta_, p_cost_;
    mutable std::vector<Integer> t_lo_, t_hi_;
    mutable long t_q_ = 0;
};

void require_family(const Model& m, size_t s, std::initializer_list<FamilyKind> kinds, const char* what) {
    auto a = m.alarm_at(s);
    if (!a) throw KernelError("state '" + m.states[s] + "' enables no alarm");
    FamilyKind k = m.alarms[*a].family.kind;
    for (auto x : kinds)
        if (x == k) return;
    throw KernelError(std::string(what) + " kernel requested for a " + m.alarms[*a].family.name() + " alarm");
}

}  // namespace

namespace {

// First M = m0 * 2^i meeting the tail budget.
WeibullCutoff cutoff_at(unsigned shape, Rational m, const Rational& lo, const Rational& lambda, const Rational& r_max,
                        const Rational& i_max, const Rational& budget) {
    for (;;) {
        Rational x = pow(m * lo, shape);
        // e^{-x} <= 2^{-floor(1.4426 x)}
        long e = static_cast<long>(mpz_get_si(floor(x * Rational(14426, 10000)).get_mpz_t()));
        Rational p = dyadic(1, -e);
        Rational q = p * (m + 1 / lo);
        Rational err = max(p, max(q, r_max * q + i_max * (lambda * q + p)));
        if (err <= budget) return {m, p, q};
        m *= 2;
    }
}

}  // namespace

WeibullCutoff weibull_cutoff(unsigned shape, const Rational& lo, const Rational& hi, const Rational& lambda,
                             const Rational& r_max, const Rational& i_max, const Rational& budget) {
    Rational start = max(2 * hi, 1 / lo);
    WeibullCutoff c = cutoff_at(shape, dyadic(1, ceil_log2(start)), lo, lambda, r_max, i_max, budget);
    // the Taylor order grows like (M u)^k, so back off from the power of two
    for (long eighths : {5L, 6L, 7L}) {
        Rational m = c.m * frac(eighths, 8);
        if (m < start) continue;
        WeibullCutoff t = cutoff_at(shape, m, lo, lambda, r_max, i_max, budget);
        if (t.m == m) return t;
    }
    return c;
}

std::unique_ptr<AlarmKernel> build_kernel(const Model& m, size_t s, const Rational& accuracy) {
    auto a = m.alarm_at(s);
    if (!a) throw KernelError("state '" + m.states[s] + "' enables no alarm");
    switch (m.alarms[*a].family.kind) {
        case FamilyKind::Dirac: return std::make_unique<DiracKernel>(m, s, accuracy);
        case FamilyKind::UniformShift: return std::make_unique<UniformShiftKernel>(m, s, accuracy);
        case FamilyKind::UniformZero: return std::make_unique<UniformZeroKernel>(m, s, accuracy);
        case FamilyKind::Exponential:
        case FamilyKind::Weibull: return std::make_unique<WeibullKernel>(m, s, accuracy);
    }
    throw KernelError("unknown family");
}

PointKernel point_kernel(const Model& m, size_t s, const Rational& d, const Rational& accuracy) {
    if (!m.alarm_at(s)) return off_state_kernel(m, s);
    return build_kernel(m, s, accuracy)->point(d);
}

AnalyticKernel dirac_kernel(const Model& m, size_t s, const Rational& kappa) {
    require_family(m, s, {FamilyKind::Dirac}, "Dirac");
    return build_kernel(m, s, kappa)->analytic();
}

AnalyticKernel uniform_kernel(const Model& m, size_t s, const Rational& kappa) {
    require_family(m, s, {FamilyKind::UniformZero}, "uniform");
    return build_kernel(m, s, kappa)->analytic();
}

AnalyticKernel uniform_shift_kernel(const Model& m, size_t s, const Rational& kappa) {
    require_family(m, s, {FamilyKind::UniformShift}, "uniform-shift");
    return build_kernel(m, s, kappa)->analytic();
}

AnalyticKernel weibull_kernel(const Model& m, size_t s, const Rational& kappa) {
    require_family(m, s, {FamilyKind::Weibull, FamilyKind::Exponential}, "Weibull");
    return build_kernel(m, s, kappa)->analytic();
}

}  // namespace actmc
