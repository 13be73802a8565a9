#include "actmc/roots.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>

namespace actmc {

IntPoly square_free(const IntPoly& p) {
    IntPoly q = p;
    trim(q);
    if (q.empty()) throw IdenticallyZero();
    if (degree(q) <= 1 || square_free_modular(q)) {
        remove_content(q);
        return q;
    }
    RationalPoly rp = to_rational_poly(q);
    RationalPoly sf = square_free_part(rp);
    // keep the sign convention of p at +infinity
    if (sgn(rp.leading()) < 0) sf *= Rational(-1);
    return to_int_poly(sf);
}

namespace {

// Exact division by (t - 1); p(1) must be 0.
void divide_by_t_minus_1(IntPoly& p) {
    size_t n = p.size();
    IntPoly q(n - 1);
    Integer carry = 0;
    for (size_t i = n; i-- > 1;) {
        carry += p[i];
        q[i - 1] = carry;
    }
    p = std::move(q);
}

void divide_by_t(IntPoly& p) { p.erase(p.begin()); }

// q(t) = c * p(lo + (hi - lo) t), c > 0 an integer.
IntPoly map_to_unit(const IntPoly& p, const Rational& lo, const Rational& hi) {
    size_t n = p.size() - 1;
    const Integer& u = lo.get_num();
    const Integer& v = lo.get_den();
    IntPoly s(p.size());
    Integer vp = 1;
    for (size_t i = n + 1; i-- > 0;) {
        s[i] = p[i] * vp;
        vp *= v;
    }
    taylor_shift(s, u);
    Rational vd = v * (hi - lo);
    const Integer& e = vd.get_num();
    const Integer& f = vd.get_den();
    Integer ep = 1, fp = 1;
    std::vector<Integer> fpow(n + 1);
    for (size_t i = 0; i <= n; ++i) {
        fpow[i] = fp;
        fp *= f;
    }
    for (size_t i = 0; i <= n; ++i) {
        s[i] *= ep * fpow[n - i];
        ep *= e;
    }
    remove_content(s);
    return s;
}

// Descartes bound for roots of q in the open interval (0, 1).
long descartes_unit(const IntPoly& q) {
    IntPoly r = q;
    reverse(r);
    taylor_shift1(r);
    return sign_variations(r);
}

struct Node {
    IntPoly q;
    Rational a, b;
};

}  // namespace

std::vector<IsolatingInterval> isolate_intervals(const IntPoly& p, const Rational& lo, const Rational& hi) {
    std::vector<IsolatingInterval> out;
    IntPoly p0 = p;
    trim(p0);
    if (p0.empty()) throw IdenticallyZero();
    if (lo > hi) return out;
    if (degree(p0) == 0) return out;
    if (lo == hi) {
        if (sign_at(p0, lo) == 0) out.push_back({lo, lo, true});
        return out;
    }
    IntPoly q = map_to_unit(p0, lo, hi);
    if (q[0] == 0) {
        out.push_back({lo, lo, true});
        divide_by_t(q);
    }
    Integer s1 = 0;
    for (const auto& c : q) s1 += c;
    bool hi_root = s1 == 0;
    if (hi_root) divide_by_t_minus_1(q);

    std::vector<Node> stack;
    stack.push_back({std::move(q), lo, hi});
    std::vector<IsolatingInterval> inner;
    while (!stack.empty()) {
        Node nd = std::move(stack.back());
        stack.pop_back();
        if (degree(nd.q) <= 0) continue;
        long v = descartes_unit(nd.q);
        if (v == 0) continue;
        if (v == 1) {
            inner.push_back({nd.a, nd.b, false});
            continue;
        }
        Rational mid = (nd.a + nd.b) / 2;
        IntPoly left = nd.q;
        scale_half(left);
        IntPoly right = left;
        taylor_shift1(right);
        if (right[0] == 0) {
            inner.push_back({mid, mid, true});
            divide_by_t(right);
            divide_by_t_minus_1(left);
        }
        remove_content(left);
        remove_content(right);
        stack.push_back({std::move(right), mid, nd.b});
        stack.push_back({std::move(left), nd.a, mid});
    }
    std::sort(inner.begin(), inner.end(), [](const auto& x, const auto& y) { return x.a < y.a; });
    out.insert(out.end(), inner.begin(), inner.end());
    if (hi_root) out.push_back({hi, hi, true});
    return out;
}

namespace {

// e with 2^(e-1) <= |y| < 2^e (0 for y = 0)
long lg(const mpf_class& y) {
    if (y == 0) return 0;
    long e;
    mpf_get_d_2exp(&e, y.get_mpf_t());
    return e;
}

// Newton from the midpoint of (a, b).  The working precision starts low and
// is raised whenever the rounding error of p(x) could swamp the accuracy the
// next step is expected to reach.  Empty when the iterate leaves (a, b).
std::optional<Rational> newton_root(const IntPoly& p, const Rational& a, const Rational& b, const Rational& eta,
                                    mp_bitcnt_t max_bits) {
    const long lg_eta = ceil_log2(eta);
    const long lg_deg = static_cast<long>(std::bit_width(p.size()));
    mpf_class x(0, max_bits), lo(0, max_bits), hi(0, max_bits);
    mpf_set_q(lo.get_mpf_t(), a.get_mpq_t());
    mpf_set_q(hi.get_mpf_t(), b.get_mpq_t());
    x = (lo + hi) / 2;
    mp_bitcnt_t prec = std::min<mp_bitcnt_t>(256, max_bits);
    auto raise = [&](long extra) {
        if (prec >= max_bits) return false;
        prec = std::min<mp_bitcnt_t>(max_bits, prec + static_cast<mp_bitcnt_t>(std::max(extra, 64L)));
        return true;
    };
    for (int it = 0; it < 400; ++it) {
        mpf_class xp(x, prec), v(0, prec), dv(0, prec), mag(0, prec);
        eval_mpf(p, xp, v, dv, mag);
        long p_bits = static_cast<long>(prec);
        long dv_noise = lg(mag) + lg_deg - lg(xp) - p_bits + 16;
        if (dv == 0 || dv_noise >= lg(dv) - 4) {
            if (!raise(dv_noise - lg(dv) + 64)) return {};
            continue;
        }
        mpf_class step = v / dv;
        if (step == 0) break;
        long noise = lg(mag) - lg(dv) - p_bits + 8;
        long want = std::max(lg_eta - 4, 2 * lg(step) - 8);
        if (noise > want && raise(noise - want + 32)) continue;
        x -= step;
        if (x <= lo || x >= hi) return {};
        if (lg(step) <= lg_eta - 3) break;
    }
    Rational r;
    mpq_set_f(r.get_mpq_t(), x.get_mpf_t());
    return r;
}

}  // namespace

Rational refine_root(const IntPoly& p, Rational a, Rational b, int sa, int /*sb*/, const Rational& precision,
                     const SignOracle& sign) {
    const Rational two_prec = precision * 2;
    long bits = std::max(64L, 64 - ceil_log2(precision)) + static_cast<long>(p.size());
    for (const auto& c : p) bits = std::max(bits, static_cast<long>(mpz_sizeinbase(c.get_mpz_t(), 2)));
    mp_bitcnt_t max_bits = static_cast<mp_bitcnt_t>(2 * bits + 64);
    const Rational eta = precision / 2;
    // Newton is retried after every few bisections; a wide isolating
    // interval often throws the first attempt out.
    int since_newton = 8;

    auto probe = [&](const Rational& x) -> bool {  // true when x is a root
        if (x <= a || x >= b) return false;
        int s = sign(x);
        if (s == 0) return true;
        if (s == sa)
            a = x;
        else
            b = x;
        return false;
    };

    while (b - a > two_prec) {
        if (since_newton >= 8) {
            since_newton = 0;
            if (auto r = newton_root(p, a, b, eta, max_bits)) {
                // short probes keep the exact sign evaluations cheap
                long k = 2 - ceil_log2(eta);
                Rational x = dyadic(floor(*r * dyadic(1, k) + Rational(1, 2)), -k);
                if (probe(x)) return x;
            if (probe(x - eta)) return x - eta;
                if (probe(x + eta)) return x + eta;
                if (b - a <= two_prec) break;
            }
        }
        ++since_newton;
        Rational mid = (a + b) / 2;
        if (probe(mid)) return mid;
    }
    return (a + b) / 2;
}

std::vector<Rational> isolate_roots(const IntPoly& p, const Rational& lo, const Rational& hi,
                                    const Rational& precision, const SignOracle& sign) {
    IntPoly p0 = p;
    trim(p0);
    if (p0.empty()) throw IdenticallyZero();
    IntPoly sf = square_free(p0);
    SignOracle oracle = sign;
    if (!oracle || degree(sf) != degree(p0)) oracle = [&sf](const Rational& x) { return sign_at(sf, x); };
    std::vector<Rational> out;
    for (const auto& iv : isolate_intervals(sf, lo, hi)) {
        if (iv.exact) {
            out.push_back(iv.a);
            continue;
        }
        int sa = oracle(iv.a), sb = oracle(iv.b);
        // An endpoint can be a neighbouring exact root; the single simple root
        // inside then fixes the sign next to it.
        if (sa == 0 && sb == 0) {
            Rational mid = (iv.a + iv.b) / 2;
            int sm = oracle(mid);
            if (sm == 0) {
                out.push_back(mid);
                continue;
            }
            IntPoly left = map_to_unit(sf, iv.a, mid);
            if (descartes_unit(left) == 1)
                out.push_back(refine_root(sf, iv.a, mid, -sm, sm, precision, oracle));
            else
                out.push_back(refine_root(sf, mid, iv.b, sm, -sm, precision, oracle));
            continue;
        }
        if (sa == 0) sa = -sb;
        if (sb == 0) sb = -sa;
        out.push_back(refine_root(sf, iv.a, iv.b, sa, sb, precision, oracle));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Rational> isolate_roots(const RationalPoly& p, const Rational& lo, const Rational& hi,
                                    const Rational& precision) {
    if (p.is_zero()) throw IdenticallyZero();
    return isolate_roots(to_int_poly(p), lo, hi, precision);
}

long sturm_count(const RationalPoly& p, const Rational& lo, const Rational& hi) {
    if (p.is_zero()) throw IdenticallyZero();
    if (lo > hi) return 0;
    std::vector<RationalPoly> seq{p, p.derivative()};
    while (!seq.back().is_zero()) {
        RationalPoly q, r;
        divmod(seq[seq.size() - 2], seq.back(), q, r);
        seq.push_back(r * Rational(-1));
    }
    seq.pop_back();
    auto variations = [&](const Rational& x) {
        long v = 0;
        int last = 0;
        for (const auto& s : seq) {
            int sg = sgn(s(x));
            if (sg == 0) continue;
            if (last != 0 && sg != last) ++v;
            last = sg;
        }
        return v;
    };
    long c = variations(lo) - variations(hi);
    if (p(lo) == 0) ++c;
    return c;
}

}  // namespace actmc
