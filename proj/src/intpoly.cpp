#include "actmc/intpoly.hpp"

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace actmc {

void trim(IntPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

long degree(const IntPoly& p) { return static_cast<long>(p.size()) - 1; }

IntPoly to_int_poly(const RationalPoly& p) {
    const auto& c = p.coeffs();
    Integer den = common_denominator(c);
    IntPoly out(c.size());
    for (size_t i = 0; i < c.size(); ++i) {
        Rational s = c[i] * den;
        out[i] = s.get_num();
    }
    remove_content(out);
    return out;
}

RationalPoly to_rational_poly(const IntPoly& p) {
    std::vector<Rational> c(p.begin(), p.end());
    return RationalPoly(std::move(c));
}

void remove_content(IntPoly& p) {
    trim(p);
    if (p.empty()) return;
    Integer g = 0;
    for (const auto& a : p) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), a.get_mpz_t());
        if (g == 1) break;
    }
    if (g != 1)
        for (auto& a : p) mpz_divexact(a.get_mpz_t(), a.get_mpz_t(), g.get_mpz_t());
}

void taylor_shift1_serial(IntPoly& p) {
    size_t n = p.size();
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = n - 1; j-- > i;) p[j] += p[j + 1];
}

void taylor_shift1(IntPoly& p) {
#ifdef _OPENMP
    long n = static_cast<long>(p.size()) - 1;
    if (n < 128 || omp_get_max_threads() == 1) {
        taylor_shift1_serial(p);
        return;
    }
    // cell (i, j), j from n-1 down to i, reads (i-1, j) and (i, j+1) and must
    // run after (i-1, j-1) has read p[j]; wave t = 2i + (n - 1 - j).
    for (long t = 0; t <= 2 * (n - 1); ++t) {
        long ilo = std::max(0L, t - (n - 1));
        long ihi = std::min(t / 2, n - 1);
#pragma omp parallel for schedule(static)
        for (long i = ilo; i <= ihi; ++i) {
            long j = 2 * i + n - 1 - t;
            p[static_cast<size_t>(j)] += p[static_cast<size_t>(j + 1)];
        }
    }
#else
    taylor_shift1_serial(p);
#endif
}

void taylor_shift(IntPoly& p, const Integer& c) {
    if (c == 0) return;
    if (c == 1) {
        taylor_shift1(p);
        return;
    }
    size_t n = p.size();
    for (size_t i = 0; i + 1 < n; ++i)
        for (size_t j = n - 1; j-- > i;) mpz_addmul(p[j].get_mpz_t(), c.get_mpz_t(), p[j + 1].get_mpz_t());
}

void scale_half(IntPoly& p, unsigned k) {
    size_t n = p.size();
    for (size_t i = 0; i < n; ++i)
        mpz_mul_2exp(p[i].get_mpz_t(), p[i].get_mpz_t(), static_cast<mp_bitcnt_t>(k * (n - 1 - i)));
}

void reverse(IntPoly& p) {
    trim(p);
    std::reverse(p.begin(), p.end());
}

long sign_variations(const IntPoly& p) {
    long v = 0;
    int last = 0;
    for (const auto& a : p) {
        int s = sgn(a);
        if (s == 0) continue;
        if (last != 0 && s != last) ++v;
        last = s;
    }
    return v;
}

IntPoly derivative(const IntPoly& p) {
    if (p.size() <= 1) return {};
    IntPoly d(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i) d[i - 1] = p[i] * static_cast<unsigned long>(i);
    return d;
}

Rational eval(const IntPoly& p, const Rational& x) {
    // homogeneous Horner: sum a_i num^i den^(n-i)
    const Integer& num = x.get_num();
    const Integer& den = x.get_den();
    Integer acc = 0, dpow = 1;
    for (size_t i = p.size(); i-- > 0;) {
        acc = acc * num + p[i] * dpow;
        dpow *= den;
    }
    // acc = den^n p(x), dpow = den^(n+1)
    Rational r(acc, dpow / den);
    r.canonicalize();
    return r;
}

int sign_at(const IntPoly& p, const Rational& x) {
    const Integer& num = x.get_num();
    const Integer& den = x.get_den();
    Integer acc = 0, dpow = 1;
    for (size_t i = p.size(); i-- > 0;) {
        acc = acc * num + p[i] * dpow;
        dpow *= den;
    }
    return sgn(acc);
}

void eval_mpf(const IntPoly& p, const mpf_class& x, mpf_class& v, mpf_class& dv) {
    mp_bitcnt_t prec = x.get_prec();
    v = mpf_class(0, prec);
    dv = mpf_class(0, prec);
    for (size_t i = p.size(); i-- > 0;) {
        dv = dv * x + v;
        v = v * x + mpf_class(p[i], prec);
    }
}

void eval_mpf(const IntPoly& p, const mpf_class& x, mpf_class& v, mpf_class& dv, mpf_class& mag) {
    mp_bitcnt_t prec = x.get_prec();
    v = mpf_class(0, prec);
    dv = mpf_class(0, prec);
    mag = mpf_class(0, prec);
    mpf_class ax(abs(x), prec), c(0, prec);
    for (size_t i = p.size(); i-- > 0;) {
        c = p[i];
        dv = dv * x + v;
        v = v * x + c;
        mag = mag * ax + abs(c);
    }
}

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

std::vector<u64> reduce(const IntPoly& p, u64 q) {
    std::vector<u64> r(p.size());
    for (size_t i = 0; i < p.size(); ++i) r[i] = mpz_fdiv_ui(p[i].get_mpz_t(), q);
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
}

// degree of gcd over GF(q)
long gcd_degree(std::vector<u64> a, std::vector<u64> b, u64 q) {
    while (!b.empty()) {
        // a mod b
        u64 inv = powmod(b.back(), q - 2, q);
        while (a.size() >= b.size()) {
            u64 f = mulmod(a.back(), inv, q);
            size_t off = a.size() - b.size();
            for (size_t i = 0; i < b.size(); ++i) a[off + i] = (a[off + i] + q - mulmod(f, b[i], q)) % q;
            while (!a.empty() && a.back() == 0) a.pop_back();
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    return static_cast<long>(a.size()) - 1;
}

}  // namespace

bool square_free_modular(const IntPoly& p) {
    if (degree(p) <= 1) return true;
    // primes just below 2^62
    static const u64 primes[] = {4611686018427387847ULL, 4611686018427387817ULL, 4611686018427387787ULL,
                                 4611686018427387761ULL};
    IntPoly dp = derivative(p);
    for (u64 q : primes) {
        if (mpz_fdiv_ui(p.back().get_mpz_t(), q) == 0) continue;
        auto a = reduce(p, q);
        auto b = reduce(dp, q);
        if (b.size() != dp.size()) continue;  // degree of p' dropped mod q
        if (gcd_degree(a, b, q) == 0) return true;
    }
    return false;
}

}  // namespace actmc
