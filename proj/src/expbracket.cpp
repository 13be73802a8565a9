#include "actmc/expbracket.hpp"

#include <stdexcept>

namespace actmc {

void exp_fixed(const Rational& x, long prec, Integer& lo, Integer& hi) {
    if (x > 0) throw std::invalid_argument("exp_fixed: x must be <= 0");
    if (prec < 0) throw std::invalid_argument("exp_fixed: negative precision");
    if (x == 0) {
        lo = hi = Integer(1) << static_cast<mp_bitcnt_t>(prec);
        return;
    }
    // Halve the argument until |r| <= 1/2, sum the alternating series, square back.
    Rational a = -x;
    long m = 0;
    while (a > Rational(1, 2)) {
        mpq_div_2exp(a.get_mpq_t(), a.get_mpq_t(), 1);
        ++m;
    }
    long guard = 24 + static_cast<long>(mpz_sizeinbase(Integer(prec + m + 64).get_mpz_t(), 2));
    long wp = prec + m + guard;
    const Integer one = Integer(1) << static_cast<mp_bitcnt_t>(wp);
    const Integer& an = a.get_num();
    const Integer& ad = a.get_den();

    // terms t_n = a^n/n!, decreasing since a <= 1/2
    Integer tl = one, th = one;
    Integer slo = one, shi = one;  // partial sums bounds
    unsigned long n = 0;
    while (true) {
        ++n;
        Integer den = ad * n;
        tl = mul_div_floor(tl, an, den);
        th = mul_div_ceil(th, an, den);
        if (n % 2 == 1) {
            slo -= th;
            shi -= tl;
        } else {
            slo += tl;
            shi += th;
        }
        // after an odd term the partial sum is a lower bound, after an even one an upper bound
        if (n % 2 == 1 && th <= 1) {
            // add the next (even) term to get the upper side
            ++n;
            Integer den2 = ad * n;
            Integer th2 = mul_div_ceil(th, an, den2);
            shi += th2;
            break;
        }
    }
    // slo: lower bound of S_odd <= e^r ; shi: upper bound of S_even >= e^r
    if (slo < 0) slo = 0;
    for (long i = 0; i < m; ++i) {
        slo = slo * slo;
        mpz_fdiv_q_2exp(slo.get_mpz_t(), slo.get_mpz_t(), static_cast<mp_bitcnt_t>(wp));
        shi = shi * shi;
        mpz_cdiv_q_2exp(shi.get_mpz_t(), shi.get_mpz_t(), static_cast<mp_bitcnt_t>(wp));
    }
    mpz_fdiv_q_2exp(lo.get_mpz_t(), slo.get_mpz_t(), static_cast<mp_bitcnt_t>(wp - prec));
    mpz_cdiv_q_2exp(hi.get_mpz_t(), shi.get_mpz_t(), static_cast<mp_bitcnt_t>(wp - prec));
}

Bracket exp_bracket(const Rational& x, const Rational& tol) {
    if (x > 0) throw std::invalid_argument("exp_bracket: x must be <= 0");
    if (tol <= 0) throw std::invalid_argument("exp_bracket: tol must be positive");
    if (x == 0) return {Rational(1), Rational(1)};
    long prec = 4 - ceil_log2(tol);
    if (prec < 8) prec = 8;
    while (true) {
        Integer lo, hi;
        exp_fixed(x, prec, lo, hi);
        Bracket b{dyadic(lo, -prec), dyadic(hi, -prec)};
        if (b.hi - b.lo <= tol) return b;
        prec += 16;
    }
}

}  // namespace actmc
