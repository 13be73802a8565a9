#include "doctest.h"

#include "actmc/expbracket.hpp"
#include "actmc/intpoly.hpp"
#include "actmc/linsolve.hpp"
#include "actmc/poly.hpp"
#include "actmc/roots.hpp"

#include <random>

#include <omp.h>

using namespace actmc;

namespace {

Rational q(const char* s) { return parse_rational(s); }

// e^{-1} from the alternating series 1 - 1 + 1/2 - ... ; consecutive partial
// sums bracket the limit.
Bracket inv_e_oracle(int terms) {
    Rational s = 0, t = 1;
    Rational prev;
    for (int i = 0; i <= terms; ++i) {
        prev = s;
        s += (i % 2 == 0) ? t : Rational(-t);
        t /= i + 1;
    }
    return {min(prev, s), max(prev, s)};
}

}  // namespace

TEST_CASE("parse_rational accepts fractions and decimals exactly") {
    CHECK(q("7/10") == Rational(7, 10));
    CHECK(q("1.39") == Rational(139, 100));
    CHECK(q("-25e-3") == Rational(-1, 40));
    CHECK(q("0.5/2") == Rational(1, 4));
    CHECK_THROWS(q("abc"));
    CHECK_THROWS(q("1/0"));
}

TEST_CASE("to_decimal") {
    CHECK(to_decimal(Rational(1, 3), 5) == "0.33333");
    CHECK(to_decimal(Rational(10)) == "10");
    CHECK(to_decimal(Rational(-1, 8)) == "-0.125");
    CHECK(to_decimal(dyadic(1, -100), 3) == "7.89e-31");
}

TEST_CASE("exp_bracket at zero is exact") {
    Bracket b = exp_bracket(0, q("1/1000"));
    CHECK(b.lo == 1);
    CHECK(b.hi == 1);
}

TEST_CASE("exp_bracket(-1) agrees with the alternating series") {
    Rational tol = q("1e-4");
    Bracket b = exp_bracket(-1, tol);
    CHECK(b.hi - b.lo <= tol);
    Bracket o = inv_e_oracle(30);
    CHECK(b.lo <= o.hi);
    CHECK(o.lo <= b.hi);
    CHECK(b.lo <= q("0.367879"));
    CHECK(q("0.36788") <= b.hi);
}

TEST_CASE("exp_bracket(-10) agrees with the tenth power of the e^-1 oracle") {
    Rational tol = q("1e-6");
    Bracket b = exp_bracket(-10, tol);
    CHECK(b.hi - b.lo <= tol);
    Bracket o = inv_e_oracle(60);
    CHECK(b.lo <= pow(o.hi, 10));
    CHECK(pow(o.lo, 10) <= b.hi);
    CHECK(b.lo <= q("4.54e-5"));
    CHECK(q("4.53999e-5") <= b.hi + tol);
}

TEST_CASE("exp_bracket is monotone and shrinks with tol") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 40; ++i) {
        Rational x1 = frac(-static_cast<long>(rng() % 4000), 97);
        Rational x2 = x1 + frac(static_cast<long>(rng() % 50), 31);
        if (x2 > 0) x2 = 0;
        Rational tol = dyadic(1, -static_cast<long>(8 + rng() % 60));
        Bracket a = exp_bracket(x1, tol), b = exp_bracket(x2, tol);
        CHECK(a.lo <= a.hi);
        CHECK(a.hi <= b.hi + tol);
        Bracket fine = exp_bracket(x1, tol / 1024);
        CHECK(fine.hi - fine.lo <= tol / 1024);
        CHECK(fine.lo <= a.hi);
        CHECK(a.lo <= fine.hi);
    }
}

TEST_CASE("exp_fixed handles large arguments") {
    Integer lo, hi;
    exp_fixed(Rational(-13890, 1000) * 10, 300, lo, hi);
    CHECK(hi - lo <= 8);
    CHECK(lo >= 0);
    // e^-138.9 ~ 5.1e-61 ~ 2^-200.6
    CHECK(mpz_sizeinbase(hi.get_mpz_t(), 2) == 100);
}

TEST_CASE("polynomial evaluation and derivative") {
    RationalPoly p({q("1/2"), 0, 3});
    CHECK(p(Rational(1, 3)) == Rational(5, 6));
    CHECK(p.derivative() == RationalPoly({0, 6}));
    CHECK(p.integral().derivative() == p);
    CHECK(p.shifted(1)(2) == p(3));
    RationalPoly a({1, 1}), b({-1, 1});
    CHECK(a * b == RationalPoly({-1, 0, 1}));
    CHECK((a + b) == RationalPoly({0, 2}));
    CHECK((a - a).is_zero());
}

TEST_CASE("interval Horner brackets the exact value") {
    std::mt19937_64 rng(21);
    std::uniform_int_distribution<int> pick(-1000, 1000);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Rational> c;
        for (int i = 0; i <= trial % 40; ++i) c.push_back(frac(pick(rng), 1 + std::abs(pick(rng))));
        RationalPoly p(c);
        Rational d = frac(pick(rng), 1 + std::abs(pick(rng))), tol = dyadic(1, -(10 + trial % 50));
        Bracket b = p.eval_bracket(d, tol);
        Rational v = p(d);
        CHECK(b.lo <= v);
        CHECK(v <= b.hi);
        CHECK(b.hi - b.lo <= tol);
    }
    CHECK(RationalPoly().eval_bracket(3, 1).hi == 0);
}

TEST_CASE("exp-poly derivative sign polynomials") {
    // e^{-d} * d  ->  e^{-d} (1 - d)
    ExpPoly e = ExpPoly::exp(1, RationalPoly({0, 1}));
    CHECK(e.derivative_sign_poly() == RationalPoly({1, -1}));
    CHECK(isolate_roots(e.derivative_sign_poly(), q("1/2"), 2, q("1e-6")) == std::vector<Rational>{1});
    // d^2 / d -> numerator d * 2d - d^2 = d^2
    ExpPoly o = ExpPoly::over_d(RationalPoly({0, 0, 1}));
    CHECK(o.derivative_sign_poly() == RationalPoly({0, 0, 1}));
    Bracket v = o.eval(3, q("1e-9"));
    CHECK(v.lo == 3);
}

TEST_CASE("derivative matches central differences") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        std::vector<Rational> c;
        int deg = static_cast<int>(rng() % 8) + 1;
        for (int i = 0; i <= deg; ++i) c.push_back(frac(static_cast<long>(rng() % 201) - 100, 1 + rng() % 17));
        RationalPoly p(c);
        Rational d = frac(static_cast<long>(rng() % 400) - 200, 100), h = q("1e-6");
        Rational fd = (p(d + h) - p(d - h)) / (2 * h);
        Rational err = abs(p.derivative()(d) - fd);
        CHECK(err <= Rational(deg * deg * 1000) * h * h);
    }
}

TEST_CASE("isolate_roots frozen examples") {
    Rational prec = q("1e-3");
    auto r = isolate_roots(RationalPoly({-2, 0, 1}), 0, 10, prec);
    REQUIRE(r.size() == 1);
    // |r - sqrt 2| <= prec  <=>  (r-prec)^2 <= 2 <= (r+prec)^2
    CHECK((r[0] - prec) * (r[0] - prec) <= 2);
    CHECK(2 <= (r[0] + prec) * (r[0] + prec));

    CHECK(isolate_roots(RationalPoly({1, 1}), 0, 2, prec).empty());

    auto dbl = isolate_roots(RationalPoly({1, -2, 1}), 0, 2, prec);
    REQUIRE(dbl.size() == 1);
    CHECK(abs(dbl[0] - 1) <= prec);

    CHECK_THROWS_AS(isolate_roots(RationalPoly(), 0, 1, prec), IdenticallyZero);
}

TEST_CASE("isolate_roots reports endpoint roots") {
    // (d - 1/2)(d - 2)(d - 1)
    RationalPoly p = RationalPoly({q("-1/2"), 1}) * RationalPoly({-2, 1}) * RationalPoly({-1, 1});
    auto r = isolate_roots(p, q("1/2"), 2, q("1e-9"));
    REQUIRE(r.size() == 3);
    CHECK(r[0] == q("1/2"));
    CHECK(abs(r[1] - 1) <= q("1e-9"));
    CHECK(r[2] == 2);
}

TEST_CASE("isolate_roots agrees with Sturm counts on random polynomials") {
    std::mt19937_64 rng(2024);
    Rational prec = q("1e-12");
    for (int t = 0; t < 150; ++t) {
        RationalPoly p = RationalPoly::constant(1);
        int deg = static_cast<int>(rng() % 8) + 1;
        // products of random linear/quadratic factors give repeated and clustered roots
        for (int i = 0; i < deg; ++i) {
            if (rng() % 3 == 0)
                p = p * RationalPoly({frac(static_cast<long>(rng() % 40) - 20, 1 + rng() % 7), 0, 1});
            else
                p = p * RationalPoly({frac(static_cast<long>(rng() % 40) - 20, 1 + rng() % 7), 1});
            if (p.degree() >= 8) break;
        }
        Rational lo = frac(static_cast<long>(rng() % 30) - 25, 3), hi = lo + frac(static_cast<long>(rng() % 60) + 1, 4);
        auto roots = isolate_roots(p, lo, hi, prec);
        CHECK(static_cast<long>(roots.size()) == sturm_count(p, lo, hi));
        RationalPoly sf = square_free_part(p);
        for (size_t i = 0; i < roots.size(); ++i) {
            Rational v = roots[i];
            CHECK(v >= lo);
            CHECK(v <= hi);
            if (i) CHECK(roots[i - 1] < v);
            Rational a = max(lo, v - prec), b = min(hi, v + prec);
            CHECK(sgn(sf(a)) * sgn(sf(b)) <= 0);
        }
    }
}

TEST_CASE("parallel and serial Taylor shifts agree") {
    std::mt19937_64 rng(5);
    IntPoly p(400);
    for (auto& c : p) c = Integer(static_cast<long>(rng() % 2000001) - 1000000);
    IntPoly a = p, b = p;
    int saved = omp_get_max_threads();
    omp_set_num_threads(4);
    taylor_shift1(a);
    omp_set_num_threads(saved);
    taylor_shift1_serial(b);
    CHECK(a == b);
    // p(x+1) evaluated at 0 is p(1)
    Integer s = 0;
    for (auto& c : p) s += c;
    CHECK(b[0] == s);
}

TEST_CASE("modular square-free check") {
    CHECK(square_free_modular(to_int_poly(RationalPoly({-2, 0, 1}))));
    CHECK_FALSE(square_free_modular(to_int_poly(RationalPoly({1, -2, 1}))));
}

TEST_CASE("solve_exact frozen examples") {
    auto x = solve_exact({{1, 0}, {0, 1}}, {q("1/3"), q("2/3")});
    CHECK(x == std::vector<Rational>{q("1/3"), q("2/3")});
    Matrix A{{2, 1}, {1, 3}};
    auto y = solve_exact(A, {1, 2});
    CHECK(y == std::vector<Rational>{q("1/5"), q("3/5")});
    CHECK(A[0][0] * y[0] + A[0][1] * y[1] == 1);
    CHECK(A[1][0] * y[0] + A[1][1] * y[1] == 2);
    CHECK_THROWS_AS(solve_exact({{1, 1}, {2, 2}}, {1, 2}), SingularMatrix);
}

TEST_CASE("solve_exact residual is zero on random systems") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        size_t n = 2 + rng() % 6;
        Matrix A(n, std::vector<Rational>(n));
        std::vector<Rational> b(n);
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j) A[i][j] = frac(static_cast<long>(rng() % 21) - 10, 1 + rng() % 9);
            A[i][i] += 50;
            b[i] = frac(static_cast<long>(rng() % 100), 1 + rng() % 13);
        }
        auto x = solve_exact(A, b);
        for (size_t i = 0; i < n; ++i) {
            Rational s = 0;
            for (size_t j = 0; j < n; ++j) s += A[i][j] * x[j];
            CHECK(s == b[i]);
        }
    }
}
