#include "doctest.h"

#include "actmc/kernels.hpp"
#include "actmc/roots.hpp"
#include "fixtures.hpp"

#include <cmath>
#include <functional>
#include <random>

using namespace actmc;

namespace {

// s leaves S_a at rate 1/2 towards u (impulse 3); the alarm moves s to t (impulse 5).
Model leak_model(Family fam) {
    Model m;
    m.states = {"s", "t", "u"};
    m.lambda = 1;
    m.delay = {{{0, frac(1, 2), 0}, {2, frac(1, 2), 3}}, {{0, 1, 0}}, {{0, 1, 0}}};
    m.rate_cost = {1, 0, 0};
    Alarm a;
    a.name = "a";
    a.enabled = {0};
    a.rows = {{{1, 1, 5}}, {}, {}};
    a.family = fam;
    a.lower = frac(1, 2);
    a.upper = 2;
    m.alarms.push_back(a);
    return m;
}

// For the leak model every quantity is a function of A = E[e^{-T/2}], T the ringing time.
struct Closed {
    double pi_t, pi_u, theta, cost;
};

Closed closed(double a) {
    double theta = 2 * (1 - a);
    return {a, 1 - a, theta, theta + 3 * (1 - a) + 5 * a};
}

double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
    double h = (hi - lo) / n, s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

double laplace_half(const Family& fam, double d) {
    switch (fam.kind) {
        case FamilyKind::Dirac: return std::exp(-d / 2);
        case FamilyKind::UniformZero: return 2 / d * (1 - std::exp(-d / 2));
        case FamilyKind::UniformShift: {
            double w = to_double(fam.width);
            return 2 / w * (std::exp(-d / 2) - std::exp(-(d + w) / 2));
        }
        case FamilyKind::Exponential: return d / (d + 0.5);
        case FamilyKind::Weibull: {
            double k = fam.shape;
            // E[e^{-T/2}] = 1 - 1/2 int e^{-t/2} P(T > t) dt
            double hi = 40 / d;
            return 1 - 0.5 * simpson([&](double t) { return std::exp(-t / 2 - std::pow(d * t, k)); }, 0, hi);
        }
    }
    return 0;
}

Rational value_of(const PointKernel& k, size_t s) {
    for (const auto& [t, v] : k.pi)
        if (t == s) return v;
    return 0;
}

const std::vector<Family> all_families = {Family::dirac(), Family::uniform_zero(), Family::uniform_shift(2),
                                          Family::exponential(), Family::weibull(2)};

}  // namespace

TEST_CASE("poisson truncation order") {
    CHECK(poisson_truncation_order(1, 1, frac(1, 100), 1, 2) == 4);
    CHECK(poisson_truncation_order(1, 1, frac(1, 2), 1, 10) == 11);
}

TEST_CASE("certified poisson tail dominates the actual tail") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> num(1, 400), kd(0, 60);
    for (int i = 0; i < 1000; ++i) {
        Rational mu = frac(num(rng), 20);
        unsigned long k = static_cast<unsigned long>(kd(rng));
        double m = to_double(mu), term = std::exp(-m), head = 0;
        for (unsigned long j = 0; j <= k; ++j) {
            head += term;
            term *= m / static_cast<double>(j + 1);
        }
        double actual = std::max(0.0, 1 - head);
        CHECK(to_double(poisson_tail_bound(mu, k)) >= actual * (1 - 1e-9) - 1e-15);
    }
}

TEST_CASE("poisson weights bracket the pmf") {
    std::vector<Integer> lo, hi;
    poisson_weights(3, 10, 60, lo, hi);
    double f = 1;
    for (size_t m = 0; m <= 10; ++m) {
        if (m > 0) f *= 3.0 / static_cast<double>(m);
        double p = std::exp(-3.0) * f;
        CHECK(to_double(dyadic(lo[m], -60)) <= p * (1 + 1e-12));
        CHECK(to_double(dyadic(hi[m], -60)) >= p * (1 - 1e-12));
        CHECK(hi[m] - lo[m] < 64);
    }
}

TEST_CASE("T1 kernels match the closed forms") {
    Rational eta = dyadic(1, -30);
    SUBCASE("Dirac: Theta = C = d and the alarm always fires") {
        auto k = build_kernel(t1_model(), 0, eta);
        CHECK(k->support() == std::vector<size_t>{1});
        for (Rational d : {frac(1, 2), Rational(1), frac(3, 2), Rational(2)}) {
            PointKernel p = k->point(d);
            CHECK(p.pi.size() == 1);
            CHECK(p.pi[0].second == 1);
            CHECK(abs(p.theta - d) <= p.error);
            CHECK(abs(p.cost - d) <= p.error);
            CHECK(p.error <= eta);
        }
    }
    SUBCASE("uniform from zero: Theta = d / 2") {
        auto k = build_kernel(t1_model(Family::uniform_zero()), 0, eta);
        PointKernel p = k->point(1);
        CHECK(abs(p.theta - frac(1, 2)) <= p.error);
    }
    SUBCASE("uniform shift of width 2: Theta = d + 1") {
        auto k = build_kernel(t1_model(Family::uniform_shift(2)), 0, eta);
        PointKernel p = k->point(1);
        CHECK(abs(p.theta - 2) <= p.error);
    }
    SUBCASE("exponential with rate d: Theta = 1 / d") {
        auto k = build_kernel(t1_model(Family::exponential()), 0, eta);
        PointKernel p = k->point(2);
        CHECK(abs(p.theta - frac(1, 2)) <= p.error);
    }
}

TEST_CASE("point kernels of every family match the leak closed forms") {
    Rational eta = dyadic(1, -30);
    for (const auto& fam : all_families) {
        CAPTURE(fam.name());
        Model m = leak_model(fam);
        REQUIRE(validate(m).ok());
        auto k = build_kernel(m, 0, eta);
        CHECK(k->support() == std::vector<size_t>{1, 2});
        for (int i = 0; i <= 6; ++i) {
            Rational d = frac(1, 2) + frac(i, 4);
            CAPTURE(to_string(d));
            PointKernel p = k->point(d);
            Closed c = closed(laplace_half(fam, to_double(d)));
            double tol = to_double(p.error) + 1e-9;
            CHECK(p.error <= eta);
            CHECK(value_of(p, 1) + value_of(p, 2) == 1);
            CHECK(std::abs(to_double(value_of(p, 1)) - c.pi_t) <= tol);
            CHECK(std::abs(to_double(value_of(p, 2)) - c.pi_u) <= tol);
            CHECK(std::abs(to_double(p.theta) - c.theta) <= tol);
            CHECK(std::abs(to_double(p.cost) - c.cost) <= tol);
        }
    }
}

TEST_CASE("analytic kernels agree with a finer point oracle") {
    Rational kappa = dyadic(1, -16);
    for (const auto& fam : all_families) {
        CAPTURE(fam.name());
        Model m = leak_model(fam);
        auto coarse = build_kernel(m, 0, kappa);
        auto fine = build_kernel(m, 0, kappa / 128);
        AnalyticKernel a = coarse->analytic();
        CHECK(a.pi.size() == 2);
        for (int i = 0; i < 50; ++i) {
            Rational d = frac(1, 2) + frac(3 * i, 2 * 49);
            CAPTURE(to_string(d));
            PointKernel p = fine->point(d);
            Rational tol = kappa / 1024;
            auto near = [&](const ExpPoly& e, const Rational& off, const Rational& truth) {
                Bracket b = eval_component(e, off, d, tol);
                return abs(b.lo - truth) <= kappa + p.error && abs(b.hi - truth) <= kappa + p.error;
            };
            CHECK(near(a.theta, a.theta_offset, p.theta));
            CHECK(near(a.cost, a.cost_offset, p.cost));
            CHECK(near(a.pi[0].second, 0, value_of(p, a.pi[0].first)));
            CHECK(near(a.pi[1].second, 0, value_of(p, a.pi[1].first)));
        }
    }
}

TEST_CASE("ranking roots locate the minimizer of the symbolic ranking") {
    // s moves to v, v leaves towards u at rate 1/2, only v pays; with g = 5
    // the Dirac slope 10 P(v) - 5 P(S_a) vanishes at e^{-d/2} = 2/3.
    auto model = [](Family fam) {
        Model m;
        m.states = {"s", "t", "u", "v"};
        m.lambda = 1;
        m.delay = {{{3, 1, 0}}, {{0, 1, 0}}, {{0, 1, 0}}, {{2, frac(1, 2), 0}, {3, frac(1, 2), 0}}};
        m.rate_cost = {0, 0, 0, 10};
        Alarm a;
        a.name = "a";
        a.enabled = {0, 3};
        a.rows = {{{1, 1, 0}}, {}, {}, {{1, 1, 0}}};
        a.family = fam;
        a.lower = frac(1, 2);
        a.upper = 2;
        m.alarms.push_back(a);
        return m;
    };
    Rational kappa = dyadic(1, -20), g = 5;
    std::vector<Rational> h(4, 0);
    {
        auto k = build_kernel(model(Family::dirac()), 0, kappa);
        auto roots = k->ranking_roots(g, h, frac(1, 10000));
        REQUIRE(roots.size() == 1);
        CHECK(std::abs(to_double(roots[0]) - 2 * std::log(1.5)) < 1e-3);
    }
    for (const auto& fam : all_families) {
        CAPTURE(fam.name());
        auto k = build_kernel(model(fam), 0, kappa);
        auto roots = k->ranking_roots(g, h, frac(1, 1000));
        auto val = [&](const Rational& d) {
            Bracket b = k->ranking_bracket(d, g, h);
            return to_double((b.lo + b.hi) / 2);
        };
        // every sign change of the scanned slope lies near a reported root
        Rational step = frac(3, 200);
        double prev = val(frac(1, 2)), prev_slope = 0;
        int changes = 0;
        for (int i = 1; i <= 100; ++i) {
            Rational d = frac(1, 2) + step * i;
            double v = val(d), slope = v - prev;
            if (i > 1 && ((slope > 1e-9 && prev_slope < -1e-9) || (slope < -1e-9 && prev_slope > 1e-9))) {
                ++changes;
                bool found = false;
                for (const auto& r : roots) found |= abs(r - d) <= 3 * step;
                CHECK(found);
            }
            prev = v;
            prev_slope = slope;
        }
        CHECK(roots.size() >= static_cast<size_t>(changes));
    }
}

TEST_CASE("constant ranking is identically zero") {
    // A kernel whose sign function vanishes: zero costs, h constant on the support.
    Model m = t1_model();
    m.rate_cost = {0, 0};
    auto k = build_kernel(m, 0, dyadic(1, -20));
    CHECK_THROWS_AS(k->ranking_roots(0, {0, 1}, frac(1, 100)), IdenticallyZero);
}

TEST_CASE("kernel errors") {
    Model m = t1_model();
    auto k = build_kernel(m, 0, dyadic(1, -20));
    CHECK_THROWS_AS(k->point(3), KernelError);
    CHECK_THROWS_AS(build_kernel(m, 1, dyadic(1, -20)), KernelError);
    CHECK_THROWS_AS(uniform_kernel(m, 0, dyadic(1, -20)), KernelError);
    PointKernel off = point_kernel(m, 1, 1, dyadic(1, -20));
    CHECK(off.pi == std::vector<std::pair<size_t, Rational>>{{0, 1}});
    CHECK(off.theta == 1);
    CHECK(off.cost == 0);
}
