#include "doctest.h"

#include "actmc/synth.hpp"
#include "fixtures.hpp"

#include <chrono>
#include <random>

using namespace actmc;

TEST_CASE("analytic ranking") {
    Model m = t1_model();
    auto k = build_kernel(m, 0, dyadic(1, -20));
    AnalyticKernel a = k->analytic();
    Rational off = 1;
    ExpPoly c = analytic_ranking(a, 0, {0, 0}, &off);
    CHECK(c.poly() == a.cost.poly());
    CHECK(c.rate() == a.cost.rate());
    CHECK(off == 0);

    std::vector<Rational> h = {frac(1, 3), frac(-2, 7)}, h2 = {frac(2, 3), frac(-4, 7)};
    ExpPoly one = analytic_ranking(a, frac(1, 3), h), two = analytic_ranking(a, frac(1, 3), h2);
    ExpPoly diff = two;
    ExpPoly neg = one;
    neg *= -1;
    diff += neg;
    ExpPoly pi = a.pi[0].second;
    pi *= h[a.pi[0].first];
    CHECK(diff.poly() == pi.poly());
}

TEST_CASE("analytic ranking agrees with the point ranking") {
    Model m = t1_model();
    m.delay[0] = {{0, frac(1, 2), 0}, {1, frac(1, 2), 1}};
    Rational xi = dyadic(1, -20);
    ActionGrid grid{frac(1, 2), 2, frac(3, 40)};
    SemiMDPView v(m, {{0, grid}}, xi);
    Rational g = frac(1, 3);
    std::vector<Rational> h = {frac(1, 5), 0};
    AnalyticKernel a = v.alarm_kernel(0).analytic();
    ExpPoly f = analytic_ranking(a, g, h);
    auto pts = grid.points();
    CHECK(pts.size() == 21);
    for (size_t i = 0; i < 20; ++i) {
        Bracket b = f.eval(pts[i], xi / 16);
        Rational r = ranking(v, 0, pts[i], g, h);
        CHECK(abs(b.lo - r) <= 2 * xi);
        CHECK(abs(b.hi - r) <= 2 * xi);
    }
}

TEST_CASE("candidate windows") {
    ActionGrid g{frac(1, 2), 2, frac(1, 1000)};
    auto c = candidates(RationalPoly({1, -1}), g, frac(1, 2));
    size_t near_root = 0, near_lo = 0, near_hi = 0;
    for (const auto& d : c) {
        CHECK(g.contains(d));
        if (abs(d - 1) <= frac(3, 2000)) ++near_root;
        if (d - frac(1, 2) <= frac(3, 2000)) ++near_lo;
        if (2 - d <= frac(3, 2000)) ++near_hi;
    }
    CHECK(near_root >= 1);
    CHECK(near_root <= 4);
    CHECK(near_lo == 2);
    CHECK(near_hi == 2);
    CHECK(c.size() == near_root + near_lo + near_hi);

    // T1 style: no interior roots
    auto mono = candidates(RationalPoly({1}), g, frac(3, 4));
    CHECK(mono == std::vector<Rational>{frac(1, 2), frac(501, 1000), frac(3, 4), frac(1999, 1000), 2});

    // a root at the upper end does not duplicate it
    auto at_u = candidate_window(g, {2}, 2);
    CHECK(at_u == std::vector<Rational>{frac(1, 2), frac(501, 1000), frac(1999, 1000), 2});

    auto fb = candidates(RationalPoly(), g, frac(1, 2));
    CHECK(fb.size() == 18);
    for (const auto& d : fb) CHECK(g.contains(d));
}

TEST_CASE("T1 synthesis") {
    auto t0 = std::chrono::steady_clock::now();
    SynthesisResult r = synthesize(t1_model(), frac(1, 100));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.d.size() == 1);
    CHECK(r.d[0] == frac(1, 2));
    CHECK(abs(r.gain.g - frac(1, 3)) <= frac(1, 100));
    CHECK(secs < 1.0);
    for (size_t i = 1; i < r.iterations.size(); ++i) CHECK(r.iterations[i].gain <= r.iterations[i - 1].gain);

    SynthesisOptions again;
    again.initial = r.strategy;
    SynthesisResult s = synthesize(t1_model(), frac(1, 100), again);
    CHECK(s.iterations.size() == 1);
    CHECK(s.iterations[0].improvements == 0);
    CHECK(s.strategy == r.strategy);

    SynthesisOptions top;
    top.initial = Strategy{{0, 2}, {1, 0}};
    SynthesisResult t = synthesize(t1_model(), frac(1, 100), top);
    CHECK(t.d[0] == frac(1, 2));
}

TEST_CASE("inadmissible models are refused") {
    Model m = t1_model();
    m.delay[0][0].prob = frac(9, 10);
    CHECK_THROWS_AS(synthesize(m, frac(1, 100)), std::invalid_argument);
}

TEST_CASE("symbolic and explicit policy iteration agree on a shared coarse grid") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        Family fam = trial % 2 ? Family::uniform_zero() : Family::dirac();
        size_t n = 2 + static_cast<size_t>(trial % 4);
        Model m = random_model(rng, n, 1, fam);
        REQUIRE(validate(m).ok());
        const Alarm& a = m.alarms[0];
        ActionGrid grid{a.lower, a.upper, (a.upper - a.lower) / 20};
        SemiMDPView v(m, {{0, grid}}, dyadic(1, -30));
        SynthesisResult sym = synthesize(v);
        PolicyIterationResult ex = explicit_policy_iteration(v, {});
        CAPTURE(trial);
        CHECK(sym.gain.g == ex.gain.g);
        CHECK(sym.strategy == ex.strategy);

        // dense check of the chosen action against every grid point
        auto pts = grid.points();
        Rational chosen = ranking(v, 0, sym.strategy.at(0), sym.gain.g, sym.gain.h);
        for (const auto& d : pts) CHECK(ranking(v, 0, d, sym.gain.g, sym.gain.h) >= chosen);
    }
}
