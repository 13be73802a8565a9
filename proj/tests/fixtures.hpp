#pragma once

#include "actmc/model.hpp"

// Two-state model: s --alarm--> t --delay--> s, delay self-loop on s.
inline actmc::Model t1_model(actmc::Family fam = actmc::Family::dirac()) {
    using namespace actmc;
    Model m;
    m.states = {"s", "t"};
    m.lambda = 1;
    m.delay = {{{0, 1, 0}}, {{0, 1, 0}}};
    m.rate_cost = {1, 0};
    Alarm a;
    a.name = "a";
    a.enabled = {0};
    a.rows = {{{1, 1, 0}}, {}};
    a.family = fam;
    a.lower = frac(1, 2);
    a.upper = 2;
    m.alarms.push_back(a);
    return m;
}

#include <random>

// Random strongly connected model: alarm k is enabled only in state k, so each
// alarm is localized with setting state k.  A delay ring 0 -> 1 -> ... keeps
// the graph strongly connected.
inline actmc::Model random_model(std::mt19937_64& rng, size_t n, size_t alarms, actmc::Family fam) {
    using namespace actmc;
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto row = [&](size_t from, bool allow_self) {
        std::vector<std::pair<size_t, int>> w;
        for (size_t t = 0; t < n; ++t) {
            bool must = t == (from + 1) % n;
            if ((t == from && !allow_self) || (!must && pick(0, 1) == 0)) continue;
            w.emplace_back(t, pick(1, 5));
        }
        int total = 0;
        for (const auto& [t, x] : w) total += x;
        Row r;
        for (const auto& [t, x] : w) r.push_back({t, frac(x, total), pick(0, 3)});
        return r;
    };
    Model m;
    for (size_t s = 0; s < n; ++s) m.states.push_back("s" + std::to_string(s));
    m.lambda = frac(pick(1, 8), 4);
    for (size_t s = 0; s < n; ++s) {
        m.delay.push_back(row(s, true));
        m.rate_cost.push_back(pick(0, 6));
    }
    for (size_t k = 0; k < alarms; ++k) {
        Alarm a;
        a.name = "a" + std::to_string(k);
        a.enabled = {k};
        a.rows.assign(n, {});
        a.rows[k] = row(k, false);
        a.family = fam;
        a.lower = frac(pick(1, 4), 4);
        a.upper = a.lower + pick(1, 8);
        m.alarms.push_back(a);
    }
    return m;
}
