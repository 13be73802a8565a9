#include "actmc/synth.hpp"

#include "actmc/roots.hpp"

#include <algorithm>
#include <chrono>
#include <exception>

namespace actmc {

ExpPoly analytic_ranking(const AnalyticKernel& k, const Rational& g, const std::vector<Rational>& h,
                         Rational* offset) {
    ExpPoly r = k.cost;
    ExpPoly t = k.theta;
    t *= -g;
    r += t;
    for (const auto& [s, p] : k.pi) {
        if (h[s] == 0) continue;
        ExpPoly q = p;
        q *= h[s];
        r += q;
    }
    if (offset) *offset = k.cost_offset - g * k.theta_offset;
    return r;
}

namespace {

void normalize(std::vector<Rational>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<Rational> candidate_window(const ActionGrid& grid, const std::vector<Rational>& roots,
                                       const Rational& current) {
    Rational w = grid.step * 3 / 2;
    std::vector<Rational> out{current};
    auto add = [&](const Rational& c) {
        for (auto& d : grid.between(c - w, c + w)) out.push_back(std::move(d));
    };
    add(grid.lower);
    add(grid.upper);
    for (const auto& r : roots) add(r);
    normalize(out);
    return out;
}

std::vector<Rational> fallback_candidates(const ActionGrid& grid, const Rational& current) {
    std::vector<Rational> out{grid.lower, grid.upper, current};
    for (int i = 1; i <= 16; ++i) out.push_back(grid.snap(grid.lower + (grid.upper - grid.lower) * frac(i, 17)));
    normalize(out);
    return out;
}

std::vector<Rational> candidates(const RationalPoly& sign, const ActionGrid& grid, const Rational& current) {
    if (sign.is_zero()) return fallback_candidates(grid, current);
    if (grid.upper == grid.lower) return candidate_window(grid, {}, current);
    return candidate_window(grid, isolate_roots(sign, grid.lower, grid.upper, grid.step / 2), current);
}

Choice choose_action(const SemiMDPView& view, size_t s, const std::vector<Rational>& candidates,
                     const Rational& current, const Rational& g, const std::vector<Rational>& h,
                     const std::vector<Rational>& roots, const Rational& step) {
    std::vector<Rational> cand = candidates;
    cand.push_back(current);
    normalize(cand);
    Rational weight = 1 + abs(g);
    for (size_t t : view.alarm_kernel(s).support()) weight += abs(h[t]);

    std::vector<Rational> value;
    Rational err = 0;
    size_t best = 0;
    for (size_t i = 0; i < cand.size(); ++i) {
        value.push_back(ranking(view, s, cand[i], g, h));
        err = max(err, view.kernel(s, cand[i]).error * weight);
        if (value[i] < value[best]) best = i;
    }
    const Rational bound = value[best] + 2 * err;
    std::vector<size_t> tied;
    for (size_t i = 0; i < cand.size(); ++i) {
        if (value[i] > bound) continue;
        if (cand[i] == current) return {current, value[i]};
        tied.push_back(i);
    }

    auto root_between = [&](const Rational& a, const Rational& b) {
        for (const auto& r : roots)
            if (r >= a - step / 2 && r <= b + step / 2) return true;
        return false;
    };
    const AlarmKernel& k = view.alarm_kernel(s);
    std::optional<size_t> pick;
    for (size_t j = 0; j < tied.size();) {
        size_t e = j;
        while (e + 1 < tied.size() && !root_between(cand[tied[j]], cand[tied[e + 1]])) ++e;
        size_t rep = tied[j];
        if (e > j && k.ranking_slope(g, h, (cand[tied[j]] + cand[tied[e]]) / 2) < 0) rep = tied[e];
        if (!pick || value[rep] < value[*pick]) pick = rep;
        j = e + 1;
    }
    return {cand[*pick], value[*pick]};
}

ParameterFunction parameters_of(const Model& m, const Strategy& sigma) {
    StateClassification c = classify(m);
    ParameterFunction d(m.alarms.size());
    for (size_t a = 0; a < m.alarms.size(); ++a) d[a] = sigma.at(c.setting_of[a]);
    return d;
}

SynthesisResult synthesize(const SemiMDPView& view, const SynthesisOptions& opt) {
    if (!view.has_alarm_kernels()) throw std::invalid_argument("synthesize needs a kernel-backed view");
    std::vector<size_t> setting;
    for (size_t s : view.states())
        if (view.is_setting(s)) setting.push_back(s);

    SynthesisResult res;
    res.strategy = opt.initial.value_or(view.initial_strategy());
    for (size_t s : setting)
        if (!view.grid(s).contains(res.strategy.at(s)))
            throw std::invalid_argument("initial action of '" + view.model().states[s] + "' is not on the grid");

    struct StateStep {
        std::vector<Rational> cand;
        size_t roots = 0;
        long degree = 0;
        bool fallback = false;
        Choice choice;
        std::exception_ptr error;
    };

    for (size_t it = 0;; ++it) {
        if (it >= opt.max_iterations) throw std::runtime_error("policy iteration did not converge");
        auto t0 = std::chrono::steady_clock::now();
        res.gain = evaluate_strategy(view, res.strategy);
        const GainBias& gb = res.gain;

        std::vector<StateStep> steps(setting.size());
#pragma omp parallel for schedule(dynamic)
        for (size_t i = 0; i < setting.size(); ++i) {
            size_t s = setting[i];
            StateStep& st = steps[i];
            try {
                const AlarmKernel& k = view.alarm_kernel(s);
                const ActionGrid& grid = view.grid(s);
                const Rational& cur = res.strategy.at(s);
                st.degree = k.degree();
                std::vector<Rational> roots;
                if (grid.upper == grid.lower) {
                    st.cand = {cur};
                } else {
                    try {
                        roots = k.ranking_roots(gb.g, gb.h, grid.step / 2);
                        st.roots = roots.size();
                        st.cand = candidate_window(grid, roots, cur);
                    } catch (const IdenticallyZero&) {
                        st.fallback = true;
                        st.cand = fallback_candidates(grid, cur);
                    }
                }
                st.choice = choose_action(view, s, st.cand, cur, gb.g, gb.h, roots, grid.step);
            } catch (...) {
                st.error = std::current_exception();
            }
        }

        IterationDiagnostics diag;
        diag.iteration = it;
        diag.gain = gb.g;
        Strategy next = res.strategy;
        for (size_t i = 0; i < setting.size(); ++i) {
            const StateStep& st = steps[i];
            if (st.error) std::rethrow_exception(st.error);
            diag.candidates += st.cand.size();
            diag.max_candidates = std::max(diag.max_candidates, st.cand.size());
            diag.roots += st.roots;
            diag.max_degree = std::max(diag.max_degree, st.degree);
            diag.fallbacks += st.fallback;
            if (st.choice.d != res.strategy.at(setting[i])) {
                next[setting[i]] = st.choice.d;
                ++diag.improvements;
            }
        }
        diag.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        res.iterations.push_back(diag);
        if (diag.improvements == 0) break;
        res.strategy = std::move(next);
    }
    res.d = parameters_of(view.model(), res.strategy);
    return res;
}

SynthesisResult synthesize(const Model& m, const Rational& epsilon, const SynthesisOptions& opt) {
    ValidationReport rep = validate(m);
    if (!rep.ok()) {
        std::string msg = "model is not admissible:";
        for (const auto& i : rep.issues) msg += "\n  " + i;
        throw std::invalid_argument(msg);
    }
    SynthesisPlan p = plan(m, epsilon);
    SynthesisResult res = synthesize(SemiMDPView(m, p), opt);
    res.plan = std::move(p);
    return res;
}

}  // namespace actmc
