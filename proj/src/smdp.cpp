#include "actmc/smdp.hpp"

#include "actmc/linsolve.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <mutex>

namespace actmc {

Integer ActionGrid::size() const {
    if (upper == lower) return 1;
    return ceil((upper - lower) / step) + 1;
}

Rational ActionGrid::at(const Integer& i) const {
    if (i + 1 < size()) return lower + step * Rational(i);
    return upper;
}

bool ActionGrid::contains(const Rational& d) const {
    if (d == upper) return true;
    if (d < lower || d > upper) return false;
    Rational i = (d - lower) / step;
    return i.get_den() == 1;
}

Rational ActionGrid::snap(const Rational& d) const {
    if (d <= lower) return lower;
    if (d >= upper) return upper;
    Integer i = floor((d - lower) / step);
    Rational a = at(i), b = at(i + 1);
    return b - d < d - a ? b : a;
}

std::vector<Rational> ActionGrid::between(const Rational& lo, const Rational& hi) const {
    std::vector<Rational> out;
    if (hi < lower || lo > upper) return out;
    if (upper != lower) {
        Integer i = lo <= lower ? Integer(0) : ceil((lo - lower) / step);
        for (Rational d = lower + step * Rational(i); d < upper && d <= hi; d += step) out.push_back(d);
    }
    if (lo <= upper && upper <= hi && (out.empty() || out.back() != upper)) out.push_back(upper);
    return out;
}

std::vector<Rational> ActionGrid::points(size_t cap) const {
    Integer n = size();
    if (n > static_cast<unsigned long>(cap))
        throw std::length_error("grid has " + n.get_str() + " points, cap is " + std::to_string(cap));
    return between(lower, upper);
}

struct SemiMDPView::Impl {
    Model model;
    StateClassification cls;
    std::map<size_t, ActionGrid> grids;
    ActionEvaluator eval;
    Rational accuracy;

    struct Slot {
        std::once_flag once;
        std::mutex mu;
        std::unique_ptr<AlarmKernel> kernel;
    };
    std::map<size_t, std::unique_ptr<Slot>> slots;

    std::mutex mu;
    std::map<std::pair<size_t, Rational>, PointKernel> cache;

    Impl(const Model& m, std::map<size_t, ActionGrid> g) : model(m), cls(classify(m)), grids(std::move(g)) {
        for (size_t s : cls.off) grids[s] = ActionGrid{0, 0, 1};
        for (size_t s : cls.setting) {
            if (!grids.count(s)) throw std::invalid_argument("no grid for setting state '" + m.states[s] + "'");
            slots[s] = std::make_unique<Slot>();
        }
    }

    Slot& slot(size_t s) {
        auto it = slots.find(s);
        if (it == slots.end()) throw std::invalid_argument("'" + model.states[s] + "' is not a setting state");
        return *it->second;
    }

    AlarmKernel& kernel(size_t s) {
        Slot& sl = slot(s);
        std::call_once(sl.once, [&] { sl.kernel = build_kernel(model, s, accuracy); });
        return *sl.kernel;
    }
};

namespace {

std::map<size_t, ActionGrid> plan_grids(const Model& m, const SynthesisPlan& plan) {
    std::map<size_t, ActionGrid> g;
    StateClassification c = classify(m);
    for (size_t s : c.setting) {
        const Alarm& a = m.alarms[c.owner.at(s)];
        g[s] = ActionGrid{a.lower, a.upper, plan.delta.at(s)};
    }
    return g;
}

}  // namespace

SemiMDPView::SemiMDPView(const Model& m, const SynthesisPlan& plan)
    : SemiMDPView(m, plan_grids(m, plan), plan.kernel_accuracy) {}

SemiMDPView::SemiMDPView(const Model& m, std::map<size_t, ActionGrid> grids, const Rational& accuracy)
    : impl_(std::make_shared<Impl>(m, std::move(grids))) {
    impl_->accuracy = accuracy;
}

SemiMDPView::SemiMDPView(const Model& m, std::map<size_t, ActionGrid> grids, ActionEvaluator eval)
    : impl_(std::make_shared<Impl>(m, std::move(grids))) {
    impl_->eval = std::move(eval);
}

const Model& SemiMDPView::model() const { return impl_->model; }
const std::vector<size_t>& SemiMDPView::states() const { return impl_->cls.regen; }
bool SemiMDPView::is_setting(size_t s) const { return impl_->cls.owner.count(s) > 0; }
bool SemiMDPView::has_alarm_kernels() const { return !impl_->eval; }

const ActionGrid& SemiMDPView::grid(size_t s) const {
    auto it = impl_->grids.find(s);
    if (it == impl_->grids.end())
        throw std::invalid_argument("'" + impl_->model.states[s] + "' is not a regeneration state");
    return it->second;
}

const AlarmKernel& SemiMDPView::alarm_kernel(size_t s) const {
    if (impl_->eval) throw std::logic_error("view has no alarm kernels");
    return impl_->kernel(s);
}

PointKernel SemiMDPView::kernel(size_t s, const Rational& d) const {
    Impl& im = *impl_;
    if (!is_setting(s)) {
        grid(s);
        return off_state_kernel(im.model, s);
    }
    {
        std::lock_guard lock(im.mu);
        auto it = im.cache.find({s, d});
        if (it != im.cache.end()) return it->second;
    }
    PointKernel k;
    if (im.eval) {
        k = im.eval(s, d);
    } else {
        AlarmKernel& ak = im.kernel(s);
        std::lock_guard lock(im.slot(s).mu);
        k = ak.point(d);
    }
    std::lock_guard lock(im.mu);
    im.cache.emplace(std::make_pair(s, d), k);
    return k;
}

Strategy SemiMDPView::initial_strategy() const {
    Strategy sigma;
    for (size_t s : states()) sigma[s] = grid(s).lower;
    return sigma;
}

namespace {

const Rational& action_of(const SemiMDPView& view, const Strategy& sigma, size_t s) {
    auto it = sigma.find(s);
    if (it == sigma.end())
        throw std::invalid_argument("strategy has no action for '" + view.model().states[s] + "'");
    return it->second;
}

std::string class_list(const Model& m, const std::vector<std::vector<size_t>>& classes) {
    std::string out;
    for (const auto& c : classes) {
        out += out.empty() ? "{" : ", {";
        for (size_t i = 0; i < c.size(); ++i) out += (i ? ", " : "") + m.states[c[i]];
        out += "}";
    }
    return out;
}

}  // namespace

std::vector<std::vector<size_t>> recurrent_classes(const SemiMDPView& view, const Strategy& sigma) {
    const auto& st = view.states();
    size_t n = st.size();
    std::map<size_t, size_t> pos;
    for (size_t i = 0; i < n; ++i) pos[st[i]] = i;
    std::vector<std::vector<size_t>> adj(n);
    for (size_t i = 0; i < n; ++i)
        for (const auto& [t, p] : view.kernel(st[i], action_of(view, sigma, st[i])).pi)
            if (p > 0) adj[i].push_back(pos.at(t));

    // Tarjan
    std::vector<long> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<bool> on_stack(n, false);
    std::vector<size_t> stack;
    long counter = 0, ncomp = 0;
    std::function<void(size_t)> visit = [&](size_t v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
        for (size_t w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on_stack[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on_stack[w] = false;
                comp[w] = ncomp;
            } while (w != v);
            ++ncomp;
        }
    };
    for (size_t v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);

    std::vector<bool> bottom(static_cast<size_t>(ncomp), true);
    for (size_t v = 0; v < n; ++v)
        for (size_t w : adj[v])
            if (comp[v] != comp[w]) bottom[static_cast<size_t>(comp[v])] = false;
    std::map<long, std::vector<size_t>> classes;
    for (size_t v = 0; v < n; ++v)
        if (bottom[static_cast<size_t>(comp[v])]) classes[comp[v]].push_back(st[v]);
    std::vector<std::vector<size_t>> out;
    for (auto& [c, members] : classes) {
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    std::sort(out.begin(), out.end());
    return out;
}

GainBias evaluate_strategy(const SemiMDPView& view, const Strategy& sigma, std::optional<size_t> ref) {
    const Model& m = view.model();
    const auto& st = view.states();
    size_t n = st.size();
    auto classes = recurrent_classes(view, sigma);
    if (classes.size() != 1)
        throw NotUnichain(classes, "induced chain not unichain: recurrent classes " + class_list(m, classes));

    size_t r = ref.value_or(st.front());
    std::map<size_t, size_t> col;  // h unknowns follow g in column 0
    for (size_t s : st)
        if (s != r) col[s] = col.size() + 1;
    if (col.size() != n - 1) throw std::invalid_argument("reference state is not a regeneration state");

    std::vector<PointKernel> k;
    for (size_t s : st) k.push_back(view.kernel(s, action_of(view, sigma, s)));

    // h(s) + g Theta_s - sum_t Pi_s(t) h(t) = C_s
    Matrix A(n, std::vector<Rational>(n));
    std::vector<Rational> b(n);
    for (size_t i = 0; i < n; ++i) {
        A[i][0] = k[i].theta;
        if (st[i] != r) A[i][col[st[i]]] += 1;
        for (const auto& [t, p] : k[i].pi)
            if (t != r) A[i][col.at(t)] -= p;
        b[i] = k[i].cost;
    }
    std::vector<Rational> x = solve_exact(A, b);

    GainBias gb;
    gb.g = x[0];
    gb.ref = r;
    gb.h.assign(m.size(), 0);
    for (const auto& [s, c] : col) gb.h[s] = x[c];
    for (size_t i = 0; i < n; ++i) {
        Rational rhs = k[i].cost - gb.g * k[i].theta;
        for (const auto& [t, p] : k[i].pi) rhs += p * gb.h[t];
        if (rhs != gb.h[st[i]]) throw std::logic_error("gain/bias residual is not zero");
    }
    return gb;
}

Rational ranking(const SemiMDPView& view, size_t s, const Rational& d, const Rational& g,
                 const std::vector<Rational>& h) {
    PointKernel k = view.kernel(s, d);
    Rational v = k.cost - g * k.theta;
    for (const auto& [t, p] : k.pi) v += p * h[t];
    return v;
}

Choice best_action(const SemiMDPView& view, size_t s, const std::vector<Rational>& candidates,
                   const Rational& current, const Rational& g, const std::vector<Rational>& h) {
    Choice cur{current, ranking(view, s, current, g, h)};
    Choice best = cur;
    for (const Rational& d : candidates) {
        if (d == current) continue;
        Rational v = ranking(view, s, d, g, h);
        if (v < best.value || (v == best.value && best.d != current && d < best.d)) best = {d, v};
    }
    return best;
}

PolicyIterationResult explicit_policy_iteration(const SemiMDPView& view,
                                                const std::map<size_t, std::vector<Rational>>& grids,
                                                size_t cap) {
    std::map<size_t, std::vector<Rational>> actions;
    size_t total = 0;
    for (size_t s : view.states()) {
        std::vector<Rational> a;
        if (!view.is_setting(s)) {
            a = {0};
        } else if (auto it = grids.find(s); it != grids.end()) {
            a = it->second;
        } else {
            Integer n = view.grid(s).size();
            if (n > static_cast<unsigned long>(cap))
                throw GridTooLarge(n.fits_ulong_p() ? total + n.get_ui() : SIZE_MAX, cap);
            a = view.grid(s).points(cap);
        }
        if (a.empty()) throw std::invalid_argument("empty action set for '" + view.model().states[s] + "'");
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        total += a.size();
        actions[s] = std::move(a);
    }
    if (total > cap) throw GridTooLarge(total, cap);

    PolicyIterationResult res;
    for (const auto& [s, a] : actions) res.strategy[s] = a.front();
    for (;;) {
        res.gain = evaluate_strategy(view, res.strategy);
        res.gains.push_back(res.gain.g);
        Strategy next = res.strategy;
        bool changed = false;
        for (const auto& [s, a] : actions) {
            if (a.size() == 1) continue;
            Choice c = best_action(view, s, a, res.strategy[s], res.gain.g, res.gain.h);
            if (c.d != res.strategy[s]) {
                next[s] = c.d;
                changed = true;
            }
        }
        if (!changed) break;
        res.strategy = std::move(next);
        ++res.iterations;
    }
    return res;
}

}  // namespace actmc
