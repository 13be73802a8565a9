#include "actmc/model.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace actmc {

std::string Family::name() const {
    switch (kind) {
        case FamilyKind::Dirac: return "dirac";
        case FamilyKind::UniformZero: return "uniform-zero";
        case FamilyKind::UniformShift: return "uniform-shift";
        case FamilyKind::Exponential: return "exponential";
        case FamilyKind::Weibull: return "weibull";
    }
    return "?";
}

bool Alarm::enables(size_t s) const { return std::binary_search(enabled.begin(), enabled.end(), s); }

std::optional<size_t> Model::index_of(const std::string& name) const {
    for (size_t i = 0; i < states.size(); ++i)
        if (states[i] == name) return i;
    return std::nullopt;
}

size_t Model::index(const std::string& name) const {
    auto i = index_of(name);
    if (!i) throw std::out_of_range("unknown state '" + name + "'");
    return *i;
}

std::optional<size_t> Model::alarm_index(const std::string& name) const {
    for (size_t i = 0; i < alarms.size(); ++i)
        if (alarms[i].name == name) return i;
    return std::nullopt;
}

std::optional<size_t> Model::alarm_at(size_t s) const {
    for (size_t a = 0; a < alarms.size(); ++a)
        if (alarms[a].enables(s)) return a;
    return std::nullopt;
}

Rational Model::prob(size_t s, size_t t) const {
    Rational p = 0;
    for (const auto& tr : delay[s])
        if (tr.to == t) p += tr.prob;
    return p;
}

Rational Model::alarm_prob(size_t a, size_t s, size_t t) const {
    const Alarm& al = alarms[a];
    if (!al.enables(s) || al.rows[s].empty()) return s == t ? 1 : 0;
    Rational p = 0;
    for (const auto& tr : al.rows[s])
        if (tr.to == t) p += tr.prob;
    return p;
}

Rational Model::expected_delay_impulse(size_t s) const {
    Rational r = 0;
    for (const auto& tr : delay[s]) r += tr.prob * tr.impulse;
    return r;
}

Rational Model::expected_alarm_impulse(size_t s) const {
    auto a = alarm_at(s);
    if (!a) return 0;
    Rational r = 0;
    for (const auto& tr : alarms[*a].rows[s]) r += tr.prob * tr.impulse;
    return r;
}

Rational Model::r_max() const {
    Rational r = 0;
    for (const auto& x : rate_cost) r = max(r, x);
    return r;
}

Rational Model::i_max() const {
    Rational r = 0;
    for (const auto& row : delay)
        for (const auto& tr : row) r = max(r, tr.impulse);
    for (const auto& al : alarms)
        for (const auto& row : al.rows)
            for (const auto& tr : row) r = max(r, tr.impulse);
    return r;
}

Rational Model::p_min() const {
    Rational r = 1;
    auto scan = [&](const Row& row) {
        for (const auto& tr : row)
            if (tr.prob > 0) r = min(r, tr.prob);
    };
    for (const auto& row : delay) scan(row);
    for (const auto& al : alarms)
        for (const auto& row : al.rows) scan(row);
    return r;
}

namespace {

// Tarjan's algorithm; returns the component id of every vertex.
std::vector<size_t> scc(const std::vector<std::vector<size_t>>& adj, size_t& count) {
    size_t n = adj.size(), idx = 0;
    std::vector<long> index(n, -1), low(n, 0);
    std::vector<bool> on(n, false);
    std::vector<size_t> stack, comp(n, 0);
    count = 0;
    std::function<void(size_t)> visit = [&](size_t v) {
        index[v] = low[v] = static_cast<long>(idx++);
        stack.push_back(v);
        on[v] = true;
        for (size_t w : adj[v]) {
            if (index[w] < 0) {
                visit(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on[w]) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            size_t w;
            do {
                w = stack.back();
                stack.pop_back();
                on[w] = false;
                comp[w] = count;
            } while (w != v);
            ++count;
        }
    };
    for (size_t v = 0; v < n; ++v)
        if (index[v] < 0) visit(v);
    return comp;
}

void check_row(const Model& m, const Row& row, const std::string& where, std::vector<std::string>& issues) {
    Rational sum = 0;
    for (const auto& tr : row) {
        if (tr.to >= m.size()) {
            issues.push_back(where + ": target index out of range");
            continue;
        }
        if (tr.prob < 0) issues.push_back(where + ": negative probability to '" + m.states[tr.to] + "'");
        if (tr.impulse < 0) issues.push_back(where + ": negative impulse cost to '" + m.states[tr.to] + "'");
        sum += tr.prob;
    }
    if (sum != 1) issues.push_back(where + ": row sums to " + to_string(sum) + ", not 1");
}

}  // namespace

std::vector<std::vector<size_t>> setting_states(const Model& m) {
    std::vector<std::vector<size_t>> out(m.alarms.size());
    size_t n = m.size();
    std::vector<bool> entered_by_alarm(n, false);
    for (size_t b = 0; b < m.alarms.size(); ++b)
        for (size_t s : m.alarms[b].enabled)
            for (const auto& tr : m.alarms[b].rows[s])
                if (tr.prob > 0 && tr.to < n) entered_by_alarm[tr.to] = true;
    for (size_t a = 0; a < m.alarms.size(); ++a) {
        const Alarm& al = m.alarms[a];
        for (size_t s : al.enabled) {
            bool setting = entered_by_alarm[s];
            for (size_t t = 0; t < n && !setting; ++t) {
                if (al.enables(t)) continue;
                for (const auto& tr : m.delay[t])
                    if (tr.to == s && tr.prob > 0) setting = true;
            }
            if (setting) out[a].push_back(s);
        }
    }
    return out;
}

ValidationReport validate(const Model& m) {
    ValidationReport rep;
    auto& issues = rep.issues;
    size_t n = m.size();
    if (n == 0) {
        issues.push_back("model has no states");
        return rep;
    }
    {
        std::set<std::string> names(m.states.begin(), m.states.end());
        if (names.size() != n) issues.push_back("duplicate state names");
    }
    if (m.lambda <= 0) issues.push_back("rate lambda must be positive");
    if (m.delay.size() != n || m.rate_cost.size() != n) {
        issues.push_back("delay matrix / rate cost size does not match the state count");
        return rep;
    }
    for (size_t s = 0; s < n; ++s) {
        check_row(m, m.delay[s], "delay row of '" + m.states[s] + "'", issues);
        if (m.rate_cost[s] < 0) issues.push_back("negative rate cost in '" + m.states[s] + "'");
    }
    std::vector<long> owner(n, -1);
    bool structure_ok = true;
    for (size_t a = 0; a < m.alarms.size(); ++a) {
        const Alarm& al = m.alarms[a];
        std::string tag = "alarm '" + al.name + "'";
        if (al.rows.size() != n) {
            issues.push_back(tag + ": alarm matrix size does not match the state count");
            structure_ok = false;
            continue;
        }
        if (!(al.lower > 0)) issues.push_back(tag + ": lower bound must be positive (l_a must be positive)");
        if (al.upper < al.lower) issues.push_back(tag + ": upper bound below lower bound");
        if (al.family.kind == FamilyKind::UniformShift && !(al.family.width > 0))
            issues.push_back(tag + ": uniform-shift width must be positive");
        if (al.family.is_weibull() && al.family.shape < 1) issues.push_back(tag + ": Weibull shape must be >= 1");
        if (al.enabled.empty()) issues.push_back(tag + ": empty enabling set");
        for (size_t s : al.enabled) {
            if (s >= n) {
                issues.push_back(tag + ": enabled state index out of range");
                structure_ok = false;
                continue;
            }
            if (owner[s] >= 0)
                issues.push_back("enabling sets overlap: '" + m.states[s] + "' enabled by '" +
                                 m.alarms[static_cast<size_t>(owner[s])].name + "' and '" + al.name + "'");
            owner[s] = static_cast<long>(a);
            check_row(m, al.rows[s], tag + " row of '" + m.states[s] + "'", issues);
        }
        for (size_t s = 0; s < n; ++s) {
            if (al.enables(s) || al.rows[s].empty()) continue;
            bool identity = true;
            Rational self = 0;
            for (const auto& tr : al.rows[s]) {
                if (tr.to == s)
                    self += tr.prob;
                else if (tr.prob != 0)
                    identity = false;
            }
            if (!identity || self != 1)
                issues.push_back(tag + ": row of non-enabled state '" + m.states[s] + "' is not the identity");
        }
    }
    if (!structure_ok) return rep;

    // strong connectivity of the union graph
    std::vector<std::vector<size_t>> adj(n);
    for (size_t s = 0; s < n; ++s)
        for (const auto& tr : m.delay[s])
            if (tr.prob > 0 && tr.to < n) adj[s].push_back(tr.to);
    for (const auto& al : m.alarms)
        for (size_t s : al.enabled)
            for (const auto& tr : al.rows[s])
                if (tr.prob > 0 && tr.to < n) adj[s].push_back(tr.to);
    size_t comps = 0;
    scc(adj, comps);
    if (comps != 1) issues.push_back("not strongly connected (" + std::to_string(comps) + " components)");

    auto sets = setting_states(m);
    for (size_t a = 0; a < m.alarms.size(); ++a)
        if (sets[a].size() != 1)
            issues.push_back("alarm '" + m.alarms[a].name + "' is not localized: " + std::to_string(sets[a].size()) +
                             " setting states");
    return rep;
}

StateClassification classify(const Model& m) {
    StateClassification c;
    auto sets = setting_states(m);
    c.setting_of.resize(m.alarms.size());
    for (size_t a = 0; a < m.alarms.size(); ++a) {
        if (sets[a].size() != 1)
            throw ClassificationError("alarm '" + m.alarms[a].name + "' has " + std::to_string(sets[a].size()) +
                                      " setting states (must be exactly 1)");
        c.setting.push_back(sets[a][0]);
        c.owner[sets[a][0]] = a;
        c.setting_of[a] = sets[a][0];
    }
    std::sort(c.setting.begin(), c.setting.end());
    for (size_t s = 0; s < m.size(); ++s)
        if (!m.alarm_at(s)) c.off.push_back(s);
    c.regen = c.setting;
    c.regen.insert(c.regen.end(), c.off.begin(), c.off.end());
    std::sort(c.regen.begin(), c.regen.end(),
              [&](size_t x, size_t y) { return m.states[x] < m.states[y]; });
    return c;
}

void uniformize(Model& m, const std::vector<RateTransition>& rates) {
    size_t n = m.size();
    std::vector<Rational> out(n, 0);
    for (const auto& r : rates) {
        if (r.from >= n || r.to >= n) throw std::invalid_argument("uniformize: state index out of range");
        if (r.rate <= 0) throw std::invalid_argument("uniformize: rates must be positive");
        out[r.from] += r.rate;
    }
    Rational lam = 0;
    for (const auto& o : out) lam = max(lam, o);
    if (lam <= 0) throw std::invalid_argument("uniformize: no positive rates");
    m.lambda = lam;
    m.delay.assign(n, {});
    for (const auto& r : rates) {
        for (const auto& t : m.delay[r.from])
            if (t.to == r.to)
                throw std::invalid_argument("uniformize: duplicate transition " + m.states[r.from] + " -> " +
                                            m.states[r.to]);
        m.delay[r.from].push_back({r.to, r.rate / lam, r.impulse});
    }
    for (size_t s = 0; s < n; ++s) {
        Rational residual = (lam - out[s]) / lam;
        Row& row = m.delay[s];
        if (residual != 0) {
            auto self = std::find_if(row.begin(), row.end(), [&](const Transition& t) { return t.to == s; });
            if (self == row.end()) {
                row.push_back({s, residual, 0});
            } else {
                self->impulse = self->prob * self->impulse / (self->prob + residual);
                self->prob += residual;
            }
        }
        std::sort(row.begin(), row.end(), [](const Transition& a, const Transition& b) { return a.to < b.to; });
    }
}

}  // namespace actmc
