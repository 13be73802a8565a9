#include "actmc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace actmc {

namespace {

constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct Choices {
    std::vector<double> cum;
    std::vector<size_t> to;
    std::vector<double> impulse;

    explicit Choices(const Row& r) {
        double acc = 0;
        for (const auto& t : r) {
            acc += to_double(t.prob);
            cum.push_back(acc);
            to.push_back(t.to);
            impulse.push_back(to_double(t.impulse));
        }
        if (!cum.empty()) cum.back() = 1;
    }
    size_t pick(double u) const {
        auto it = std::lower_bound(cum.begin(), cum.end(), u);
        return std::min<size_t>(it - cum.begin(), cum.size() - 1);
    }
};

// The model in doubles, with the parameter of every alarm fixed.
struct Compiled {
    double lambda = 0;
    std::vector<double> rate;
    std::vector<Choices> delay, fire;  // fire[s] is the row of the alarm enabled in s
    std::vector<int> alarm;           // -1 when no alarm is enabled
    std::vector<Family> family;
    std::vector<double> d;

    Compiled(const Model& m, const ParameterFunction& params) : lambda(to_double(m.lambda)), alarm(m.size(), -1) {
        if (params.size() != m.alarms.size()) throw std::invalid_argument("one parameter per alarm expected");
        for (size_t a = 0; a < m.alarms.size(); ++a) {
            const Alarm& al = m.alarms[a];
            if (params[a] < al.lower || params[a] > al.upper)
                throw std::invalid_argument("parameter of alarm '" + al.name + "' is outside its interval");
            family.push_back(al.family);
            d.push_back(to_double(params[a]));
        }
        for (size_t s = 0; s < m.size(); ++s) {
            rate.push_back(to_double(m.rate_cost[s]));
            delay.emplace_back(m.delay[s]);
            auto a = m.alarm_at(s);
            Row r;
            if (a) {
                alarm[s] = static_cast<int>(*a);
                r = m.alarms[*a].rows[s];
                if (r.empty()) r = {{s, 1, 0}};
            }
            fire.emplace_back(r);
        }
    }

    double ring(size_t s, SplitMix64& rng) const {
        size_t a = static_cast<size_t>(alarm[s]);
        return sample_ringing(family[a], d[a], rng.uniform());
    }
};

// One transition out of s.  `eta` is the remaining timer of the alarm
// enabled in s.  Returns the sojourn; sets the target, the impulse, and
// whether the timer of the target is fresh.
struct Step {
    double dt, impulse;
    size_t to;
    bool alarm_fired, fresh;
};

Step step(const Compiled& c, size_t s, double eta, SplitMix64& rng) {
    Step st;
    double t = -std::log(rng.uniform()) / c.lambda;
    if (c.alarm[s] >= 0 && eta <= t) {
        size_t k = c.fire[s].pick(rng.uniform());
        st = {eta, c.fire[s].impulse[k], c.fire[s].to[k], true, true};
    } else {
        size_t k = c.delay[s].pick(rng.uniform());
        st = {t, c.delay[s].impulse[k], c.delay[s].to[k], false, false};
        st.fresh = c.alarm[st.to] != c.alarm[s];
    }
    return st;
}

double mean_se(const std::vector<double>& x, double& se) {
    size_t n = x.size();
    double mean = pairwise_sum(x.data(), n) / static_cast<double>(n);
    std::vector<double> sq(n);
    for (size_t i = 0; i < n; ++i) sq[i] = (x[i] - mean) * (x[i] - mean);
    se = n > 1 ? std::sqrt(pairwise_sum(sq.data(), n) / static_cast<double>(n - 1) / static_cast<double>(n)) : 0;
    return mean;
}

struct Replication {
    double cost = 0;
    // regeneration cycles (cost, length) and time batches
    std::vector<double> cycle_cost, cycle_time, batch_cost;
};

constexpr size_t batches = 20;

Replication run(const Compiled& c, size_t start, double horizon, SplitMix64& rng, bool cycles) {
    Replication rep;
    if (cycles) rep.batch_cost.assign(batches, 0);
    auto book_rate = [&](double from, double to, double r) {
        if (!cycles || r == 0) return;
        double width = horizon / batches;
        while (from < to) {
            size_t b = std::min<size_t>(static_cast<size_t>(from / width), batches - 1);
            double end = std::min(to, (b + 1) * width);
            if (b == batches - 1) end = to;
            rep.batch_cost[b] += r * (end - from);
            from = end;
        }
    };
    size_t s = start;
    double eta = c.alarm[s] >= 0 ? c.ring(s, rng) : 0;
    double time = 0, cyc_cost = 0, cyc_start = 0;
    bool started = false;
    while (true) {
        Step st = step(c, s, eta, rng);
        if (time + st.dt >= horizon) {
            rep.cost += c.rate[s] * (horizon - time);
            book_rate(time, horizon, c.rate[s]);
            break;
        }
        double inc = c.rate[s] * st.dt + st.impulse;
        rep.cost += inc;
        book_rate(time, time + st.dt, c.rate[s]);
        time += st.dt;
        if (cycles) {
            rep.batch_cost[std::min<size_t>(static_cast<size_t>(time / (horizon / batches)), batches - 1)] +=
                st.impulse;
            cyc_cost += inc;
        }
        if (c.alarm[st.to] >= 0) eta = st.fresh ? c.ring(st.to, rng) : eta - st.dt;
        s = st.to;
        if (cycles && s == start && (c.alarm[s] < 0 || st.fresh)) {
            if (started) {
                rep.cycle_cost.push_back(cyc_cost);
                rep.cycle_time.push_back(time - cyc_start);
            }
            started = true;
            cyc_cost = 0;
            cyc_start = time;
        }
    }
    return rep;
}

}  // namespace

SplitMix64 SplitMix64::stream(std::uint64_t seed, std::uint64_t index) {
    return SplitMix64(mix(seed + (index + 1) * golden));
}

std::uint64_t SplitMix64::next() { return mix(state_ += golden); }

double SplitMix64::uniform() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

double sample_ringing(const Family& f, double d, double u) {
    switch (f.kind) {
        case FamilyKind::Dirac:
            return d;
        case FamilyKind::UniformZero:
            return d * u;
        case FamilyKind::UniformShift:
            return d + to_double(f.width) * u;
        case FamilyKind::Exponential:
        case FamilyKind::Weibull:
            return std::pow(-std::log(u), 1.0 / f.shape) / d;
    }
    return d;
}

double pairwise_sum(const double* x, size_t n) {
    if (n <= 8) {
        double s = 0;
        for (size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

namespace {

MeanPayoffEstimate simulate_impl(const Model& m, const SimConfig& cfg, bool parallel) {
    if (!(cfg.horizon > 0)) throw std::invalid_argument("horizon must be positive");
    if (cfg.replications < 1) throw std::invalid_argument("at least one replication is needed");
    const Compiled c(m, cfg.d);
    const size_t start = classify(m).regen.front();
    const size_t n = cfg.replications;
    const bool single = n == 1;

    std::vector<Replication> reps(n);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (size_t r = 0; r < n; ++r) {
        SplitMix64 rng = SplitMix64::stream(cfg.seed, r);
        reps[r] = run(c, start, cfg.horizon, rng, single);
    }

    MeanPayoffEstimate est;
    est.replications = n;
    for (const auto& r : reps) {
        est.costs.push_back(r.cost);
        est.totals.push_back(r.cost / cfg.horizon);
    }
    if (!single) {
        est.mean = mean_se(est.totals, est.se);
        return est;
    }
    const Replication& r = reps.front();
    est.mean = est.totals.front();
    est.cycles = r.cycle_cost.size();
    if (est.cycles >= batches) {
        // ratio estimator over cycles
        size_t k = est.cycles;
        double cost = pairwise_sum(r.cycle_cost.data(), k), time = pairwise_sum(r.cycle_time.data(), k);
        double ratio = cost / time;
        std::vector<double> z(k);
        for (size_t i = 0; i < k; ++i) z[i] = (r.cycle_cost[i] - ratio * r.cycle_time[i]) * (r.cycle_cost[i] - ratio * r.cycle_time[i]);
        double var = pairwise_sum(z.data(), k) / static_cast<double>(k - 1);
        est.se = std::sqrt(var / static_cast<double>(k)) / (time / static_cast<double>(k));
    } else {
        std::vector<double> b(batches);
        for (size_t i = 0; i < batches; ++i) b[i] = r.batch_cost[i] / (cfg.horizon / batches);
        mean_se(b, est.se);
    }
    return est;
}

}  // namespace

MeanPayoffEstimate simulate(const Model& m, const SimConfig& cfg) { return simulate_impl(m, cfg, true); }

MeanPayoffEstimate simulate_serial(const Model& m, const SimConfig& cfg) { return simulate_impl(m, cfg, false); }

double EpochStats::pi(size_t t) const {
    auto it = hits.find(t);
    return it == hits.end() ? 0 : static_cast<double>(it->second) / static_cast<double>(epochs);
}

double EpochStats::pi_se(size_t t) const {
    double p = pi(t);
    return std::sqrt(p * (1 - p) / static_cast<double>(epochs));
}

EpochStats simulate_epochs(const Model& m, size_t s, const Rational& d, size_t epochs, std::uint64_t seed) {
    auto a = m.alarm_at(s);
    if (!a) throw std::invalid_argument("'" + m.states[s] + "' has no alarm enabled");
    ParameterFunction params;
    for (const auto& al : m.alarms) params.push_back(al.lower);
    params[*a] = d;
    const Compiled c(m, params);

    std::vector<double> theta(epochs), cost(epochs);
    std::vector<size_t> end(epochs);
    const size_t chunk = 4096;
    const size_t chunks = (epochs + chunk - 1) / chunk;
#pragma omp parallel for schedule(dynamic)
    for (size_t k = 0; k < chunks; ++k) {
        SplitMix64 rng = SplitMix64::stream(seed, k);
        for (size_t e = k * chunk; e < std::min(epochs, (k + 1) * chunk); ++e) {
            size_t u = s;
            double eta = c.ring(s, rng), time = 0, acc = 0;
            while (true) {
                Step st = step(c, u, eta, rng);
                time += st.dt;
                acc += c.rate[u] * st.dt + st.impulse;
                if (st.fresh || c.alarm[st.to] < 0) {
                    end[e] = st.to;
                    break;
                }
                eta -= st.dt;
                u = st.to;
            }
            theta[e] = time;
            cost[e] = acc;
        }
    }

    EpochStats es;
    es.epochs = epochs;
    for (size_t e : end) ++es.hits[e];
    es.theta_mean = mean_se(theta, es.theta_se);
    es.cost_mean = mean_se(cost, es.cost_se);
    es.theta_max = epochs ? *std::max_element(theta.begin(), theta.end()) : 0;
    return es;
}

}  // namespace actmc
