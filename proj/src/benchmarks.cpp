#include "actmc/benchmarks.hpp"

#include <algorithm>
#include <stdexcept>

namespace actmc {

namespace {

class Builder {
public:
    size_t state(const std::string& name) {
        m.states.push_back(name);
        m.rate_cost.push_back(0);
        return m.size() - 1;
    }
    void rate(size_t from, size_t to, Rational r, Rational impulse = 0) {
        rates.push_back({from, to, std::move(r), std::move(impulse)});
    }
    Alarm& alarm(const std::string& name, Family fam) {
        Alarm a;
        a.name = name;
        a.family = std::move(fam);
        a.lower = frac(1, 10);
        a.upper = 10;
        m.alarms.push_back(a);
        return m.alarms.back();
    }
    void fire(Alarm& a, size_t from, size_t to, Rational impulse = 0) {
        a.enabled.push_back(from);
        a.rows.resize(m.size());
        a.rows[from] = {{to, 1, std::move(impulse)}};
    }
    Model finish() {
        uniformize(m, rates);
        for (auto& a : m.alarms) {
            a.rows.resize(m.size());
            std::sort(a.enabled.begin(), a.enabled.end());
        }
        return std::move(m);
    }

    Model m;
    std::vector<RateTransition> rates;
};

}  // namespace

Model disk_drive(unsigned n) {
    if (n < 1) throw std::invalid_argument("queue capacity must be at least 1");
    const Rational arrive = frac(139, 100), complete = frac(25, 2);
    Builder b;
    std::vector<size_t> active, asleep;
    for (unsigned i = 0; i <= n; ++i) active.push_back(b.state("active_" + std::to_string(i)));
    for (unsigned i = 0; i <= n; ++i) asleep.push_back(b.state("asleep_" + std::to_string(i)));
    for (unsigned i = 0; i <= n; ++i) {
        b.m.rate_cost[active[i]] = 4;
        b.m.rate_cost[asleep[i]] = 2;
        if (i < n) {
            b.rate(active[i], active[i + 1], arrive, 1);
            b.rate(asleep[i], asleep[i + 1], arrive, 1);
        } else {
            b.rate(active[i], active[i], arrive, 6);
            b.rate(asleep[i], asleep[i], arrive, 6);
        }
        if (i > 0) b.rate(active[i], active[i - 1], complete, 1);
    }
    Alarm& sleep = b.alarm("sleep", Family::dirac());
    b.fire(sleep, active[0], asleep[0], 1);
    Alarm& wakeup = b.alarm("wakeup", Family::dirac());
    for (unsigned i = 1; i <= n; ++i) b.fire(wakeup, asleep[i], active[i], 4);
    return b.finish();
}

Model maintenance(unsigned n) {
    if (n < 1) throw std::invalid_argument("queue capacity must be at least 1");
    Builder b;
    auto row = [&](const std::string& prefix, unsigned from) {
        std::vector<size_t> v(n + 1, 0);
        for (unsigned i = from; i <= n; ++i) v[i] = b.state(prefix + std::to_string(i));
        return v;
    };
    size_t init = b.state("init_ser");
    auto normal = row("normal_", 0), degrad = row("degrad_", 0);
    auto rej_en = row("rej_en_", 1), rej_de = row("rej_de_", 1);
    size_t rejuven1 = b.state("rejuven_1"), rejuven2 = b.state("rejuven_2"), rej_err = b.state("rej_err");
    size_t failed = b.state("failed");
    size_t repair1 = b.state("repair_1"), repair2 = b.state("repair_2"), rep_err = b.state("rep_err");

    // queues: arrivals at rate 2, completions at rate 3, rejection cost 6
    // when full; an emptied rejuvenation queue starts the rejuvenation
    auto queue = [&](const std::vector<size_t>& q, unsigned from, size_t empty) {
        for (unsigned i = from; i <= n; ++i) {
            if (i < n) b.rate(q[i], q[i + 1], 2);
            else b.rate(q[i], q[i], 2, 6);
            if (i > from) b.rate(q[i], q[i - 1], 3);
            else if (empty != q[i]) b.rate(q[i], empty, 3);
        }
    };
    queue(normal, 0, normal[0]);
    queue(degrad, 0, degrad[0]);
    queue(rej_en, 1, rejuven1);
    queue(rej_de, 1, rejuven1);
    for (unsigned i = 0; i <= n; ++i) {
        b.rate(normal[i], degrad[i], 1);
        // failure rejects the i queued jobs
        b.rate(degrad[i], failed, 1, 4 * i);
        if (i > 0) {
            b.rate(rej_en[i], rej_de[i], 1);
            b.rate(rej_de[i], failed, 1, 4 * i);
        }
    }

    // jobs arriving while the server is down are turned away at cost 1
    for (size_t s : {init, rejuven1, rejuven2, rej_err, failed, repair1, repair2, rep_err}) b.rate(s, s, 2, 1);
    b.rate(init, normal[0], 3);
    b.rate(failed, repair1, 3);
    b.rate(repair1, repair2, 1);
    b.rate(repair2, init, 1);
    b.rate(repair1, rep_err, frac(1, 10));
    b.rate(repair2, rep_err, frac(1, 10));
    b.rate(rejuven1, rejuven2, 2);
    b.rate(rejuven2, init, 2);
    b.rate(rejuven1, rej_err, frac(1, 5));
    b.rate(rejuven2, rej_err, frac(1, 5));

    Alarm& o = b.alarm("o", Family::dirac());
    b.fire(o, normal[0], rejuven1);
    b.fire(o, degrad[0], rejuven1);
    for (unsigned i = 1; i <= n; ++i) {
        b.fire(o, normal[i], rej_en[i]);
        b.fire(o, degrad[i], rej_de[i]);
    }
    Alarm& p = b.alarm("p", Family::uniform_shift(2));
    for (size_t s : {rejuven1, rejuven2, rej_err}) b.fire(p, s, rejuven1);
    Alarm& q = b.alarm("q", Family::uniform_shift(2));
    for (size_t s : {repair1, repair2, rep_err}) b.fire(q, s, repair1);
    return b.finish();
}

Model benchmark(const std::string& name, unsigned n) {
    if (name == "disk-drive") return disk_drive(n);
    if (name == "maintenance") return maintenance(n);
    throw std::invalid_argument("unknown benchmark '" + name + "' (expected disk-drive or maintenance)");
}

}  // namespace actmc
