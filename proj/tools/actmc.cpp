#include "actmc/benchmarks.hpp"
#include "actmc/io.hpp"
#include "actmc/sim.hpp"
#include "actmc/synth.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <omp.h>

#include <fstream>
#include <iostream>

using namespace actmc;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* schema = "actmc-result/1";

enum Exit { ok = 0, usage = 1, input = 2, inadmissible = 3, refused = 4, internal = 5 };

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Inadmissible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string dec(const Rational& q) { return to_decimal(q, 12); }

// Powers of two are reported by exponent.
json pow2(const Rational& q) {
    Integer num = q.get_num(), den = q.get_den();
    if (num == 1 && mpz_popcount(den.get_mpz_t()) == 1)
        return "2^-" + std::to_string(mpz_sizeinbase(den.get_mpz_t(), 2) - 1);
    return to_string(q);
}

json number(const Rational& q, bool exact) {
    json j;
    j["decimal"] = dec(q);
    if (exact) j["exact"] = to_string(q);
    return j;
}

Model load(const std::string& path, bool check = true) {
    Model m;
    try {
        m = parse_model_file(path);
    } catch (const ParseError& e) {
        throw InputError(e.what());
    }
    if (check) {
        ValidationReport r = validate(m);
        if (!r.ok()) {
            std::string msg = "model is not admissible:";
            for (const auto& i : r.issues) msg += "\n  " + i;
            throw Inadmissible(msg);
        }
    }
    return m;
}

Rational rational_option(const std::string& name, const std::string& text) {
    try {
        return parse_rational(text);
    } catch (const std::exception& e) {
        throw InputError("--" + name + ": " + e.what());
    }
}

// Alarm name -> value; alarms not mentioned stay at their lower bound.
ParameterFunction parameters(const Model& m, const std::string& text) {
    ParameterFunction d;
    for (const auto& a : m.alarms) d.push_back(a.lower);
    std::vector<std::pair<std::string, Rational>> assigned;
    try {
        assigned = parse_assignments(text);
    } catch (const ParseError& e) {
        throw InputError(e.what());
    }
    for (const auto& [name, v] : assigned) {
        auto a = m.alarm_index(name);
        if (!a) throw InputError("unknown alarm '" + name + "'");
        const Alarm& al = m.alarms[*a];
        if (v < al.lower || v > al.upper)
            throw InputError("parameter of '" + name + "' outside [" + to_string(al.lower) + ", " +
                             to_string(al.upper) + "]");
        d[*a] = v;
    }
    return d;
}

void write(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot write");
    out << text;
}

void write_json(const std::string& path, const json& j) { write(path, j.dump(2) + "\n"); }

json model_summary(const Model& m) {
    json j;
    j["states"] = m.size();
    j["lambda"] = to_string(m.lambda);
    json alarms = json::array();
    StateClassification c = classify(m);
    for (size_t a = 0; a < m.alarms.size(); ++a) {
        const Alarm& al = m.alarms[a];
        alarms.push_back({{"name", al.name},
                          {"family", al.family.name()},
                          {"setting_state", m.states[c.setting_of[a]]},
                          {"interval", {to_string(al.lower), to_string(al.upper)}}});
    }
    j["alarms"] = alarms;
    return j;
}

json plan_json(const Model& m, const SynthesisPlan& p) {
    json j;
    j["epsilon"] = to_string(p.epsilon);
    j["kappa"] = pow2(p.kappa);
    j["xi"] = pow2(p.xi);
    j["kernel_accuracy"] = pow2(p.kernel_accuracy);
    json delta;
    for (const auto& [s, d] : p.delta) delta[m.states[s]] = pow2(d);
    j["delta"] = delta;
    return j;
}

json gain_json(const Model& m, const GainBias& gb, bool exact) {
    json j;
    j["gain"] = number(gb.g, exact);
    j["reference_state"] = m.states[gb.ref];
    json h;
    for (size_t s : classify(m).regen) h[m.states[s]] = dec(gb.h[s]);
    j["bias"] = h;
    return j;
}

json params_json(const Model& m, const ParameterFunction& d, bool exact) {
    json j;
    for (size_t a = 0; a < m.alarms.size(); ++a) j[m.alarms[a].name] = number(d[a], exact);
    return j;
}

void print_params(const Model& m, const ParameterFunction& d) {
    for (size_t a = 0; a < m.alarms.size(); ++a) std::cout << "  " << m.alarms[a].name << " = " << dec(d[a]) << "\n";
}

void print_plan(const Model& m, const SynthesisPlan& p) {
    std::cout << "plan: epsilon " << to_string(p.epsilon) << ", kappa " << pow2(p.kappa).get<std::string>()
              << ", kernel accuracy " << pow2(p.kernel_accuracy).get<std::string>() << "\n";
    for (const auto& [s, d] : p.delta) std::cout << "  delta(" << m.states[s] << ") = " << pow2(d).get<std::string>() << "\n";
}

json synthesis_json(const Model& m, const SynthesisResult& r, bool exact) {
    json j;
    j["schema"] = schema;
    j["command"] = "synthesize";
    j["model"] = model_summary(m);
    j["plan"] = plan_json(m, r.plan);
    j["parameters"] = params_json(m, r.d, exact);
    j.update(gain_json(m, r.gain, exact));
    json it = json::array();
    for (const auto& d : r.iterations)
        it.push_back({{"iteration", d.iteration},
                      {"gain", dec(d.gain)},
                      {"candidates", d.candidates},
                      {"max_candidates", d.max_candidates},
                      {"roots", d.roots},
                      {"max_degree", d.max_degree},
                      {"fallbacks", d.fallbacks},
                      {"improvements", d.improvements}});
    j["iterations"] = it;
    return j;
}

std::string trace_csv(const SynthesisResult& r) {
    std::string out = "iteration,gain,candidates,max_candidates,roots,max_degree,fallbacks,improvements\n";
    for (const auto& d : r.iterations)
        out += std::to_string(d.iteration) + "," + dec(d.gain) + "," + std::to_string(d.candidates) + "," +
               std::to_string(d.max_candidates) + "," + std::to_string(d.roots) + "," + std::to_string(d.max_degree) +
               "," + std::to_string(d.fallbacks) + "," + std::to_string(d.improvements) + "\n";
    return out;
}

void report_synthesis(const Model& m, const SynthesisResult& r) {
    std::cout << "parameters:\n";
    print_params(m, r.d);
    std::cout << "gain: " << dec(r.gain.g) << "\n";
    print_plan(m, r.plan);
    std::cout << "iterations:\n";
    for (const auto& d : r.iterations)
        std::cout << "  " << d.iteration << ": gain " << dec(d.gain) << ", candidates " << d.candidates << " (max "
                  << d.max_candidates << "), roots " << d.roots << ", degree " << d.max_degree << ", improvements "
                  << d.improvements << ", " << d.seconds << " s\n";
}

Strategy strategy_of(const SemiMDPView& view, const ParameterFunction& d) {
    const Model& m = view.model();
    StateClassification c = classify(m);
    Strategy sigma = view.initial_strategy();
    for (size_t a = 0; a < m.alarms.size(); ++a) sigma[c.setting_of[a]] = d[a];
    return sigma;
}

struct Options {
    std::string model, json_out, trace, params, alarm, bench_name = "disk-drive", csv;
    std::string epsilon = "1/100", grid_step, from, to, step;
    unsigned queue = 2;
    std::uint64_t seed = 1;
    double horizon = 1e4;
    size_t reps = 10, cap = 1000000;
    bool exact = false;
};

int run_validate(const Options& o) {
    Model m = load(o.model, false);
    ValidationReport r = validate(m);
    if (r.ok()) {
        std::cerr << o.model << ": admissible, " << m.size() << " states, " << m.alarms.size() << " alarms\n";
        return ok;
    }
    for (const auto& i : r.issues) std::cerr << o.model << ": " << i << "\n";
    return inadmissible;
}

int run_synthesize(const Options& o, const Model& m, bool json_stdout) {
    SynthesisResult r = synthesize(m, rational_option("epsilon", o.epsilon));
    json j = synthesis_json(m, r, o.exact);
    if (json_stdout) {
        if (!o.json_out.empty() && o.json_out != "-") write_json(o.json_out, j);
        write_json("-", j);
    } else {
        report_synthesis(m, r);
        if (!o.json_out.empty()) write_json(o.json_out, j);
    }
    if (!o.trace.empty()) write(o.trace, trace_csv(r));
    return ok;
}

int run_evaluate(const Options& o) {
    Model m = load(o.model);
    ParameterFunction d = parameters(m, o.params);
    SynthesisPlan p = plan(m, rational_option("epsilon", o.epsilon));
    SemiMDPView view(m, p);
    StateClassification c = classify(m);
    ParameterFunction snapped = d;
    json snaps;
    for (size_t a = 0; a < m.alarms.size(); ++a) {
        snapped[a] = view.grid(c.setting_of[a]).snap(d[a]);
        snaps[m.alarms[a].name] = dec(abs(snapped[a] - d[a]));
    }
    GainBias gb = evaluate_strategy(view, strategy_of(view, snapped));
    json j;
    j["schema"] = schema;
    j["command"] = "evaluate";
    j["model"] = model_summary(m);
    j["plan"] = plan_json(m, p);
    j["parameters"] = params_json(m, snapped, o.exact);
    j["snap_distance"] = snaps;
    j.update(gain_json(m, gb, o.exact));
    std::cout << "parameters (snapped to the grid):\n";
    for (size_t a = 0; a < m.alarms.size(); ++a)
        std::cout << "  " << m.alarms[a].name << " = " << dec(snapped[a]) << " (moved "
                  << snaps[m.alarms[a].name].get<std::string>() << ")\n";
    std::cout << "gain: " << dec(gb.g) << "\n";
    if (!o.json_out.empty()) write_json(o.json_out, j);
    return ok;
}

int run_simulate(const Options& o) {
    Model m = load(o.model);
    SimConfig cfg;
    cfg.seed = o.seed;
    cfg.horizon = o.horizon;
    cfg.replications = o.reps;
    cfg.d = parameters(m, o.params);
    if (!(cfg.horizon > 0) || cfg.replications < 1) throw InputError("horizon and reps must be positive");
    MeanPayoffEstimate e = simulate(m, cfg);
    json j;
    j["schema"] = schema;
    j["command"] = "simulate";
    j["model"] = model_summary(m);
    j["parameters"] = params_json(m, cfg.d, o.exact);
    j["seed"] = o.seed;
    j["horizon"] = o.horizon;
    j["replications"] = e.replications;
    j["estimate"] = e.mean;
    j["standard_error"] = e.se;
    if (e.replications == 1) j["regeneration_cycles"] = e.cycles;
    std::cout << "estimate: " << e.mean << " +- " << e.se << " (" << e.replications << " replications)\n";
    if (!o.json_out.empty()) write_json(o.json_out, j);
    if (!o.csv.empty()) {
        std::string out = "replication,cost_per_time,total_cost\n";
        char buf[64];
        for (size_t r = 0; r < e.totals.size(); ++r) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", e.totals[r], e.costs[r]);
            out += std::to_string(r) + "," + buf + "\n";
        }
        write(o.csv, out);
    }
    return ok;
}

int run_explicit(const Options& o) {
    Model m = load(o.model);
    if (o.grid_step.empty()) throw InputError("--grid-step is required");
    Rational g = rational_option("grid-step", o.grid_step);
    if (g <= 0) throw InputError("--grid-step must be positive");
    SynthesisPlan p = plan(m, rational_option("epsilon", o.epsilon));
    StateClassification c = classify(m);
    std::map<size_t, ActionGrid> grids;
    for (size_t a = 0; a < m.alarms.size(); ++a)
        grids[c.setting_of[a]] = ActionGrid{m.alarms[a].lower, m.alarms[a].upper, g};
    SemiMDPView view(m, grids, p.kernel_accuracy);
    PolicyIterationResult r = explicit_policy_iteration(view, {}, o.cap);
    ParameterFunction d = parameters_of(m, r.strategy);
    json j;
    j["schema"] = schema;
    j["command"] = "explicit";
    j["model"] = model_summary(m);
    j["grid_step"] = to_string(g);
    j["kernel_accuracy"] = pow2(p.kernel_accuracy);
    j["parameters"] = params_json(m, d, o.exact);
    j.update(gain_json(m, r.gain, o.exact));
    json gains = json::array();
    for (const auto& x : r.gains) gains.push_back(dec(x));
    j["gains"] = gains;
    std::cout << "parameters:\n";
    print_params(m, d);
    std::cout << "gain: " << dec(r.gain.g) << " after " << r.iterations << " iterations\n";
    if (!o.json_out.empty()) write_json(o.json_out, j);
    return ok;
}

int run_sweep(const Options& o) {
    Model m = load(o.model);
    auto a = m.alarm_index(o.alarm);
    if (!a) throw InputError("unknown alarm '" + o.alarm + "'");
    const Alarm& al = m.alarms[*a];
    Rational from = o.from.empty() ? al.lower : rational_option("from", o.from);
    Rational to = o.to.empty() ? al.upper : rational_option("to", o.to);
    if (o.step.empty()) throw InputError("--step is required");
    Rational step = rational_option("step", o.step);
    if (step <= 0 || from > to || from < al.lower || to > al.upper)
        throw InputError("sweep range must lie in [" + to_string(al.lower) + ", " + to_string(al.upper) + "]");
    ParameterFunction d = parameters(m, o.params);
    SynthesisPlan p = plan(m, rational_option("epsilon", o.epsilon));
    StateClassification c = classify(m);
    size_t s = c.setting_of[*a];
    std::map<size_t, ActionGrid> grids;
    for (size_t b = 0; b < m.alarms.size(); ++b)
        grids[c.setting_of[b]] = b == *a ? ActionGrid{from, to, step} : ActionGrid{d[b], d[b], 1};
    SemiMDPView view(m, grids, p.kernel_accuracy);
    std::vector<Rational> xs = view.grid(s).points(100000);
    std::vector<Rational> gains(xs.size());
    std::vector<std::exception_ptr> errors(xs.size());
#pragma omp parallel for schedule(dynamic)
    for (size_t i = 0; i < xs.size(); ++i) {
        try {
            ParameterFunction di = d;
            di[*a] = xs[i];
            gains[i] = evaluate_strategy(view, strategy_of(view, di)).g;
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::string out = al.name + ",gain\n";
    for (size_t i = 0; i < xs.size(); ++i) out += dec(xs[i]) + "," + dec(gains[i]) + "\n";
    write(o.csv.empty() ? "-" : o.csv, out);
    return ok;
}

int run_generate(const Options& o) {
    Model m;
    try {
        m = benchmark(o.bench_name, o.queue);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    write(o.json_out.empty() ? "-" : o.json_out, emit_model(m));
    return ok;
}

int run_bench(const Options& o) {
    Model m;
    try {
        m = benchmark(o.bench_name, o.queue);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    return run_synthesize(o, m, true);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter synthesis for continuous-time Markov chains with alarms"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0: OpenMP default)")->check(CLI::NonNegativeNumber);
    Options o;

    auto model_arg = [&](CLI::App* c) { c->add_option("model", o.model, "Model file")->required(); };
    auto eps = [&](CLI::App* c) { c->add_option("--epsilon", o.epsilon, "Optimality tolerance (exact decimal or p/q)"); };
    auto json_opt = [&](CLI::App* c) {
        c->add_option("--json", o.json_out, "Write the JSON result here ('-' for stdout)");
        c->add_flag("--exact", o.exact, "Add exact rationals to the JSON result");
    };

    auto* validate_cmd = app.add_subcommand("validate", "Check admissibility; the report goes to stderr");
    model_arg(validate_cmd);

    auto* synth = app.add_subcommand("synthesize", "Symbolic policy iteration");
    model_arg(synth);
    eps(synth);
    json_opt(synth);
    synth->add_option("--trace", o.trace, "Per-iteration CSV");

    auto* eval = app.add_subcommand("evaluate", "Gain and bias of fixed parameters, snapped to the grid");
    model_arg(eval);
    eval->add_option("--params", o.params, "Assignments such as sleep=0.1,wakeup=3.6");
    eps(eval);
    json_opt(eval);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo mean payoff");
    model_arg(sim);
    sim->add_option("--params", o.params, "Assignments such as sleep=0.1,wakeup=3.6");
    sim->add_option("--seed", o.seed, "Random seed");
    sim->add_option("--horizon", o.horizon, "Model time per replication");
    sim->add_option("--reps", o.reps, "Replications");
    sim->add_option("--csv", o.csv, "Per-replication totals");
    json_opt(sim);

    auto* expl = app.add_subcommand("explicit", "Policy iteration over an enumerated grid");
    model_arg(expl);
    expl->add_option("--grid-step", o.grid_step, "Grid step shared by all alarms")->required();
    expl->add_option("--cap", o.cap, "Largest number of enumerated actions");
    eps(expl);
    json_opt(expl);

    auto* bench = app.add_subcommand("bench", "Generate a benchmark and synthesize; JSON on stdout");
    bench->add_option("name", o.bench_name, "disk-drive or maintenance")->required();
    bench->add_option("--queue", o.queue, "Queue capacity N")->check(CLI::PositiveNumber);
    eps(bench);
    json_opt(bench);
    bench->add_option("--trace", o.trace, "Per-iteration CSV");

    auto* gen = app.add_subcommand("generate", "Write a benchmark model file");
    gen->add_option("name", o.bench_name, "disk-drive or maintenance")->required();
    gen->add_option("--queue", o.queue, "Queue capacity N")->check(CLI::PositiveNumber);
    gen->add_option("-o,--output", o.json_out, "Output file ('-' for stdout)");

    auto* sweep = app.add_subcommand("sweep", "CSV of the gain over one alarm's parameter");
    model_arg(sweep);
    sweep->add_option("--alarm", o.alarm, "Alarm to vary")->required();
    sweep->add_option("--from", o.from, "First value (default: lower bound)");
    sweep->add_option("--to", o.to, "Last value (default: upper bound)");
    sweep->add_option("--step", o.step, "Step")->required();
    sweep->add_option("--params", o.params, "Values of the other alarms (default: lower bounds)");
    sweep->add_option("--csv", o.csv, "Output file (default: stdout)");
    eps(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? ok : usage;
    }
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*validate_cmd) return run_validate(o);
        if (*synth) return run_synthesize(o, load(o.model), false);
        if (*eval) return run_evaluate(o);
        if (*sim) return run_simulate(o);
        if (*expl) return run_explicit(o);
        if (*bench) return run_bench(o);
        if (*gen) return run_generate(o);
        if (*sweep) return run_sweep(o);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return input;
    } catch (const Inadmissible& e) {
        std::cerr << "error: " << e.what() << "\n";
        return inadmissible;
    } catch (const GridTooLarge& e) {
        std::cerr << "error: " << e.what() << "\n";
        return refused;
    } catch (const NotUnichain& e) {
        std::cerr << "error: " << e.what() << "\n";
        return refused;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return internal;
    }
    return usage;
}
