#pragma once

#include "actmc/bounds.hpp"
#include "actmc/kernels.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace actmc {

// {lower + i step < upper} ∪ {upper}; off states use lower = upper = 0.
struct ActionGrid {
    Rational lower, upper, step;

    Integer size() const;
    Rational at(const Integer& i) const;
    bool contains(const Rational& d) const;
    // nearest grid point, ties towards the smaller one
    Rational snap(const Rational& d) const;
    // grid points in [lo, hi]
    std::vector<Rational> between(const Rational& lo, const Rational& hi) const;
    // all points; throws when there are more than `cap`
    std::vector<Rational> points(size_t cap = 1000000) const;
};

// state -> chosen d (0 for off states)
using Strategy = std::map<size_t, Rational>;

using ActionEvaluator = std::function<PointKernel(size_t s, const Rational& d)>;

class SemiMDPView {
public:
    // Kernels at plan.kernel_accuracy, grids with the plan's steps.
    SemiMDPView(const Model& m, const SynthesisPlan& plan);
    // Kernel-backed view over caller-supplied grids.
    SemiMDPView(const Model& m, std::map<size_t, ActionGrid> grids, const Rational& accuracy);
    // Exact kernels supplied by the caller (tests, closed forms).
    SemiMDPView(const Model& m, std::map<size_t, ActionGrid> grids, ActionEvaluator eval);

    const Model& model() const;
    // S_set ∪ S_off ordered by state name
    const std::vector<size_t>& states() const;
    bool is_setting(size_t s) const;
    const ActionGrid& grid(size_t s) const;

    // Cached; safe to call from several threads.
    PointKernel kernel(size_t s, const Rational& d) const;
    // Only for kernel-backed views.
    const AlarmKernel& alarm_kernel(size_t s) const;
    bool has_alarm_kernels() const;

    Strategy initial_strategy() const;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

struct GainBias {
    Rational g;
    std::vector<Rational> h;  // indexed by model state, 0 outside S_set ∪ S_off
    size_t ref = 0;
};

struct NotUnichain : std::runtime_error {
    NotUnichain(std::vector<std::vector<size_t>> classes, const std::string& what)
        : std::runtime_error(what), classes(std::move(classes)) {}
    std::vector<std::vector<size_t>> classes;
};

// Recurrent classes of the chain induced by sigma on S_set ∪ S_off.
std::vector<std::vector<size_t>> recurrent_classes(const SemiMDPView& view, const Strategy& sigma);

// Exact gain and bias with h(ref) = 0; ref defaults to the first state by name.
GainBias evaluate_strategy(const SemiMDPView& view, const Strategy& sigma, std::optional<size_t> ref = {});

// C(d) - g Theta(d) + Pi(d) . h
Rational ranking(const SemiMDPView& view, size_t s, const Rational& d, const Rational& g,
                 const std::vector<Rational>& h);

struct Choice {
    Rational d, value;
};

// Argmin of the ranking over the candidates.  The current action is kept when
// it attains the minimum, otherwise the smallest minimizer wins.
Choice best_action(const SemiMDPView& view, size_t s, const std::vector<Rational>& candidates,
                   const Rational& current, const Rational& g, const std::vector<Rational>& h);

struct GridTooLarge : std::runtime_error {
    GridTooLarge(size_t count, size_t cap)
        : std::runtime_error("explicit grid has " + std::to_string(count) + " actions, cap is " + std::to_string(cap)),
          count(count) {}
    size_t count;
};

struct PolicyIterationResult {
    Strategy strategy;
    GainBias gain;
    std::vector<Rational> gains;  // one per evaluated strategy
    size_t iterations = 0;
};

// Policy iteration over enumerated action sets.  Setting states without an
// entry in `grids` use view.grid(s); off states have the single action 0.
PolicyIterationResult explicit_policy_iteration(const SemiMDPView& view,
                                                const std::map<size_t, std::vector<Rational>>& grids,
                                                size_t cap = 1000000);

}  // namespace actmc
