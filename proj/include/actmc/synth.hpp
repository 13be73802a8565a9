#pragma once

#include "actmc/smdp.hpp"

#include <optional>
#include <vector>

namespace actmc {

// C - g Theta + sum_t h[t] Pi(t) as one exp-poly; the constant offset of a
// uniform-shift kernel goes to *offset.
ExpPoly analytic_ranking(const AnalyticKernel& k, const Rational& g, const std::vector<Rational>& h,
                         Rational* offset = nullptr);

// Grid points within 3 step / 2 of each root and of both ends, plus current.
std::vector<Rational> candidate_window(const ActionGrid& grid, const std::vector<Rational>& roots,
                                       const Rational& current);

// Fallback for a vanishing derivative: both ends, 16 evenly spaced grid
// points and the current action.
std::vector<Rational> fallback_candidates(const ActionGrid& grid, const Rational& current);

// Roots of `sign` on the grid interval to step / 2, then candidate_window.
std::vector<Rational> candidates(const RationalPoly& sign, const ActionGrid& grid, const Rational& current);

// Improvement step of a setting state.  Candidates whose rankings are within
// twice the largest certified ranking error of the minimum count as tied, and
// the current action is kept when it is among them.  Otherwise tied
// candidates with no root of the symbolic slope between them (roots are known
// to within step / 2) are ordered by that slope; the remaining ties go to the
// smaller value, then the smaller d.
Choice choose_action(const SemiMDPView& view, size_t s, const std::vector<Rational>& candidates,
                     const Rational& current, const Rational& g, const std::vector<Rational>& h,
                     const std::vector<Rational>& roots, const Rational& step);

struct IterationDiagnostics {
    size_t iteration = 0;
    Rational gain;
    size_t candidates = 0;      // summed over setting states
    size_t max_candidates = 0;  // largest set of one state
    size_t roots = 0;
    long max_degree = 0;
    size_t fallbacks = 0;  // states whose ranking derivative vanished
    size_t improvements = 0;
    double seconds = 0;
};

struct SynthesisResult {
    ParameterFunction d;  // alarm -> parameter
    Strategy strategy;
    GainBias gain;
    SynthesisPlan plan;
    std::vector<IterationDiagnostics> iterations;
};

struct SynthesisOptions {
    std::optional<Strategy> initial;  // defaults to every alarm at its lower bound
    size_t max_iterations = 10000;
};

// Symbolic policy iteration over the grids of `view` (kernel-backed).
SynthesisResult synthesize(const SemiMDPView& view, const SynthesisOptions& opt = {});

// Plan for epsilon, then symbolic policy iteration.  Throws
// std::invalid_argument with the validation issues for inadmissible models.
SynthesisResult synthesize(const Model& m, const Rational& epsilon, const SynthesisOptions& opt = {});

ParameterFunction parameters_of(const Model& m, const Strategy& sigma);

}  // namespace actmc
