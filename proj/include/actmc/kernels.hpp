#pragma once

#include "actmc/model.hpp"
#include "actmc/poly.hpp"
#include "actmc/series.hpp"

#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

namespace actmc {

// Pi, Theta and C of one action, as exact rationals.
struct PointKernel {
    std::vector<std::pair<size_t, Rational>> pi;  // ascending by state, sums to exactly 1
    Rational theta, cost;
    Rational error;  // certified bound on every component
};

// Symbolic components on [lower, upper].  Theta and C of a uniform-shift
// alarm carry a constant offset next to the exp-poly part.
struct AnalyticKernel {
    FamilyKind family = FamilyKind::Dirac;
    Rational lower, upper, kappa, tau_hat;
    size_t poisson_order = 0, taylor_order = 0;
    std::vector<std::pair<size_t, ExpPoly>> pi;
    ExpPoly theta, cost;
    Rational theta_offset, cost_offset;
};

struct KernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Action of an off state: Pi = P(s,.), Theta = 1/lambda, C = R(s)/lambda + Ī(s).
PointKernel off_state_kernel(const Model& m, size_t s);

// Regeneration states reachable in one epoch started in setting state s.
std::vector<size_t> kernel_support(const Model& m, size_t alarm, size_t s);

// Kernel of one setting state, accurate to `accuracy` for point values and
// for the symbolic ranking used to locate candidates.
class AlarmKernel {
public:
    virtual ~AlarmKernel() = default;

    size_t state() const { return state_; }
    size_t alarm() const { return alarm_; }
    const Rational& lower() const { return lower_; }
    const Rational& upper() const { return upper_; }
    const Rational& accuracy() const { return accuracy_; }
    const std::vector<size_t>& support() const { return support_; }

    // Throws KernelError when d is outside [lower, upper].
    PointKernel point(const Rational& d) const;

    // Roots in [lower, upper] of the derivative of
    //   d -> C(d) - g Theta(d) + sum_t h[t] Pi(d)(t),
    // each within `precision`.  h is indexed by model state.  Throws
    // IdenticallyZero when the derivative vanishes.
    virtual std::vector<Rational> ranking_roots(const Rational& g, const std::vector<Rational>& h,
                                                const Rational& precision) const = 0;

    // Sign of the derivative of that ranking at d (0 where it vanishes).
    virtual int ranking_slope(const Rational& g, const std::vector<Rational>& h, const Rational& d) const = 0;

    // Certified bracket of the symbolic ranking at d (for cross-checks).
    virtual Bracket ranking_bracket(const Rational& d, const Rational& g, const std::vector<Rational>& h) const = 0;

    virtual AnalyticKernel analytic() const = 0;

    // Degree of the polynomial whose roots are isolated.
    virtual long degree() const = 0;

protected:
    struct Raw {
        std::vector<Bracket> pi;
        Bracket theta, cost;
    };
    virtual Raw raw_point(const Rational& d) const = 0;

    size_t state_ = 0, alarm_ = 0;
    Rational lower_, upper_, accuracy_;
    std::vector<size_t> support_;
};

std::unique_ptr<AlarmKernel> build_kernel(const Model& m, size_t s, const Rational& accuracy);

// One-off point evaluation (off states included).
PointKernel point_kernel(const Model& m, size_t s, const Rational& d, const Rational& accuracy);

// Family-specific constructors of the symbolic kernel; each checks the family
// of the alarm owning s.
AnalyticKernel dirac_kernel(const Model& m, size_t s, const Rational& kappa);
AnalyticKernel uniform_kernel(const Model& m, size_t s, const Rational& kappa);
AnalyticKernel uniform_shift_kernel(const Model& m, size_t s, const Rational& kappa);
AnalyticKernel weibull_kernel(const Model& m, size_t s, const Rational& kappa);

// Evaluation of an analytic component (offset included) to within tol.
Bracket eval_component(const ExpPoly& p, const Rational& offset, const Rational& d, const Rational& tol);

// Weibull cutoff: P(T > M) and E[T; T > M] bounds for scale rates in [lo, hi].
struct WeibullCutoff {
    Rational m, tail_prob, tail_mean;
};
WeibullCutoff weibull_cutoff(unsigned shape, const Rational& lo, const Rational& hi, const Rational& lambda,
                             const Rational& r_max, const Rational& i_max, const Rational& budget);

}  // namespace actmc
