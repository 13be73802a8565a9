#pragma once

#include "actmc/rational.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace actmc {

struct Transition {
    size_t to;
    Rational prob;
    Rational impulse;  // I(s, to) or I_A(s, to)

    friend bool operator==(const Transition&, const Transition&) = default;
};

using Row = std::vector<Transition>;

enum class FamilyKind { Dirac, UniformZero, UniformShift, Exponential, Weibull };

struct Family {
    FamilyKind kind = FamilyKind::Dirac;
    Rational width;      // UniformShift
    unsigned shape = 1;  // Weibull (Exponential is shape 1)

    static Family dirac() { return {}; }
    static Family uniform_zero() { return {FamilyKind::UniformZero, 0, 1}; }
    static Family uniform_shift(Rational w) { return {FamilyKind::UniformShift, std::move(w), 1}; }
    static Family exponential() { return {FamilyKind::Exponential, 0, 1}; }
    static Family weibull(unsigned k) { return {FamilyKind::Weibull, 0, k}; }

    bool is_weibull() const { return kind == FamilyKind::Weibull || kind == FamilyKind::Exponential; }
    std::string name() const;

    friend bool operator==(const Family&, const Family&) = default;
};

struct Alarm {
    std::string name;
    std::vector<size_t> enabled;  // S_a, sorted
    std::vector<Row> rows;        // P_a row per state; empty row means P_a(s, s) = 1
    Family family;
    Rational lower, upper;

    bool enables(size_t s) const;
    friend bool operator==(const Alarm&, const Alarm&) = default;
};

class Model {
public:
    std::vector<std::string> states;
    Rational lambda;
    std::vector<Row> delay;          // P with delay impulses I
    std::vector<Rational> rate_cost;  // R
    std::vector<Alarm> alarms;

    size_t size() const { return states.size(); }
    std::optional<size_t> index_of(const std::string& name) const;
    size_t index(const std::string& name) const;  // throws
    std::optional<size_t> alarm_index(const std::string& name) const;
    // alarm enabled in s, if any (first match)
    std::optional<size_t> alarm_at(size_t s) const;

    Rational prob(size_t s, size_t t) const;
    Rational alarm_prob(size_t a, size_t s, size_t t) const;

    // Ī(s) = sum_t P(s,t) I(s,t)
    Rational expected_delay_impulse(size_t s) const;
    // Ī_A(s) = sum_t P_a(s,t) I_A(s,t) for the alarm enabled in s (0 if none)
    Rational expected_alarm_impulse(size_t s) const;

    Rational r_max() const;
    Rational i_max() const;
    // smallest positive entry of P and all P_a
    Rational p_min() const;

    friend bool operator==(const Model&, const Model&) = default;
};

struct ValidationReport {
    std::vector<std::string> issues;
    bool ok() const { return issues.empty(); }
};

// Never throws; an empty report means the model is admissible.
ValidationReport validate(const Model& m);

struct StateClassification {
    std::vector<size_t> setting;         // S_set, ascending
    std::vector<size_t> off;             // S_off, ascending
    std::map<size_t, size_t> owner;      // setting state -> alarm
    std::vector<size_t> setting_of;      // alarm -> its setting state
    std::vector<size_t> regen;           // S_set ∪ S_off ordered by state name
};

struct ClassificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Setting states per alarm, without the localization check.
std::vector<std::vector<size_t>> setting_states(const Model& m);

StateClassification classify(const Model& m);

struct RateTransition {
    size_t from, to;
    Rational rate, impulse;
};

// Sets lambda to the largest exit rate and the delay rows to rate / lambda.
// The residual rate becomes a self-loop without impulse; an explicit
// self-loop absorbs it with its impulse rescaled so the expected impulse is
// unchanged.  Rows come out sorted by target.
void uniformize(Model& m, const std::vector<RateTransition>& rates);

// Parameter function: alarm -> d
using ParameterFunction = std::vector<Rational>;

}  // namespace actmc
