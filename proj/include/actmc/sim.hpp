#pragma once

#include "actmc/model.hpp"

#include <cstdint>
#include <map>
#include <vector>

namespace actmc {

// SplitMix64.  Replication r of seed s draws from the stream whose state
// starts at mix(s + (r + 1) * golden), so streams do not depend on threads.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t index);

    std::uint64_t next();
    double uniform();  // (0, 1]

private:
    std::uint64_t state_;
};

struct SimConfig {
    std::uint64_t seed = 1;
    double horizon = 1e4;  // model time per replication
    size_t replications = 10;
    ParameterFunction d;
};

struct MeanPayoffEstimate {
    double mean = 0;
    double se = 0;
    size_t replications = 0;
    std::vector<double> totals;  // cost per time unit of each replication
    std::vector<double> costs;   // total cost of each replication
    size_t cycles = 0;           // regeneration cycles (single replication only)
};

// Ringing time of the alarm's distribution with parameter d at quantile
// u in (0, 1].
double sample_ringing(const Family& f, double d, double u);

// Cost per time unit over `horizon`, averaged over replications run in
// parallel.  With one replication the standard error comes from
// regeneration cycles at the first regeneration state (batch means when no
// cycle completes often enough).
MeanPayoffEstimate simulate(const Model& m, const SimConfig& cfg);

// Same result on one thread.
MeanPayoffEstimate simulate_serial(const Model& m, const SimConfig& cfg);

// Sample statistics of epochs started in setting state s with parameter d.
struct EpochStats {
    size_t epochs = 0;
    std::map<size_t, size_t> hits;  // regeneration state reached -> count
    double theta_mean = 0, theta_se = 0;
    double cost_mean = 0, cost_se = 0;
    double theta_max = 0;

    double pi(size_t t) const;
    double pi_se(size_t t) const;
};

EpochStats simulate_epochs(const Model& m, size_t s, const Rational& d, size_t epochs, std::uint64_t seed);

// Pairwise sum in index order.
double pairwise_sum(const double* x, size_t n);

}  // namespace actmc
