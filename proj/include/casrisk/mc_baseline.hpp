#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "casrisk/cascade_sim.hpp"

namespace casrisk {

/// Independent per-branch outage draws over one sub-interval: each in-service
/// branch fails with 1 - exp(-lambda * tau). Returns the failed branch ids in
/// ascending order.
std::vector<int> sample_interval_outages(const NetworkCase& net, const SystemState& state,
                                         const std::vector<double>& rates_per_hr,
                                         double tau_min, std::mt19937_64& rng);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;  // valid only when n >= 2
    bool std_error_valid = false;
    int samples = 0;
    double wall_seconds = 0.0;
};

/// Sequential quasi-dynamic Monte Carlo over the same horizon as the tree
/// search: K_D intervals, each split into n_tau sub-intervals. The per-sample
/// loss includes the shared initial-outage cost C_0.
McEstimate mc_risk(const CascadeSimulator& sim, const std::vector<int>& initial_outage_ids,
                   int samples, std::uint64_t seed, bool parallel = true);

}  // namespace casrisk
