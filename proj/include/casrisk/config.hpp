#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace casrisk {

/// Overload-dependent branch outage rate. Base rate holds up to the rating,
/// then rises linearly and saturates at lambda_max once the flow reaches
/// kappa_trip times the rating (the same multiple that fires instant trips).
struct RateModel {
    double lambda_max_per_hr = 6.0;
    double kappa_trip = 1.4;
};

struct ConvergenceConfig {
    int window = 5000;              // attempts between risk comparisons
    double rel_threshold = 0.001;   // risk growth over the window, relative
    double coverage_threshold = 0.97;
};

struct AssessmentConfig {
    double tau_d_min = 15.0;
    double t_max_min = 60.0;
    double trust_lambda = 1.0;
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    double mu = 0.8;
    double mu_e = 100.0;
    bool economic_mode = false;
    double delay_min = 15.0;        // re-dispatch activation delay
    double epsilon_cut = 1e-10;     // cut-branch detection threshold
    RateModel rate_model;
    ConvergenceConfig convergence;
    int attempt_budget = 100000;
    std::uint64_t seed = 1;
    int n_tau = 3;                  // quasi-dynamic sub-intervals per tau_d (MC baseline)
    double redispatch_gen_weight = 1e-3;
    double enumeration_cap = 1e6;   // refuse enumeration above this path estimate
    std::size_t matrix_cache_entries = 0;  // 0 = retain all

    // Terminal nodes get ln(rho) = ln(max sibling rho) - terminal_log_offset;
    // fresh zero-index candidates are floored at - candidate_floor_log_offset
    // so exhaustive search never stalls on them.
    double terminal_log_offset = 60.0;
    double candidate_floor_log_offset = 50.0;

    int k_d() const { return static_cast<int>(std::ceil(t_max_min / tau_d_min - 1e-12)); }
};

/// Parses an AssessmentConfig from a JSON file; unknown keys are rejected.
AssessmentConfig load_config(const std::string& path);

}  // namespace casrisk
