#include "casrisk/mc_baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace casrisk {

std::vector<int> sample_interval_outages(const NetworkCase& net, const SystemState& state,
                                         const std::vector<double>& rates_per_hr,
                                         double tau_min, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<int> failed;
    const double tau_hr = tau_min / 60.0;
    for (int k = 0; k < net.num_branches(); ++k) {
        if (!state.in_service[k]) continue;
        const double p = 1.0 - std::exp(-rates_per_hr[k] * tau_hr);
        if (unif(rng) < p) failed.push_back(net.branches[k].id);
    }
    std::sort(failed.begin(), failed.end());
    return failed;
}

namespace {

double simulate_sample(const CascadeSimulator& sim, const SystemState& root, double c0,
                       std::mt19937_64& rng) {
    const AssessmentConfig& cfg = sim.config();
    const double sub_tau = cfg.tau_d_min / static_cast<double>(cfg.n_tau);
    const int total_subs = cfg.k_d() * cfg.n_tau;

    double loss = c0;
    SystemState state = root;
    for (int s = 0; s < total_subs; ++s) {
        if (sim.is_terminal_state(state)) break;
        const std::vector<double> rates = sim.outage_rates(state);
        const std::vector<int> failed =
            sample_interval_outages(sim.network(), state, rates, sub_tau, rng);
        TransitionOutcome out = sim.simulate_multi(state, failed, sub_tau);
        loss += out.cost_mw;
        state = std::move(out.state);
        if (out.terminal) break;
    }
    return loss;
}

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

McEstimate mc_risk(const CascadeSimulator& sim, const std::vector<int>& initial_outage_ids,
                   int samples, std::uint64_t seed, bool parallel) {
    if (samples < 1) throw ContractViolation("mc_risk: samples must be >= 1");
    const auto start = std::chrono::steady_clock::now();

    SystemState root = sim.initial_state();
    const double c0 = sim.apply_initial_outages(root, initial_outage_ids);

    // Per-sample generators from a split sequence: the estimate is identical
    // for the serial and parallel paths and for any thread count.
    std::uint64_t mix = seed;
    std::vector<std::uint64_t> sample_seeds(samples);
    for (int i = 0; i < samples; ++i) sample_seeds[i] = splitmix64(mix);

    std::vector<double> losses(samples, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int i = 0; i < samples; ++i) {
        std::mt19937_64 rng(sample_seeds[i]);
        losses[i] = simulate_sample(sim, root, c0, rng);
    }
    (void)parallel;

    McEstimate est;
    est.samples = samples;
    double sum = 0.0;
    for (double v : losses) sum += v;
    est.mean = sum / samples;
    if (samples >= 2) {
        double sq = 0.0;
        for (double v : losses) sq += (v - est.mean) * (v - est.mean);
        est.std_error = std::sqrt(sq / (samples - 1.0) / samples);
        est.std_error_valid = true;
    }
    est.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

}  // namespace casrisk
