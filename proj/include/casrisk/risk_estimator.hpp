#pragma once

#include <vector>

#include "casrisk/cascade_sim.hpp"

namespace casrisk {

struct RiskIndexBreakdown {
    double sigma_alpha = 0.0;  // separation severity, MW
    double sigma_beta = 0.0;   // overload severity, MW
    double rho_alpha = 0.0;
    double rho_beta = 0.0;
    double rho_gamma = 0.0;
    double rho = 0.0;          // alpha*rho_a + beta*rho_b + gamma*rho_g
    double path_prob = 0.0;    // Pr of the candidate path ending in this event
};

/// Candidate next-level events at one state: in-service branches in ascending
/// id order, then the no-outage event (label 0) last.
struct CandidateSet {
    std::vector<int> labels;
    std::vector<double> pr_cond;  // conditional probabilities, sum to 1
    std::vector<RiskIndexBreakdown> index;
};

std::pair<double, double> separation_risk(const NetworkCase& net, const GridMatrices& gm,
                                          const std::vector<double>& flow_mw, int branch_pos,
                                          double path_prob, double cut_eps);

std::pair<double, double> overload_risk(const NetworkCase& net, const GridMatrices& gm,
                                        const std::vector<double>& flow_mw, int branch_pos,
                                        double path_prob, double cut_eps);

double secondary_risk(const NetworkCase& net, const GridMatrices& gm,
                      const std::vector<double>& flow_mw, int branch_pos, double path_prob,
                      double tau_d_min, const RateModel& rate_model, double served_load_mw,
                      double cut_eps);

double no_outage_secondary_risk(const std::vector<double>& sibling_rho, double pr0,
                                int in_service_count, double mu, double gamma);

double combine_index(double rho_alpha, double rho_beta, double rho_gamma, double alpha,
                     double beta, double gamma);

/// Indices for every candidate event at `state`, with conditional and path
/// probabilities. Candidate loops run under OpenMP unless `parallel` is false;
/// both paths produce identical results (independent per-candidate slots).
CandidateSet compute_candidate_indices(const CascadeSimulator& sim, const SystemState& state,
                                       double parent_cum_prob, bool parallel = true);

/// Serial reference for the parallel kernel; kept for testing and benchmarks.
CandidateSet compute_candidate_indices_serial(const CascadeSimulator& sim,
                                              const SystemState& state, double parent_cum_prob);

/// Tempered selection probabilities Pr ~ rho^lambda, evaluated in the log
/// domain so large lambda cannot overflow. All-zero index vectors fall back
/// to the uniform distribution.
std::vector<double> search_probabilities(const std::vector<double>& indices,
                                         double trust_lambda);

}  // namespace casrisk
