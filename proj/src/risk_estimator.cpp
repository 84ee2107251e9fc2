#include "casrisk/risk_estimator.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace casrisk {

std::pair<double, double> separation_risk(const NetworkCase& net, const GridMatrices& gm,
                                          const std::vector<double>& flow_mw, int branch_pos,
                                          double path_prob, double cut_eps) {
    if (!is_cut_branch(net, gm, branch_pos, cut_eps)) return {0.0, 0.0};
    const double sigma = 2.0 * std::abs(flow_mw[branch_pos]);
    return {sigma, path_prob * sigma};
}

std::pair<double, double> overload_risk(const NetworkCase& net, const GridMatrices& gm,
                                        const std::vector<double>& flow_mw, int branch_pos,
                                        double path_prob, double cut_eps) {
    if (is_cut_branch(net, gm, branch_pos, cut_eps)) return {0.0, 0.0};
    double sigma = 0.0;
    for (int k = 0; k < net.num_branches(); ++k) {
        if (k == branch_pos || !gm.in_service[k]) continue;
        const double post = flow_mw[k] + ptdf(net, gm, branch_pos, k, cut_eps) * flow_mw[branch_pos];
        sigma += std::max(std::abs(post) - net.branches[k].rating_mw, 0.0);
    }
    return {sigma, path_prob * sigma};
}

double secondary_risk(const NetworkCase& net, const GridMatrices& gm,
                      const std::vector<double>& flow_mw, int branch_pos, double path_prob,
                      double tau_d_min, const RateModel& rate_model, double served_load_mw,
                      double cut_eps) {
    if (is_cut_branch(net, gm, branch_pos, cut_eps)) return 0.0;
    std::vector<double> post_rates;
    post_rates.reserve(gm.in_service.size());
    for (int k = 0; k < net.num_branches(); ++k) {
        if (k == branch_pos || !gm.in_service[k]) continue;
        const double post = flow_mw[k] + ptdf(net, gm, branch_pos, k, cut_eps) * flow_mw[branch_pos];
        post_rates.push_back(outage_rate(net.branches[k], post, rate_model));
    }
    if (post_rates.empty()) return 0.0;
    const MtProbabilities probs = mt_outage_probabilities(post_rates, tau_d_min);
    double pr_sum = 0.0;
    for (double p : probs.pr) pr_sum += p;
    const double c_tilde = 0.01 * served_load_mw;
    return path_prob * pr_sum * c_tilde / static_cast<double>(post_rates.size());
}

double no_outage_secondary_risk(const std::vector<double>& sibling_rho, double pr0,
                                int in_service_count, double mu, double gamma) {
    if (in_service_count <= 0) return 0.0;
    double sum = 0.0;
    for (double r : sibling_rho) sum += r;
    return gamma * mu * (pr0 / static_cast<double>(in_service_count)) * sum;
}

double combine_index(double rho_alpha, double rho_beta, double rho_gamma, double alpha,
                     double beta, double gamma) {
    return alpha * rho_alpha + beta * rho_beta + gamma * rho_gamma;
}

namespace {

CandidateSet compute_impl(const CascadeSimulator& sim, const SystemState& state,
                          double parent_cum_prob, bool parallel) {
    const NetworkCase& net = sim.network();
    const AssessmentConfig& cfg = sim.config();
    const auto gm = sim.matrices_for(state);

    std::vector<int> positions;
    for (int k = 0; k < net.num_branches(); ++k) {
        if (state.in_service[k]) positions.push_back(k);
    }
    std::sort(positions.begin(), positions.end(),
              [&](int a, int b) { return net.branches[a].id < net.branches[b].id; });

    std::vector<double> rates(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i) {
        rates[i] = outage_rate(net.branches[positions[i]], state.flow_mw[positions[i]],
                               cfg.rate_model);
    }
    const MtProbabilities probs = mt_outage_probabilities(rates, cfg.tau_d_min);

    const int nc = static_cast<int>(positions.size());
    CandidateSet set;
    set.labels.resize(nc + 1);
    set.pr_cond.resize(nc + 1);
    set.index.resize(nc + 1);

    const double served = state.total_served_mw(net);
    const int in_count = state.in_service_count();

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (int i = 0; i < nc; ++i) {
        const int pos = positions[i];
        RiskIndexBreakdown& ix = set.index[i];
        ix.path_prob = parent_cum_prob * probs.pr[i];
        std::tie(ix.sigma_alpha, ix.rho_alpha) = separation_risk(
            net, *gm, state.flow_mw, pos, ix.path_prob, cfg.epsilon_cut);
        std::tie(ix.sigma_beta, ix.rho_beta) = overload_risk(
            net, *gm, state.flow_mw, pos, ix.path_prob, cfg.epsilon_cut);
        ix.rho_gamma = secondary_risk(net, *gm, state.flow_mw, pos, ix.path_prob,
                                      cfg.tau_d_min, cfg.rate_model, served, cfg.epsilon_cut);
        ix.rho = combine_index(ix.rho_alpha, ix.rho_beta, ix.rho_gamma, cfg.alpha, cfg.beta,
                               cfg.gamma);
        set.labels[i] = net.branches[pos].id;
        set.pr_cond[i] = probs.pr[i];
    }

    // No-outage candidate, last.
    std::vector<double> sibling_rho(nc);
    for (int i = 0; i < nc; ++i) sibling_rho[i] = set.index[i].rho;
    RiskIndexBreakdown& zero = set.index[nc];
    zero.path_prob = parent_cum_prob * probs.pr0;
    zero.rho_gamma = no_outage_secondary_risk(sibling_rho, probs.pr0, in_count, cfg.mu, 1.0);
    zero.rho = cfg.gamma * zero.rho_gamma;
    set.labels[nc] = 0;
    set.pr_cond[nc] = probs.pr0;
    return set;
}

}  // namespace

CandidateSet compute_candidate_indices(const CascadeSimulator& sim, const SystemState& state,
                                       double parent_cum_prob, bool parallel) {
    return compute_impl(sim, state, parent_cum_prob, parallel);
}

CandidateSet compute_candidate_indices_serial(const CascadeSimulator& sim,
                                              const SystemState& state,
                                              double parent_cum_prob) {
    return compute_impl(sim, state, parent_cum_prob, false);
}

std::vector<double> search_probabilities(const std::vector<double>& indices,
                                         double trust_lambda) {
    if (trust_lambda < 0.0) throw ContractViolation("search_probabilities: lambda must be >= 0");
    const std::size_t n = indices.size();
    if (n == 0) return {};
    double max_rho = 0.0;
    for (double r : indices) {
        if (r < 0.0) throw ContractViolation("search_probabilities: negative index");
        max_rho = std::max(max_rho, r);
    }
    std::vector<double> p(n, 0.0);
    if (trust_lambda == 0.0 || max_rho <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(n));
        return p;
    }
    const double log_max = std::log(max_rho);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (indices[i] > 0.0) {
            p[i] = std::exp(trust_lambda * (std::log(indices[i]) - log_max));
            total += p[i];
        }
    }
    for (double& v : p) v /= total;
    return p;
}

}  // namespace casrisk
