#include "casrisk/mt_search.hpp"

#include <algorithm>
#include <cmath>

namespace casrisk {

using boost::multiprecision::cpp_int;

cpp_int path_count_formula(int num_elements, int levels) {
    if (num_elements < 0 || levels < 0) {
        throw ContractViolation("path_count_formula: arguments must be >= 0");
    }
    cpp_int total = 0;
    for (int i = 0; i <= levels; ++i) {
        const int failures = levels - i;  // ordered distinct failures
        if (failures > num_elements) continue;
        cpp_int term = 1;
        for (int k = 0; k < failures; ++k) term *= num_elements - k;  // P(N, failures)
        cpp_int binom = 1;
        for (int k = 1; k <= i; ++k) {
            binom *= levels - k + 1;
            binom /= k;
        }
        total += term * binom;
    }
    return total;
}

double convergence_metric(const std::vector<double>& risk_trace, int attempts) {
    if (attempts < 1 || static_cast<std::size_t>(attempts) > risk_trace.size()) {
        throw ContractViolation("convergence_metric: trace shorter than attempt count");
    }
    const double r_last = risk_trace[attempts - 1];
    double phi = 0.0;
    for (int j = 1; j <= attempts; ++j) {
        phi += static_cast<double>(j) * (r_last - risk_trace[j - 1]);
    }
    return phi;
}

bool check_convergence(const std::vector<double>& risk_trace, double coverage,
                       const ConvergenceConfig& conv) {
    const std::size_t w = static_cast<std::size_t>(conv.window);
    if (risk_trace.size() <= w) return false;
    const double r_now = risk_trace.back();
    const double r_then = risk_trace[risk_trace.size() - 1 - w];
    const bool stable = r_now == 0.0 ? true : (r_now - r_then) / r_now < conv.rel_threshold;
    return stable && coverage >= conv.coverage_threshold;
}

// ---------------------------------------------------------------------------
// MtSearch

MtSearch::MtSearch(const CascadeSimulator& sim, const std::vector<int>& initial_outage_ids,
                   bool parallel_indices)
    : sim_(sim), parallel_indices_(parallel_indices) {
    root_ = std::make_unique<TreeNode>();
    root_->state = sim_.initial_state();
    c0_ = sim_.apply_initial_outages(root_->state, initial_outage_ids);
    root_->level_cost = c0_;
    root_->terminal = sim_.is_terminal_state(root_->state);
    risk_sum_ = c0_;
    if (root_->terminal) coverage_sum_ = 1.0;
}

std::vector<double> MtSearch::child_rhos(const TreeNode* node) const {
    std::vector<double> rhos(node->children.size());
    for (std::size_t i = 0; i < node->children.size(); ++i) rhos[i] = node->children[i].rho;
    return rhos;
}

void MtSearch::expand(TreeNode* node) {
    const CandidateSet cs =
        compute_candidate_indices(sim_, node->state, node->cum_prob, parallel_indices_);
    node->children.resize(cs.labels.size());
    double max_rho = 0.0;
    for (std::size_t i = 0; i < cs.labels.size(); ++i) max_rho = std::max(max_rho, cs.index[i].rho);
    const double floor =
        max_rho > 0.0 ? max_rho * std::exp(-sim_.config().candidate_floor_log_offset) : 0.0;
    for (std::size_t i = 0; i < cs.labels.size(); ++i) {
        TreeNode::Child& c = node->children[i];
        c.label = cs.labels[i];
        c.pr_cond = cs.pr_cond[i];
        c.rho = std::max(cs.index[i].rho, floor);
    }
    node->expanded = true;
}

MtSearch::Attempt MtSearch::forward_search_attempt(std::mt19937_64& rng) {
    Attempt attempt;
    TreeNode* node = root_.get();
    attempt.path.push_back(node);

    while (!node->terminal) {
        if (!node->expanded) expand(node);
        const std::vector<double> probs =
            search_probabilities(child_rhos(node), sim_.config().trust_lambda);

        const double u =
            static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
        double acc = 0.0;
        std::size_t pick = probs.size() - 1;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }

        TreeNode::Child& child = node->children[pick];
        if (child.node != nullptr) {
            node = child.node;  // retrieved from memory, no new risk term
            attempt.path.push_back(node);
            continue;
        }

        StateKey key = node->key;
        key.push_back(child.label);
        if (auto it = table_.find(key); it != table_.end()) {
            // Defensive lookup-before-simulate; a key's parent is unique so
            // this only fires if the child link was lost.
            child.node = it->second.get();
            node = child.node;
            attempt.path.push_back(node);
            continue;
        }

        TransitionOutcome outcome = sim_.simulate_transition(node->state, child.label);
        auto fresh = std::make_unique<TreeNode>();
        fresh->key = key;
        fresh->level = node->level + 1;
        fresh->state = std::move(outcome.state);
        fresh->cond_prob = child.pr_cond;
        fresh->cum_prob = node->cum_prob * child.pr_cond;
        fresh->level_cost = outcome.cost_mw;
        fresh->terminal = outcome.terminal || fresh->level >= sim_.config().k_d();
        fresh->parent = node;
        fresh->index_in_parent = static_cast<int>(pick);

        const double term = fresh->cum_prob * fresh->level_cost;
        risk_sum_ += term;
        attempt.risk_added += term;
        ++attempt.new_nodes;
        if (fresh->terminal) coverage_sum_ += fresh->cum_prob;

        child.node = fresh.get();
        node = fresh.get();
        table_.emplace(std::move(key), std::move(fresh));
        attempt.path.push_back(node);
    }
    return attempt;
}

void MtSearch::backward_update(const std::vector<TreeNode*>& path) {
    if (path.size() < 2) return;  // root-only path: nothing to update
    for (std::size_t i = path.size() - 1; i >= 1; --i) {
        TreeNode* node = path[i];
        TreeNode* parent = path[i - 1];
        double new_rho;
        if (i == path.size() - 1) {
            // Terminal: a relative epsilon floor keeps Eq-style tempering
            // well-conditioned while making revisits vanishingly likely.
            double max_sibling = 0.0;
            for (const auto& c : parent->children) max_sibling = std::max(max_sibling, c.rho);
            new_rho = max_sibling > 0.0
                          ? max_sibling * std::exp(-sim_.config().terminal_log_offset)
                          : 0.0;
        } else {
            const std::vector<double> probs =
                search_probabilities(child_rhos(node), sim_.config().trust_lambda);
            new_rho = 0.0;
            for (std::size_t c = 0; c < node->children.size(); ++c) {
                new_rho += node->children[c].rho * probs[c];
            }
        }
        parent->children[node->index_in_parent].rho = new_rho;
    }
}

double MtSearch::recompute_risk() const {
    double risk = c0_;
    for (const auto& [key, node] : table_) risk += node->cum_prob * node->level_cost;
    return risk;
}

double MtSearch::subsequent_risk(const TreeNode* node) const {
    double risk = node->cum_prob * node->level_cost;
    for (const auto& c : node->children) {
        if (c.node != nullptr) risk += subsequent_risk(c.node);
    }
    return risk;
}

// ---------------------------------------------------------------------------
// Exhaustive enumeration oracle

namespace {

struct EnumContext {
    const CascadeSimulator* sim;
    EnumerationResult* result;
    bool collect;
};

void enumerate_dfs(EnumContext& ctx, const SystemState& state, StateKey& key, double cum_prob,
                   int level, double path_cost, bool terminal) {
    const AssessmentConfig& cfg = ctx.sim->config();
    if (terminal || level >= cfg.k_d()) {
        ++ctx.result->path_count;
        ctx.result->coverage += cum_prob;
        if (ctx.collect) ctx.result->paths.push_back({key, cum_prob, path_cost});
        return;
    }
    const NetworkCase& net = ctx.sim->network();
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

    for (std::size_t i = 0; i <= positions.size(); ++i) {
        const bool is_zero = i == positions.size();
        const int label = is_zero ? 0 : net.branches[positions[i]].id;
        const double pr = is_zero ? probs.pr0 : probs.pr[i];
        const TransitionOutcome out = ctx.sim->simulate_transition(state, label);
        const double child_cum = cum_prob * pr;
        ctx.result->risk += child_cum * out.cost_mw;
        key.push_back(label);
        enumerate_dfs(ctx, out.state, key, child_cum, level + 1, path_cost + out.cost_mw,
                      out.terminal);
        key.pop_back();
    }
}

}  // namespace

EnumerationResult enumerate_all(const CascadeSimulator& sim,
                                const std::vector<int>& initial_outage_ids, bool collect_paths) {
    SystemState root = sim.initial_state();
    const double c0 = sim.apply_initial_outages(root, initial_outage_ids);

    const cpp_int estimate = path_count_formula(root.in_service_count(), sim.config().k_d());
    const double estimate_d = estimate.convert_to<double>();
    if (estimate_d > sim.config().enumeration_cap) {
        throw EnumerationCapError("enumeration refused: estimated " +
                                      std::to_string(estimate_d) + " paths exceed the cap",
                                  estimate_d);
    }

    EnumerationResult result;
    result.risk = c0;
    EnumContext ctx{&sim, &result, collect_paths};
    StateKey key;
    enumerate_dfs(ctx, root, key, 1.0, 0, c0, sim.is_terminal_state(root));
    return result;
}

// ---------------------------------------------------------------------------
// Assessment driver

AssessmentResult run_assessment(const CascadeSimulator& sim,
                                const std::vector<int>& initial_outage_ids, std::uint64_t seed,
                                int attempt_budget, bool parallel_indices) {
    const std::uint64_t calls_before = sim.transition_count();
    std::mt19937_64 rng(seed);
    MtSearch search(sim, initial_outage_ids, parallel_indices);

    AssessmentResult result;
    result.c0 = search.c0();
    for (int j = 0; j < attempt_budget; ++j) {
        const MtSearch::Attempt attempt = search.forward_search_attempt(rng);
        search.backward_update(attempt.path);
        result.risk_trace.push_back(search.accumulated_risk());
        result.coverage_trace.push_back(search.coverage());
        ++result.attempts;
        if (search.coverage() >= 1.0 - 1e-12) {
            result.exhausted = true;
            result.converged = true;
            break;
        }
        if (check_convergence(result.risk_trace, search.coverage(), sim.config().convergence)) {
            result.converged = true;
            break;
        }
        if (search.root().terminal) {
            result.exhausted = true;
            result.converged = true;
            break;
        }
    }
    result.risk = search.accumulated_risk();
    result.states_stored = search.table_size();
    result.transitions_simulated = sim.transition_count() - calls_before;

    // Highest-contribution terminal paths for the result bundle.
    std::vector<EnumerationPath> paths;
    for (const auto& [key, node] : search.table()) {
        if (!node->terminal) continue;
        double cost = 0.0;
        for (const TreeNode* n = node.get(); n != nullptr; n = n->parent) cost += n->level_cost;
        paths.push_back({key, node->cum_prob, cost});
    }
    std::sort(paths.begin(), paths.end(), [](const auto& a, const auto& b) {
        return a.probability * a.total_cost_mw > b.probability * b.total_cost_mw;
    });
    if (paths.size() > 20) paths.resize(20);
    result.top_paths = std::move(paths);
    return result;
}

}  // namespace casrisk
