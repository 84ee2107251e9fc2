#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <memory>
#include <random>
#include <unordered_map>
#include <vector>

#include "casrisk/risk_estimator.hpp"

namespace casrisk {

/// Ordered event-label sequence from the root; 0 marks a no-outage interval.
using StateKey = std::vector<int>;

struct StateKeyHash {
    std::size_t operator()(const StateKey& key) const {
        std::size_t h = 1469598103934665603ull;
        for (int v : key) {
            h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull;
            h *= 1099511628211ull;
        }
        return h;
    }
};

struct TreeNode {
    StateKey key;
    int level = 0;
    SystemState state;
    double cond_prob = 1.0;   // from parent
    double cum_prob = 1.0;    // product along the path
    double level_cost = 0.0;  // C of this level
    bool terminal = false;
    bool expanded = false;

    struct Child {
        int label = 0;
        double pr_cond = 0.0;
        double rho = 0.0;  // current risk estimation index, backward-updated
        TreeNode* node = nullptr;
    };
    std::vector<Child> children;

    TreeNode* parent = nullptr;
    int index_in_parent = -1;
};

class EnumerationCapError : public std::runtime_error {
public:
    EnumerationCapError(const std::string& what, double estimate)
        : std::runtime_error(what), estimated_paths(estimate) {}
    double estimated_paths;
};

/// Literal evaluation of the cascade path-count formula in exact integers:
/// sum over i of P(N, K_D - i) * C(K_D, i).
boost::multiprecision::cpp_int path_count_formula(int num_elements, int levels);

/// Convergence-quality metric: sum_j j * (R_last - R_j) over the first
/// attempts entries of the risk trace.
double convergence_metric(const std::vector<double>& risk_trace, int attempts);

bool check_convergence(const std::vector<double>& risk_trace, double coverage,
                       const ConvergenceConfig& conv);

class MtSearch {
public:
    MtSearch(const CascadeSimulator& sim, const std::vector<int>& initial_outage_ids,
             bool parallel_indices = true);

    struct Attempt {
        std::vector<TreeNode*> path;  // root .. terminal
        double risk_added = 0.0;
        int new_nodes = 0;
    };

    Attempt forward_search_attempt(std::mt19937_64& rng);
    void backward_update(const std::vector<TreeNode*>& path);

    double accumulated_risk() const { return risk_sum_; }
    /// Recomputes the risk from the table; used to cross-check the running sum.
    double recompute_risk() const;
    double coverage() const { return coverage_sum_; }
    double c0() const { return c0_; }
    const TreeNode& root() const { return *root_; }
    std::size_t table_size() const { return table_.size(); }

    /// Partial expected-loss sum over the visited descendants of `node`,
    /// including the node's own term.
    double subsequent_risk(const TreeNode* node) const;

    const std::unordered_map<StateKey, std::unique_ptr<TreeNode>, StateKeyHash>& table() const {
        return table_;
    }

private:
    void expand(TreeNode* node);
    std::vector<double> child_rhos(const TreeNode* node) const;

    const CascadeSimulator& sim_;
    bool parallel_indices_;
    std::unique_ptr<TreeNode> root_;
    std::unordered_map<StateKey, std::unique_ptr<TreeNode>, StateKeyHash> table_;
    double c0_ = 0.0;
    double risk_sum_ = 0.0;
    double coverage_sum_ = 0.0;
};

struct EnumerationPath {
    StateKey key;
    double probability = 0.0;
    double total_cost_mw = 0.0;  // C_0 plus every level cost along the path
};

struct EnumerationResult {
    double risk = 0.0;
    std::uint64_t path_count = 0;
    double coverage = 0.0;
    std::vector<EnumerationPath> paths;
};

/// Depth-first exhaustive expansion; throws EnumerationCapError when the
/// path-count estimate exceeds the configured cap.
EnumerationResult enumerate_all(const CascadeSimulator& sim,
                                const std::vector<int>& initial_outage_ids,
                                bool collect_paths = false);

struct AssessmentResult {
    double risk = 0.0;
    double c0 = 0.0;
    int attempts = 0;
    bool converged = false;
    bool exhausted = false;  // coverage reached 1
    std::vector<double> risk_trace;
    std::vector<double> coverage_trace;
    std::vector<EnumerationPath> top_paths;
    std::size_t states_stored = 0;
    std::uint64_t transitions_simulated = 0;
};

/// Forward/backward search until convergence, exhaustion, or the attempt
/// budget runs out.
AssessmentResult run_assessment(const CascadeSimulator& sim,
                                const std::vector<int>& initial_outage_ids,
                                std::uint64_t seed, int attempt_budget,
                                bool parallel_indices = true);

}  // namespace casrisk
