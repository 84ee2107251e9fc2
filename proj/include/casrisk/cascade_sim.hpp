#pragma once

#include <cstdint>
#include <list>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "casrisk/config.hpp"
#include "casrisk/grid_model.hpp"
#include "casrisk/network_case.hpp"

namespace casrisk {

class InvalidEventError : public std::runtime_error {
public:
    explicit InvalidEventError(const std::string& what) : std::runtime_error(what) {}
};

/// Shared store of GridMatrices keyed by in-service mask. A capacity of 0
/// retains everything; otherwise least-recently-used entries are dropped and
/// rebuilt on demand (rebuilds are per-island and cheap at desk scale).
class MatrixPool {
public:
    MatrixPool(const NetworkCase& net, std::size_t capacity);

    std::shared_ptr<const GridMatrices> acquire(const BranchMask& in_service);
    std::shared_ptr<const GridMatrices> acquire_removed(const GridMatrices& parent,
                                                        const std::vector<int>& removed_positions);

private:
    std::shared_ptr<const GridMatrices> insert(std::string key, GridMatrices gm);

    const NetworkCase& net_;
    std::size_t capacity_;
    std::list<std::string> lru_;
    struct Entry {
        std::shared_ptr<const GridMatrices> gm;
        std::list<std::string>::iterator lru_it;
    };
    std::unordered_map<std::string, Entry> entries_;
};

struct RedispatchCommand {
    double created_min = 0.0;
    double due_min = 0.0;
    int id = 0;
};

struct ExecutingCommand {
    bool active = false;
    int id = 0;
    std::vector<double> gen_target_mw;
};

struct SystemState {
    BranchMask in_service;
    std::vector<double> gen_mw;    // per generator record
    std::vector<double> shed_mw;   // per load record, cumulative
    std::vector<double> flow_mw;   // per branch, 0 when out of service
    double clock_min = 0.0;
    double load_multiplier = 1.0;
    std::vector<RedispatchCommand> queue;
    ExecutingCommand executing;
    int next_command_id = 0;
    double cost_redispatch_mw = 0.0;  // C_R of the current level
    double cost_balancing_mw = 0.0;   // C_B of the current level

    double demand_mw(const NetworkCase& net, int load_idx) const {
        return net.loads[load_idx].p_mw * load_multiplier;
    }
    double served_mw(const NetworkCase& net, int load_idx) const {
        const double d = demand_mw(net, load_idx);
        const double s = d - shed_mw[load_idx];
        return s > 0.0 ? (s < d ? s : d) : 0.0;
    }
    double total_served_mw(const NetworkCase& net) const;
    int in_service_count() const;
};

struct TransitionOutcome {
    SystemState state;
    double cost_mw = 0.0;  // C_R + C_B (emergency share weighted in economic mode)
    std::vector<int> short_timescale_labels;
    bool terminal = false;
};

struct RedispatchPlan {
    bool total_loss = false;
    std::vector<double> gen_target_mw;
    std::vector<double> shed_target_mw;  // incremental, per load record
};

double outage_rate(const Branch& branch, double flow_mw, const RateModel& model);

struct MtProbabilities {
    std::vector<double> pr;  // aligned with the rate vector passed in
    double pr0 = 1.0;
};

/// First-to-fail outage probabilities over one interval plus the no-outage
/// complement; always a probability distribution.
MtProbabilities mt_outage_probabilities(const std::vector<double>& rates_per_hr,
                                        double tau_d_min);

class CascadeSimulator {
public:
    CascadeSimulator(const NetworkCase& net, const AssessmentConfig& cfg, MatrixPool& pool);

    const NetworkCase& network() const { return net_; }
    const AssessmentConfig& config() const { return cfg_; }

    /// Pre-outage state: full topology, case dispatch scaled to the total
    /// demand, flows solved, clock at 0.
    SystemState initial_state() const;

    /// Applies the root outage set (branch ids) as one event at t = 0 and the
    /// short-timescale consequences. Returns the immediate cost C_0.
    double apply_initial_outages(SystemState& state, const std::vector<int>& branch_ids) const;

    /// One mid-timescale interval: event (0 = no outage), instant protection
    /// cascade, delayed re-dispatch, load-curve update, clock advance.
    TransitionOutcome simulate_transition(const SystemState& state, int event_label) const;

    /// Quasi-dynamic variant for the MC baseline: a set of simultaneous
    /// outages (ascending branch id) over a sub-interval of length dt_min.
    TransitionOutcome simulate_multi(const SystemState& state, const std::vector<int>& labels,
                                     double dt_min) const;

    /// Per-branch outage rates at the state's flows (0 for out-of-service).
    std::vector<double> outage_rates(const SystemState& state) const;

    std::shared_ptr<const GridMatrices> matrices_for(const SystemState& state) const;

    // Exposed pieces of the transition, also used directly by tests.
    double apply_short_timescale(SystemState& state, std::vector<int>* tripped_labels) const;
    double balance_islands(SystemState& state) const;
    RedispatchPlan redispatch_program(const SystemState& state) const;
    void redispatch_step(SystemState& state, double dt_min) const;
    void update_load_level(SystemState& state, double minute) const;
    void refresh_flows(SystemState& state) const;

    bool is_terminal_state(const SystemState& state) const;

    std::uint64_t transition_count() const { return transition_count_; }

private:
    void apply_outage_set(SystemState& state, const std::vector<int>& positions) const;
    Eigen::VectorXd bus_injections(const SystemState& state) const;

    const NetworkCase& net_;
    const AssessmentConfig& cfg_;
    MatrixPool& pool_;
    std::vector<std::vector<int>> gens_at_bus_;
    std::vector<std::vector<int>> loads_at_bus_;
    mutable std::uint64_t transition_count_ = 0;  // non-duplication audit
};

}  // namespace casrisk
