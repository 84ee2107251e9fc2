#include "casrisk/cascade_sim.hpp"

#include <algorithm>
#include <cmath>

#include "casrisk/lp.hpp"

namespace casrisk {

namespace {
constexpr double kFlowTol = 1e-7;
constexpr double kBalanceTol = 1e-6;
}  // namespace

double SystemState::total_served_mw(const NetworkCase& net) const {
    double total = 0.0;
    for (std::size_t l = 0; l < net.loads.size(); ++l) total += served_mw(net, static_cast<int>(l));
    return total;
}

int SystemState::in_service_count() const {
    int n = 0;
    for (char c : in_service) n += (c != 0);
    return n;
}

// ---------------------------------------------------------------------------
// MatrixPool

MatrixPool::MatrixPool(const NetworkCase& net, std::size_t capacity)
    : net_(net), capacity_(capacity) {}

std::shared_ptr<const GridMatrices> MatrixPool::insert(std::string key, GridMatrices gm) {
    auto sp = std::make_shared<const GridMatrices>(std::move(gm));
    lru_.push_front(key);
    entries_[std::move(key)] = Entry{sp, lru_.begin()};
    if (capacity_ > 0) {
        while (entries_.size() > capacity_) {
            entries_.erase(lru_.back());
            lru_.pop_back();
        }
    }
    return sp;
}

std::shared_ptr<const GridMatrices> MatrixPool::acquire(const BranchMask& in_service) {
    std::string key(in_service.begin(), in_service.end());
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second.lru_it);
        return it->second.gm;
    }
    return insert(std::move(key), make_grid_matrices(net_, in_service));
}

std::shared_ptr<const GridMatrices> MatrixPool::acquire_removed(
    const GridMatrices& parent, const std::vector<int>& removed_positions) {
    BranchMask mask = parent.in_service;
    for (int pos : removed_positions) mask[pos] = 0;
    std::string key(mask.begin(), mask.end());
    auto it = entries_.find(key);
    if (it != entries_.end()) {
        lru_.splice(lru_.begin(), lru_, it->second.lru_it);
        return it->second.gm;
    }
    GridMatrices gm = parent;
    remove_branches(net_, gm, removed_positions);
    return insert(std::move(key), std::move(gm));
}

// ---------------------------------------------------------------------------
// Rates and interval probabilities

double outage_rate(const Branch& branch, double flow_mw, const RateModel& model) {
    const double f = std::abs(flow_mw);
    const double fmax = branch.rating_mw;
    const double fsat = model.kappa_trip * fmax;
    if (f <= fmax) return branch.lambda0_per_hr;
    if (f >= fsat) return model.lambda_max_per_hr;
    const double w = (f - fmax) / (fsat - fmax);
    return branch.lambda0_per_hr + w * (model.lambda_max_per_hr - branch.lambda0_per_hr);
}

MtProbabilities mt_outage_probabilities(const std::vector<double>& rates_per_hr,
                                        double tau_d_min) {
    if (tau_d_min <= 0.0) throw ContractViolation("mt_outage_probabilities: tau_d must be > 0");
    double total = 0.0;
    for (double r : rates_per_hr) {
        if (r < 0.0) throw ContractViolation("mt_outage_probabilities: negative rate");
        total += r;
    }
    MtProbabilities out;
    out.pr.assign(rates_per_hr.size(), 0.0);
    if (total <= 0.0) {
        out.pr0 = 1.0;
        return out;
    }
    const double tau_hr = tau_d_min / 60.0;
    out.pr0 = std::exp(-total * tau_hr);
    const double any = 1.0 - out.pr0;
    for (std::size_t i = 0; i < rates_per_hr.size(); ++i) {
        out.pr[i] = (rates_per_hr[i] / total) * any;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CascadeSimulator

CascadeSimulator::CascadeSimulator(const NetworkCase& net, const AssessmentConfig& cfg,
                                   MatrixPool& pool)
    : net_(net), cfg_(cfg), pool_(pool) {
    gens_at_bus_.assign(net_.num_buses(), {});
    loads_at_bus_.assign(net_.num_buses(), {});
    for (std::size_t g = 0; g < net_.generators.size(); ++g) {
        gens_at_bus_[net_.bus_of(net_.generators[g].bus)].push_back(static_cast<int>(g));
    }
    for (std::size_t l = 0; l < net_.loads.size(); ++l) {
        loads_at_bus_[net_.bus_of(net_.loads[l].bus)].push_back(static_cast<int>(l));
    }
}

std::shared_ptr<const GridMatrices> CascadeSimulator::matrices_for(
    const SystemState& state) const {
    return pool_.acquire(state.in_service);
}

Eigen::VectorXd CascadeSimulator::bus_injections(const SystemState& state) const {
    Eigen::VectorXd inj = Eigen::VectorXd::Zero(net_.num_buses());
    for (std::size_t g = 0; g < net_.generators.size(); ++g) {
        inj(net_.bus_of(net_.generators[g].bus)) += state.gen_mw[g];
    }
    for (std::size_t l = 0; l < net_.loads.size(); ++l) {
        inj(net_.bus_of(net_.loads[l].bus)) -= state.served_mw(net_, static_cast<int>(l));
    }
    return inj;
}

void CascadeSimulator::refresh_flows(SystemState& state) const {
    const auto gm = matrices_for(state);
    const FlowSolution sol = dc_power_flow(net_, *gm, bus_injections(state), kBalanceTol * 10.0);
    state.flow_mw = sol.branch_flow_mw;
}

SystemState CascadeSimulator::initial_state() const {
    SystemState s;
    s.in_service.assign(net_.num_branches(), 1);
    s.gen_mw.resize(net_.generators.size());
    s.shed_mw.assign(net_.loads.size(), 0.0);
    s.load_multiplier = net_.load_curve.multiplier_at(0.0);

    double demand = 0.0;
    for (std::size_t l = 0; l < net_.loads.size(); ++l) {
        demand += net_.loads[l].p_mw * s.load_multiplier;
    }
    double dispatched = 0.0;
    for (const auto& g : net_.generators) dispatched += g.p_mw;
    const double scale = dispatched > 0.0 ? demand / dispatched : 0.0;
    for (std::size_t g = 0; g < net_.generators.size(); ++g) {
        s.gen_mw[g] = net_.generators[g].p_mw * scale;
    }
    balance_islands(s);  // absorbs rounding and any clamping
    refresh_flows(s);
    return s;
}

void CascadeSimulator::apply_outage_set(SystemState& state,
                                        const std::vector<int>& positions) const {
    if (positions.empty()) return;
    const auto parent = matrices_for(state);
    pool_.acquire_removed(*parent, positions);  // prime the pool via low-rank update
    for (int pos : positions) {
        state.in_service[pos] = 0;
        state.flow_mw[pos] = 0.0;
    }
}

double CascadeSimulator::balance_islands(SystemState& state) const {
    const IslandPartition part = find_islands(net_, state.in_service);
    double shed_cost = 0.0;

    for (int isl = 0; isl < part.count; ++isl) {
        std::vector<int> gens, loads;
        for (int b = 0; b < net_.num_buses(); ++b) {
            if (part.island_of_bus[b] != isl) continue;
            gens.insert(gens.end(), gens_at_bus_[b].begin(), gens_at_bus_[b].end());
            loads.insert(loads.end(), loads_at_bus_[b].begin(), loads_at_bus_[b].end());
        }
        double served = 0.0;
        for (int l : loads) served += state.served_mw(net_, l);
        double gen_total = 0.0, cap = 0.0, minout = 0.0;
        for (int g : gens) {
            gen_total += state.gen_mw[g];
            cap += net_.generators[g].pmax_mw;
            minout += net_.generators[g].pmin_mw;
        }

        if (served > cap + kBalanceTol) {
            // Not enough capacity: shed the excess pro-rata by served share.
            const double excess = served - cap;
            for (int l : loads) {
                const double share = state.served_mw(net_, l) / served;
                state.shed_mw[l] += excess * share;
            }
            shed_cost += excess;
            for (int g : gens) state.gen_mw[g] = net_.generators[g].pmax_mw;
            continue;
        }
        if (served < minout - kBalanceTol) {
            // Below minimum output: curtail generation pro-rata, no cost.
            const double scale = minout > 0.0 ? served / minout : 0.0;
            for (int g : gens) state.gen_mw[g] = net_.generators[g].pmin_mw * scale;
            continue;
        }

        // Feasible range: move generators from their current outputs.
        for (int g : gens) {
            state.gen_mw[g] = std::clamp(state.gen_mw[g], net_.generators[g].pmin_mw,
                                         net_.generators[g].pmax_mw);
        }
        gen_total = 0.0;
        for (int g : gens) gen_total += state.gen_mw[g];
        double delta = served - gen_total;
        if (std::abs(delta) > 1e-12) {
            double headroom = 0.0;
            for (int g : gens) {
                headroom += delta > 0.0 ? net_.generators[g].pmax_mw - state.gen_mw[g]
                                        : state.gen_mw[g] - net_.generators[g].pmin_mw;
            }
            if (headroom > 0.0) {
                for (int g : gens) {
                    const double h = delta > 0.0
                                         ? net_.generators[g].pmax_mw - state.gen_mw[g]
                                         : state.gen_mw[g] - net_.generators[g].pmin_mw;
                    state.gen_mw[g] += delta * (h / headroom);
                }
            }
        }
    }

    state.cost_balancing_mw += shed_cost;
    return shed_cost;
}

double CascadeSimulator::apply_short_timescale(SystemState& state,
                                               std::vector<int>* tripped_labels) const {
    const double cost_before = state.cost_balancing_mw;
    balance_islands(state);
    refresh_flows(state);

    const int max_rounds = net_.num_branches() + 1;
    for (int round = 0; round < max_rounds; ++round) {
        std::vector<int> trips;
        for (int k = 0; k < net_.num_branches(); ++k) {
            if (!state.in_service[k]) continue;
            const double limit = cfg_.rate_model.kappa_trip * net_.branches[k].rating_mw;
            if (std::abs(state.flow_mw[k]) > limit * (1.0 + 1e-9) + kFlowTol) {
                trips.push_back(k);
            }
        }
        if (trips.empty()) break;
        apply_outage_set(state, trips);
        if (tripped_labels) {
            for (int pos : trips) tripped_labels->push_back(net_.branches[pos].id);
        }
        balance_islands(state);
        refresh_flows(state);
    }
    return state.cost_balancing_mw - cost_before;
}

RedispatchPlan CascadeSimulator::redispatch_program(const SystemState& state) const {
    const int ng = static_cast<int>(net_.generators.size());
    const int nl = static_cast<int>(net_.loads.size());
    const auto gm = matrices_for(state);
    const IslandPartition part = find_islands(net_, state.in_service);

    LpProblem lp;
    // Variables: generation increase/decrease, then intentional shed.
    std::vector<int> up(ng), dn(ng), shed(nl);
    for (int g = 0; g < ng; ++g) {
        const auto& gen = net_.generators[g];
        up[g] = lp.add_variable(cfg_.redispatch_gen_weight, 0.0,
                                std::max(0.0, gen.pmax_mw - state.gen_mw[g]));
        dn[g] = lp.add_variable(cfg_.redispatch_gen_weight, 0.0,
                                std::max(0.0, state.gen_mw[g] - gen.pmin_mw));
    }
    for (int l = 0; l < nl; ++l) {
        shed[l] = lp.add_variable(1.0, 0.0, state.served_mw(net_, l));
    }

    // Branch-flow sensitivities to bus injection deltas.
    for (int k = 0; k < net_.num_branches(); ++k) {
        if (!state.in_service[k]) continue;
        const Branch& br = net_.branches[k];
        const int u = net_.bus_of(br.from_bus);
        const int v = net_.bus_of(br.to_bus);
        LpRow hi, lo;
        for (int b = 0; b < net_.num_buses(); ++b) {
            const double s = (gm->Z(u, b) - gm->Z(v, b)) / br.reactance_pu;
            if (s == 0.0) continue;
            for (int g : gens_at_bus_[b]) {
                hi.coeffs.emplace_back(up[g], s);
                hi.coeffs.emplace_back(dn[g], -s);
            }
            for (int l : loads_at_bus_[b]) hi.coeffs.emplace_back(shed[l], s);
        }
        lo.coeffs = hi.coeffs;
        hi.sense = LpSense::LessEqual;
        hi.rhs = br.rating_mw - state.flow_mw[k] + kFlowTol;
        lo.sense = LpSense::GreaterEqual;
        lo.rhs = -br.rating_mw - state.flow_mw[k] - kFlowTol;
        lp.rows.push_back(std::move(hi));
        lp.rows.push_back(std::move(lo));
    }

    // Per-island balance: sum(up - dn) + sum(shed) = served - generated.
    for (int isl = 0; isl < part.count; ++isl) {
        LpRow row;
        row.sense = LpSense::Equal;
        double imbalance = 0.0;
        bool any = false;
        for (int b = 0; b < net_.num_buses(); ++b) {
            if (part.island_of_bus[b] != isl) continue;
            for (int g : gens_at_bus_[b]) {
                row.coeffs.emplace_back(up[g], 1.0);
                row.coeffs.emplace_back(dn[g], -1.0);
                imbalance -= state.gen_mw[g];
                any = true;
            }
            for (int l : loads_at_bus_[b]) {
                row.coeffs.emplace_back(shed[l], 1.0);
                imbalance += state.served_mw(net_, l);
                any = true;
            }
        }
        if (!any) continue;
        row.rhs = imbalance;
        lp.rows.push_back(std::move(row));
    }

    RedispatchPlan plan;
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) {
        plan.total_loss = true;
        return plan;
    }
    plan.gen_target_mw.resize(ng);
    plan.shed_target_mw.resize(nl);
    for (int g = 0; g < ng; ++g) {
        plan.gen_target_mw[g] = state.gen_mw[g] + sol.x[up[g]] - sol.x[dn[g]];
    }
    for (int l = 0; l < nl; ++l) {
        plan.shed_target_mw[l] = std::max(0.0, sol.x[shed[l]]);
        if (plan.shed_target_mw[l] < 1e-9) plan.shed_target_mw[l] = 0.0;
    }
    return plan;
}

void CascadeSimulator::redispatch_step(SystemState& state, double dt_min) const {
    const double now = state.clock_min;

    // Schedule a command when a violation is not already covered by one.
    bool overload = false;
    for (int k = 0; k < net_.num_branches(); ++k) {
        if (!state.in_service[k]) continue;
        if (std::abs(state.flow_mw[k]) > net_.branches[k].rating_mw * (1.0 + 1e-9) + kFlowTol) {
            overload = true;
            break;
        }
    }
    if (overload && state.queue.empty()) {
        state.queue.push_back({now, now + cfg_.delay_min, state.next_command_id++});
    }

    // Activation: the newest due command preempts the executing one.
    int pick = -1;
    for (std::size_t i = 0; i < state.queue.size(); ++i) {
        const auto& cmd = state.queue[i];
        if (cmd.due_min > now + 1e-9) continue;
        if (pick < 0) {
            pick = static_cast<int>(i);
            continue;
        }
        const auto& best = state.queue[pick];
        if (cmd.due_min > best.due_min ||
            (cmd.due_min == best.due_min &&
             (cmd.created_min > best.created_min ||
              (cmd.created_min == best.created_min && cmd.id > best.id)))) {
            pick = static_cast<int>(i);
        }
    }
    if (pick >= 0) {
        const RedispatchCommand cmd = state.queue[pick];
        // Due commands that lost the race are stale; drop them.
        std::erase_if(state.queue,
                      [&](const RedispatchCommand& c) { return c.due_min <= now + 1e-9; });
        const RedispatchPlan plan = redispatch_program(state);
        if (plan.total_loss) {
            double lost = 0.0;
            for (std::size_t l = 0; l < net_.loads.size(); ++l) {
                lost += state.served_mw(net_, static_cast<int>(l));
                state.shed_mw[l] = state.demand_mw(net_, static_cast<int>(l));
            }
            state.cost_redispatch_mw += lost;
            state.executing.active = false;
            balance_islands(state);
            refresh_flows(state);
            return;
        }
        double shed_total = 0.0;
        for (std::size_t l = 0; l < net_.loads.size(); ++l) {
            state.shed_mw[l] += plan.shed_target_mw[l];
            shed_total += plan.shed_target_mw[l];
        }
        state.cost_redispatch_mw += shed_total;
        state.executing = ExecutingCommand{true, cmd.id, plan.gen_target_mw};
    }

    if (state.executing.active) {
        bool done = true;
        for (std::size_t g = 0; g < net_.generators.size(); ++g) {
            const double step = net_.generators[g].ramp_mw_per_min * dt_min;
            const double want = state.executing.gen_target_mw[g] - state.gen_mw[g];
            const double move = std::clamp(want, -step, step);
            state.gen_mw[g] += move;
            if (std::abs(state.executing.gen_target_mw[g] - state.gen_mw[g]) > 1e-9) done = false;
        }
        if (done) state.executing.active = false;
    }

    balance_islands(state);
    refresh_flows(state);
}

void CascadeSimulator::update_load_level(SystemState& state, double minute) const {
    const double mult = net_.load_curve.multiplier_at(minute);
    if (mult != state.load_multiplier) {
        state.load_multiplier = mult;
        // Track the new demand with slack generation inside ramp limits; the
        // residual is settled by island balancing.
        const IslandPartition part = find_islands(net_, state.in_service);
        for (int isl = 0; isl < part.count; ++isl) {
            double served = 0.0, gen_total = 0.0;
            std::vector<int> gens;
            for (int b = 0; b < net_.num_buses(); ++b) {
                if (part.island_of_bus[b] != isl) continue;
                for (int l : loads_at_bus_[b]) served += state.served_mw(net_, l);
                for (int g : gens_at_bus_[b]) {
                    gens.push_back(g);
                    gen_total += state.gen_mw[g];
                }
            }
            double delta = served - gen_total;
            if (std::abs(delta) < 1e-12) continue;
            double headroom = 0.0;
            std::vector<double> lim(gens.size());
            for (std::size_t i = 0; i < gens.size(); ++i) {
                const auto& gen = net_.generators[gens[i]];
                const double ramp = gen.ramp_mw_per_min * cfg_.tau_d_min;
                lim[i] = delta > 0.0 ? std::min(ramp, gen.pmax_mw - state.gen_mw[gens[i]])
                                     : std::min(ramp, state.gen_mw[gens[i]] - gen.pmin_mw);
                lim[i] = std::max(lim[i], 0.0);
                headroom += lim[i];
            }
            const double used = std::min(std::abs(delta), headroom);
            if (headroom > 0.0 && used > 0.0) {
                for (std::size_t i = 0; i < gens.size(); ++i) {
                    state.gen_mw[gens[i]] += (delta > 0.0 ? 1.0 : -1.0) * used * lim[i] / headroom;
                }
            }
        }
        balance_islands(state);
    }
    refresh_flows(state);
}

bool CascadeSimulator::is_terminal_state(const SystemState& state) const {
    if (state.clock_min >= cfg_.t_max_min - 1e-9) return true;
    if (state.total_served_mw(net_) <= 1e-9) return true;
    if (state.in_service_count() == 0) return true;
    return false;
}

double CascadeSimulator::apply_initial_outages(SystemState& state,
                                               const std::vector<int>& branch_ids) const {
    std::vector<int> positions;
    positions.reserve(branch_ids.size());
    for (int id : branch_ids) {
        const int pos = net_.branch_pos(id);
        if (!state.in_service[pos]) {
            throw InvalidEventError("initial outage branch " + std::to_string(id) +
                                    " is not in service");
        }
        positions.push_back(pos);
    }
    state.cost_redispatch_mw = 0.0;
    state.cost_balancing_mw = 0.0;
    apply_outage_set(state, positions);
    apply_short_timescale(state, nullptr);
    const double c0 = state.cost_redispatch_mw +
                      (cfg_.economic_mode ? cfg_.mu_e : 1.0) * state.cost_balancing_mw;
    return c0;
}

TransitionOutcome CascadeSimulator::simulate_transition(const SystemState& state,
                                                        int event_label) const {
    ++transition_count_;
    TransitionOutcome out;
    SystemState& s = out.state;
    s = state;
    s.cost_redispatch_mw = 0.0;
    s.cost_balancing_mw = 0.0;

    if (event_label != 0) {
        int pos = -1;
        try {
            pos = net_.branch_pos(event_label);
        } catch (const MalformedCaseError&) {
            throw InvalidEventError("unknown event branch " + std::to_string(event_label));
        }
        if (!s.in_service[pos]) {
            throw InvalidEventError("event branch " + std::to_string(event_label) +
                                    " is not in service");
        }
        apply_outage_set(s, {pos});
    }
    apply_short_timescale(s, &out.short_timescale_labels);
    redispatch_step(s, cfg_.tau_d_min);
    s.clock_min += cfg_.tau_d_min;
    update_load_level(s, s.clock_min);

    out.cost_mw = s.cost_redispatch_mw +
                  (cfg_.economic_mode ? cfg_.mu_e : 1.0) * s.cost_balancing_mw;
    out.terminal = is_terminal_state(s);
    return out;
}

TransitionOutcome CascadeSimulator::simulate_multi(const SystemState& state,
                                                   const std::vector<int>& labels,
                                                   double dt_min) const {
    TransitionOutcome out;
    SystemState& s = out.state;
    s = state;
    s.cost_redispatch_mw = 0.0;
    s.cost_balancing_mw = 0.0;

    std::vector<int> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    for (int label : sorted) {
        const int pos = net_.branch_pos(label);
        if (!s.in_service[pos]) continue;  // already gone in a protection round
        apply_outage_set(s, {pos});
        apply_short_timescale(s, &out.short_timescale_labels);
    }
    if (sorted.empty()) apply_short_timescale(s, &out.short_timescale_labels);
    redispatch_step(s, dt_min);
    s.clock_min += dt_min;
    update_load_level(s, s.clock_min);

    out.cost_mw = s.cost_redispatch_mw +
                  (cfg_.economic_mode ? cfg_.mu_e : 1.0) * s.cost_balancing_mw;
    out.terminal = is_terminal_state(s);
    return out;
}

std::vector<double> CascadeSimulator::outage_rates(const SystemState& state) const {
    std::vector<double> rates(net_.num_branches(), 0.0);
    for (int k = 0; k < net_.num_branches(); ++k) {
        if (!state.in_service[k]) continue;
        rates[k] = outage_rate(net_.branches[k], state.flow_mw[k], cfg_.rate_model);
    }
    return rates;
}

}  // namespace casrisk
