#include "casrisk/network_case.hpp"

#include <set>
#include <sstream>

namespace casrisk {

double LoadCurve::multiplier_at(double minute) const {
    if (points.empty()) return 1.0;
    if (minute <= points.front().first) return points.front().second;
    if (minute >= points.back().first) return points.back().second;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (minute <= points[i].first) {
            const auto& [t0, m0] = points[i - 1];
            const auto& [t1, m1] = points[i];
            if (t1 == t0) return m1;
            const double w = (minute - t0) / (t1 - t0);
            return m0 + w * (m1 - m0);
        }
    }
    return points.back().second;
}

int NetworkCase::bus_of(int bus_id) const {
    auto it = bus_index.find(bus_id);
    if (it == bus_index.end()) {
        throw MalformedCaseError("unknown bus id " + std::to_string(bus_id));
    }
    return it->second;
}

int NetworkCase::branch_pos(int branch_id) const {
    auto it = branch_index.find(branch_id);
    if (it == branch_index.end()) {
        throw MalformedCaseError("unknown branch id " + std::to_string(branch_id));
    }
    return it->second;
}

double NetworkCase::total_demand_mw() const {
    double total = 0.0;
    for (const auto& ld : loads) total += ld.p_mw;
    return total;
}

void NetworkCase::finalize() {
    bus_index.clear();
    branch_index.clear();

    std::set<int> seen_buses;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (!seen_buses.insert(buses[i]).second) {
            throw MalformedCaseError("duplicate bus id " + std::to_string(buses[i]));
        }
        bus_index[buses[i]] = static_cast<int>(i);
    }

    for (std::size_t i = 0; i < branches.size(); ++i) {
        const Branch& br = branches[i];
        std::ostringstream where;
        where << "branch " << br.id << ": ";
        if (!branch_index.emplace(br.id, static_cast<int>(i)).second) {
            throw MalformedCaseError(where.str() + "duplicate branch id");
        }
        if (!bus_index.count(br.from_bus)) {
            throw MalformedCaseError(where.str() + "from-bus " + std::to_string(br.from_bus) +
                                     " is not a listed bus");
        }
        if (!bus_index.count(br.to_bus)) {
            throw MalformedCaseError(where.str() + "to-bus " + std::to_string(br.to_bus) +
                                     " is not a listed bus");
        }
        if (br.from_bus == br.to_bus) {
            throw MalformedCaseError(where.str() + "self-loop branch");
        }
        if (!(br.reactance_pu > 0.0)) {
            throw MalformedCaseError(where.str() + "reactance must be > 0");
        }
        if (!(br.rating_mw > 0.0)) {
            throw MalformedCaseError(where.str() + "rating must be > 0");
        }
        if (br.lambda0_per_hr < 0.0) {
            throw MalformedCaseError(where.str() + "base outage rate must be >= 0");
        }
    }

    for (std::size_t i = 0; i < generators.size(); ++i) {
        const Generator& g = generators[i];
        std::ostringstream where;
        where << "generator[" << i << "] at bus " << g.bus << ": ";
        if (!bus_index.count(g.bus)) {
            throw MalformedCaseError(where.str() + "bus is not listed");
        }
        if (g.pmin_mw > g.p_mw || g.p_mw > g.pmax_mw) {
            throw MalformedCaseError(where.str() + "requires pmin <= p <= pmax");
        }
        if (g.ramp_mw_per_min < 0.0) {
            throw MalformedCaseError(where.str() + "ramp must be >= 0");
        }
    }

    for (std::size_t i = 0; i < loads.size(); ++i) {
        const Load& ld = loads[i];
        std::ostringstream where;
        where << "load[" << i << "] at bus " << ld.bus << ": ";
        if (!bus_index.count(ld.bus)) {
            throw MalformedCaseError(where.str() + "bus is not listed");
        }
        if (ld.p_mw < 0.0) {
            throw MalformedCaseError(where.str() + "demand must be >= 0");
        }
    }

    for (std::size_t i = 0; i < load_curve.points.size(); ++i) {
        if (!(load_curve.points[i].second > 0.0)) {
            throw MalformedCaseError("load_curve[" + std::to_string(i) +
                                     "]: multiplier must be > 0");
        }
        if (i > 0 && load_curve.points[i].first < load_curve.points[i - 1].first) {
            throw MalformedCaseError("load_curve[" + std::to_string(i) +
                                     "]: minutes must be nondecreasing");
        }
    }
}

}  // namespace casrisk
