#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace casrisk {

/// Raised when a case file or in-memory case violates a structural invariant.
class MalformedCaseError : public std::runtime_error {
public:
    explicit MalformedCaseError(const std::string& what) : std::runtime_error(what) {}
};

struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double reactance_pu = 0.0;     // x > 0
    double rating_mw = 0.0;        // F_max > 0
    double lambda0_per_hr = 0.0;   // base outage rate

    double susceptance() const { return 1.0 / reactance_pu; }
};

struct Generator {
    int bus = 0;
    double p_mw = 0.0;
    double pmin_mw = 0.0;
    double pmax_mw = 0.0;
    double ramp_mw_per_min = 0.0;
};

struct Load {
    int bus = 0;
    double p_mw = 0.0;
};

/// Piecewise-linear demand multiplier vs. simulation clock (minutes).
/// Empty curve means constant 1.0; beyond the last point the last value holds.
struct LoadCurve {
    std::vector<std::pair<double, double>> points;  // (minute, multiplier)

    double multiplier_at(double minute) const;
};

struct NetworkCase {
    double base_mva = 100.0;
    std::vector<int> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;
    LoadCurve load_curve;

    // Derived indexing, filled by finalize().
    std::map<int, int> bus_index;     // bus id -> dense index
    std::map<int, int> branch_index;  // branch id -> position in branches

    int num_buses() const { return static_cast<int>(buses.size()); }
    int num_branches() const { return static_cast<int>(branches.size()); }

    int bus_of(int bus_id) const;
    int branch_pos(int branch_id) const;

    double total_demand_mw() const;

    /// Builds the index maps and checks every NetworkCase invariant.
    /// Throws MalformedCaseError with a field-bearing message on violation.
    void finalize();
};

}  // namespace casrisk
