#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace casrisk {

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

enum class LpSense { LessEqual, GreaterEqual, Equal };

struct LpRow {
    std::vector<std::pair<int, double>> coeffs;  // (variable index, coefficient)
    LpSense sense = LpSense::LessEqual;
    double rhs = 0.0;
};

/// min c'x  s.t. rows,  lower <= x <= upper.
struct LpProblem {
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<LpRow> rows;

    int add_variable(double c, double lo, double hi) {
        cost.push_back(c);
        lower.push_back(lo);
        upper.push_back(hi);
        return static_cast<int>(cost.size()) - 1;
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> x;
};

/// Dense two-phase simplex with variable bounds. Dantzig pricing with a Bland
/// fallback once the iteration count passes 2(m+n), so it cannot cycle.
LpSolution solve_lp(const LpProblem& prob);

}  // namespace casrisk
