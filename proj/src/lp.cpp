#include "casrisk/lp.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace casrisk {

namespace {

constexpr double kTol = 1e-9;

enum class VarStatus : char { Basic, AtLower, AtUpper };

struct Tableau {
    Eigen::MatrixXd T;             // m x n, basic columns are unit vectors
    Eigen::VectorXd xB;            // current basic values
    std::vector<int> basis;        // var index basic in each row
    std::vector<VarStatus> status; // per variable
    std::vector<double> lo, hi, xN;  // bounds and nonbasic values
    int m = 0, n = 0;

    double var_value(int j) const {
        for (int i = 0; i < m; ++i)
            if (basis[i] == j) return xB(i);
        return xN[j];
    }
};

// Runs simplex iterations for the given cost vector. Returns false on
// unboundedness (never expected for the problems built here).
bool run_simplex(Tableau& tb, const Eigen::VectorXd& cost) {
    const int m = tb.m;
    const int n = tb.n;
    const long bland_after = 2L * (m + n);
    for (long iter = 0;; ++iter) {
        // Reduced costs d = c - c_B' T.
        Eigen::VectorXd cB(m);
        for (int i = 0; i < m; ++i) cB(i) = cost(tb.basis[i]);
        Eigen::RowVectorXd d = cost.transpose() - cB.transpose() * tb.T;

        int entering = -1;
        double best = kTol;
        const bool bland = iter > bland_after;
        for (int j = 0; j < n; ++j) {
            if (tb.status[j] == VarStatus::Basic) continue;
            if (tb.hi[j] - tb.lo[j] <= 0.0) continue;  // fixed variable
            double viol = 0.0;
            if (tb.status[j] == VarStatus::AtLower && d(j) < -kTol) viol = -d(j);
            if (tb.status[j] == VarStatus::AtUpper && d(j) > kTol) viol = d(j);
            if (viol > 0.0) {
                if (bland) { entering = j; break; }
                if (viol > best) { best = viol; entering = j; }
            }
        }
        if (entering < 0) return true;  // optimal

        const double sigma = tb.status[entering] == VarStatus::AtLower ? 1.0 : -1.0;
        const Eigen::VectorXd w = tb.T.col(entering);

        // Ratio test: basic value i moves as xB_i - t*sigma*w_i.
        double t_max = tb.hi[entering] - tb.lo[entering];  // bound flip distance
        int leave_row = -1;
        double leave_bound = 0.0;
        for (int i = 0; i < m; ++i) {
            const double g = sigma * w(i);
            if (g > kTol) {
                const double lim = (tb.xB(i) - tb.lo[tb.basis[i]]) / g;
                if (lim < t_max) { t_max = lim; leave_row = i; leave_bound = tb.lo[tb.basis[i]]; }
            } else if (g < -kTol) {
                if (std::isinf(tb.hi[tb.basis[i]])) continue;
                const double lim = (tb.hi[tb.basis[i]] - tb.xB(i)) / (-g);
                if (lim < t_max) { t_max = lim; leave_row = i; leave_bound = tb.hi[tb.basis[i]]; }
            }
        }
        if (std::isinf(t_max)) return false;  // unbounded
        if (t_max < 0.0) t_max = 0.0;

        if (leave_row < 0) {
            // Bound flip: entering jumps to its opposite bound.
            tb.xB -= sigma * t_max * w;
            tb.xN[entering] = tb.status[entering] == VarStatus::AtLower ? tb.hi[entering]
                                                                        : tb.lo[entering];
            tb.status[entering] = tb.status[entering] == VarStatus::AtLower ? VarStatus::AtUpper
                                                                            : VarStatus::AtLower;
            continue;
        }

        // Pivot on (leave_row, entering).
        const int leaving = tb.basis[leave_row];
        const double enter_value = tb.xN[entering] + sigma * t_max;
        tb.xB -= sigma * t_max * w;
        tb.xB(leave_row) = enter_value;

        const double pivot = tb.T(leave_row, entering);
        tb.T.row(leave_row) /= pivot;
        for (int i = 0; i < m; ++i) {
            if (i == leave_row) continue;
            const double f = tb.T(i, entering);
            if (f != 0.0) tb.T.row(i) -= f * tb.T.row(leave_row);
        }

        tb.basis[leave_row] = entering;
        tb.status[entering] = VarStatus::Basic;
        tb.xN[leaving] = leave_bound;
        tb.status[leaving] =
            leave_bound == tb.lo[leaving] ? VarStatus::AtLower : VarStatus::AtUpper;
    }
}

}  // namespace

LpSolution solve_lp(const LpProblem& prob) {
    const int nstruct = static_cast<int>(prob.cost.size());
    const int m = static_cast<int>(prob.rows.size());

    // Normalize senses: GreaterEqual rows are negated into LessEqual.
    // Layout: [structural | slack per <= row | artificial per row].
    int nslack = 0;
    for (const auto& row : prob.rows)
        if (row.sense != LpSense::Equal) ++nslack;
    const int n = nstruct + nslack + m;

    Tableau tb;
    tb.m = m;
    tb.n = n;
    tb.T = Eigen::MatrixXd::Zero(m, n);
    tb.lo.assign(n, 0.0);
    tb.hi.assign(n, kLpInfinity);
    tb.xN.assign(n, 0.0);
    tb.status.assign(n, VarStatus::AtLower);
    tb.basis.assign(m, -1);

    for (int j = 0; j < nstruct; ++j) {
        tb.lo[j] = prob.lower[j];
        tb.hi[j] = prob.upper[j];
        if (std::isinf(tb.lo[j])) throw std::invalid_argument("solve_lp: free variables unsupported");
        if (tb.hi[j] < tb.lo[j]) throw std::invalid_argument("solve_lp: empty variable bound");
        tb.xN[j] = tb.lo[j];
        tb.status[j] = VarStatus::AtLower;
    }

    Eigen::VectorXd rhs(m);
    int slack_cursor = nstruct;
    for (int i = 0; i < m; ++i) {
        const LpRow& row = prob.rows[i];
        const double sgn = row.sense == LpSense::GreaterEqual ? -1.0 : 1.0;
        for (const auto& [j, a] : row.coeffs) {
            if (j < 0 || j >= nstruct) throw std::invalid_argument("solve_lp: bad column index");
            tb.T(i, j) += sgn * a;
        }
        rhs(i) = sgn * row.rhs;
        if (row.sense != LpSense::Equal) {
            tb.T(i, slack_cursor) = 1.0;
            ++slack_cursor;
        }
    }

    // Residual after placing nonbasic variables at their lower bounds.
    Eigen::VectorXd resid = rhs;
    for (int j = 0; j < nstruct; ++j) {
        if (tb.xN[j] != 0.0) resid -= tb.xN[j] * tb.T.col(j);
    }

    // Negate rows with negative residual so the artificial basis is the
    // identity, then start from it.
    for (int i = 0; i < m; ++i) {
        if (resid(i) < 0.0) {
            tb.T.row(i) *= -1.0;
            resid(i) = -resid(i);
        }
        const int aj = nstruct + nslack + i;
        tb.T(i, aj) = 1.0;
        tb.basis[i] = aj;
        tb.status[aj] = VarStatus::Basic;
    }
    tb.xB = resid;

    // Phase 1: minimize sum of artificials.
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) phase1(nstruct + nslack + i) = 1.0;
    if (!run_simplex(tb, phase1)) return {LpStatus::Unbounded, 0.0, {}};

    double art_sum = 0.0;
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] >= nstruct + nslack) art_sum += tb.xB(i);
    for (int j = nstruct + nslack; j < n; ++j)
        if (tb.status[j] != VarStatus::Basic && tb.xN[j] > 0.0) art_sum += tb.xN[j];
    if (art_sum > 1e-7) return {LpStatus::Infeasible, 0.0, {}};

    // Pin artificials at zero for phase 2.
    for (int j = nstruct + nslack; j < n; ++j) {
        tb.lo[j] = 0.0;
        tb.hi[j] = 0.0;
        if (tb.status[j] != VarStatus::Basic) tb.xN[j] = 0.0;
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < nstruct; ++j) phase2(j) = prob.cost[j];
    if (!run_simplex(tb, phase2)) return {LpStatus::Unbounded, 0.0, {}};

    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.assign(nstruct, 0.0);
    for (int j = 0; j < nstruct; ++j) sol.x[j] = tb.xN[j];
    for (int i = 0; i < m; ++i)
        if (tb.basis[i] < nstruct) sol.x[tb.basis[i]] = tb.xB(i);
    sol.objective = 0.0;
    for (int j = 0; j < nstruct; ++j) sol.objective += prob.cost[j] * sol.x[j];
    return sol;
}

}  // namespace casrisk
