#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "casrisk/network_case.hpp"

namespace casrisk {

/// In-service flags aligned with NetworkCase::branches positions.
using BranchMask = std::vector<char>;

class ContractViolation : public std::runtime_error {
public:
    explicit ContractViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Susceptance Laplacian over the in-service branches and its Penrose-Moore
/// pseudo-inverse. The pseudo-inverse formulation is used throughout instead
/// of a grounded reduced matrix so islands are handled uniformly.
struct GridMatrices {
    Eigen::MatrixXd Y;
    Eigen::MatrixXd Z;
    BranchMask in_service;
};

struct FlowSolution {
    std::vector<double> branch_flow_mw;  // signed from->to; 0 for out-of-service
    Eigen::VectorXd angle_rad;
};

Eigen::MatrixXd build_admittance(const NetworkCase& net, const BranchMask& in_service);

/// Pseudo-inverse of a symmetric Laplacian, computed per connected component:
/// for a connected block with n buses, Z = (Y + 11^T/n)^{-1} - 11^T/n.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& Y);

GridMatrices make_grid_matrices(const NetworkCase& net, const BranchMask& in_service);

/// Rank-|removed| downdate of the Laplacian: Y' = Y - M Diag(y) M^T.
Eigen::MatrixXd update_admittance_removal(const NetworkCase& net, const Eigen::MatrixXd& Y,
                                          const BranchMask& in_service,
                                          const std::vector<int>& removed_positions);

/// Low-rank pseudo-inverse update. Returns nullopt when the small inner matrix
/// is numerically singular (the removed set is a cut set); the caller must
/// then rebuild with pseudo_inverse on the reduced Laplacian.
std::optional<Eigen::MatrixXd> update_pseudo_inverse(const NetworkCase& net,
                                                     const Eigen::MatrixXd& Z,
                                                     const BranchMask& in_service,
                                                     const std::vector<int>& removed_positions,
                                                     double singular_tol = 1e-10);

/// Applies the removal to `gm` in place, preferring the low-rank update and
/// falling back to a per-island rebuild when the removed set cuts the grid.
void remove_branches(const NetworkCase& net, GridMatrices& gm,
                     const std::vector<int>& removed_positions);

/// Algebraic bridge test: |x_uv - (Z_uu + Z_vv - 2 Z_uv)| < eps, with x_uv the
/// removed branch's own reactance (reciprocal of its susceptance).
bool is_cut_branch(const NetworkCase& net, const GridMatrices& gm, int branch_pos,
                   double eps = 1e-10);

class UndefinedPtdfError : public std::runtime_error {
public:
    explicit UndefinedPtdfError(const std::string& what) : std::runtime_error(what) {}
};

/// Flow-transfer factor of outaged branch {u,v} onto monitored branch {p,q}.
/// Throws UndefinedPtdfError when {u,v} is a cut branch.
double ptdf(const NetworkCase& net, const GridMatrices& gm, int outaged_pos, int monitored_pos,
            double cut_eps = 1e-10);

/// DC flow: theta = Z * P, F_uv = (theta_u - theta_v) / x. Injections must be
/// balanced per island within `balance_tol_mw`.
FlowSolution dc_power_flow(const NetworkCase& net, const GridMatrices& gm,
                           const Eigen::VectorXd& injection_mw, double balance_tol_mw = 1e-6);

/// Connected components of the in-service graph; returns per-bus island id
/// (0-based, dense) and the island count.
struct IslandPartition {
    std::vector<int> island_of_bus;  // by dense bus index
    int count = 0;
};

IslandPartition find_islands(const NetworkCase& net, const BranchMask& in_service);

}  // namespace casrisk
