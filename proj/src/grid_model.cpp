#include "casrisk/grid_model.hpp"

#include <cmath>
#include <numeric>

namespace casrisk {

Eigen::MatrixXd build_admittance(const NetworkCase& net, const BranchMask& in_service) {
    const int n = net.num_buses();
    if (static_cast<int>(in_service.size()) != net.num_branches()) {
        throw ContractViolation("in_service mask size does not match branch count");
    }
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < net.num_branches(); ++k) {
        if (!in_service[k]) continue;
        const Branch& br = net.branches[k];
        const int u = net.bus_of(br.from_bus);
        const int v = net.bus_of(br.to_bus);
        const double y = br.susceptance();
        Y(u, u) += y;
        Y(v, v) += y;
        Y(u, v) -= y;
        Y(v, u) -= y;
    }
    return Y;
}

IslandPartition find_islands(const NetworkCase& net, const BranchMask& in_service) {
    const int n = net.num_buses();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    };
    for (int k = 0; k < net.num_branches(); ++k) {
        if (!in_service[k]) continue;
        const int u = find(net.bus_of(net.branches[k].from_bus));
        const int v = find(net.bus_of(net.branches[k].to_bus));
        if (u != v) parent[u] = v;
    }
    IslandPartition part;
    part.island_of_bus.assign(n, -1);
    for (int b = 0; b < n; ++b) {
        const int root = find(b);
        if (part.island_of_bus[root] < 0) part.island_of_bus[root] = part.count++;
        part.island_of_bus[b] = part.island_of_bus[root];
    }
    return part;
}

namespace {

// Connected blocks of the Laplacian itself (nonzero off-diagonal couplings).
std::vector<std::vector<int>> laplacian_blocks(const Eigen::MatrixXd& Y) {
    const int n = static_cast<int>(Y.rows());
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> blocks;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        std::vector<int> stack{s};
        comp[s] = static_cast<int>(blocks.size());
        std::vector<int> members;
        while (!stack.empty()) {
            const int b = stack.back();
            stack.pop_back();
            members.push_back(b);
            for (int c = 0; c < n; ++c) {
                if (comp[c] < 0 && Y(b, c) != 0.0) {
                    comp[c] = comp[s];
                    stack.push_back(c);
                }
            }
        }
        blocks.push_back(std::move(members));
    }
    return blocks;
}

}  // namespace

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& Y) {
    const int n = static_cast<int>(Y.rows());
    if (Y.cols() != n) throw ContractViolation("pseudo_inverse: matrix must be square");
    const double scale = std::max(1.0, Y.cwiseAbs().maxCoeff());
    if ((Y - Y.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw ContractViolation("pseudo_inverse: matrix must be symmetric");
    }
    Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(n, n);
    for (const auto& block : laplacian_blocks(Y)) {
        const int m = static_cast<int>(block.size());
        if (m == 1) continue;  // isolated bus: zero row/column
        Eigen::MatrixXd Yb(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) Yb(i, j) = Y(block[i], block[j]);
        // Connected Laplacian block: shift out the all-ones null space.
        const Eigen::MatrixXd J = Eigen::MatrixXd::Constant(m, m, 1.0 / m);
        Eigen::MatrixXd Zb = (Yb + J).ldlt().solve(Eigen::MatrixXd::Identity(m, m));
        Zb -= J;
        Zb = 0.5 * (Zb + Zb.transpose());
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) Z(block[i], block[j]) = Zb(i, j);
    }
    return Z;
}

GridMatrices make_grid_matrices(const NetworkCase& net, const BranchMask& in_service) {
    GridMatrices gm;
    gm.in_service = in_service;
    gm.Y = build_admittance(net, in_service);
    gm.Z = pseudo_inverse(gm.Y);
    return gm;
}

Eigen::MatrixXd update_admittance_removal(const NetworkCase& net, const Eigen::MatrixXd& Y,
                                          const BranchMask& in_service,
                                          const std::vector<int>& removed_positions) {
    Eigen::MatrixXd Yp = Y;
    for (int pos : removed_positions) {
        if (pos < 0 || pos >= net.num_branches() || !in_service[pos]) {
            throw ContractViolation("update_admittance_removal: branch not in service");
        }
        const Branch& br = net.branches[pos];
        const int u = net.bus_of(br.from_bus);
        const int v = net.bus_of(br.to_bus);
        const double y = br.susceptance();
        Yp(u, u) -= y;
        Yp(v, v) -= y;
        Yp(u, v) += y;
        Yp(v, u) += y;
    }
    return Yp;
}

std::optional<Eigen::MatrixXd> update_pseudo_inverse(const NetworkCase& net,
                                                     const Eigen::MatrixXd& Z,
                                                     const BranchMask& in_service,
                                                     const std::vector<int>& removed_positions,
                                                     double singular_tol) {
    const int n = net.num_buses();
    if (Z.rows() != n || Z.cols() != n) {
        throw ContractViolation("update_pseudo_inverse: Z dimension mismatch");
    }
    const int k = static_cast<int>(removed_positions.size());
    if (k == 0) return Z;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, k);
    Eigen::VectorXd inv_y(k);
    for (int c = 0; c < k; ++c) {
        const int pos = removed_positions[c];
        if (pos < 0 || pos >= net.num_branches() || !in_service[pos]) {
            throw ContractViolation("update_pseudo_inverse: branch not in service");
        }
        const Branch& br = net.branches[pos];
        M(net.bus_of(br.from_bus), c) = 1.0;
        M(net.bus_of(br.to_bus), c) = -1.0;
        inv_y(c) = br.reactance_pu;  // 1 / susceptance
    }

    const Eigen::MatrixXd ZM = Z * M;
    Eigen::MatrixXd small = Eigen::MatrixXd(inv_y.asDiagonal()) - M.transpose() * ZM;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(small);
    const double scale = std::max(small.cwiseAbs().maxCoeff(), inv_y.cwiseAbs().maxCoeff());
    if (scale <= 0.0 || lu.rank() < k ||
        std::abs(lu.matrixLU().diagonal().cwiseAbs().minCoeff()) < singular_tol * scale) {
        return std::nullopt;  // cut set: caller rebuilds
    }
    Eigen::MatrixXd Zp = Z + ZM * lu.solve(ZM.transpose());
    return 0.5 * (Zp + Zp.transpose());
}

void remove_branches(const NetworkCase& net, GridMatrices& gm,
                     const std::vector<int>& removed_positions) {
    if (removed_positions.empty()) return;
    auto updated = update_pseudo_inverse(net, gm.Z, gm.in_service, removed_positions);
    gm.Y = update_admittance_removal(net, gm.Y, gm.in_service, removed_positions);
    for (int pos : removed_positions) gm.in_service[pos] = 0;
    if (updated) {
        gm.Z = std::move(*updated);
    } else {
        gm.Z = pseudo_inverse(gm.Y);
    }
}

bool is_cut_branch(const NetworkCase& net, const GridMatrices& gm, int branch_pos, double eps) {
    const Branch& br = net.branches[branch_pos];
    const int u = net.bus_of(br.from_bus);
    const int v = net.bus_of(br.to_bus);
    const double reach = gm.Z(u, u) + gm.Z(v, v) - 2.0 * gm.Z(u, v);
    return std::abs(br.reactance_pu - reach) < eps;
}

double ptdf(const NetworkCase& net, const GridMatrices& gm, int outaged_pos, int monitored_pos,
            double cut_eps) {
    if (!gm.in_service[outaged_pos] || !gm.in_service[monitored_pos]) {
        throw ContractViolation("ptdf: branch not in service");
    }
    if (outaged_pos == monitored_pos) {
        throw ContractViolation("ptdf: outaged and monitored branches coincide");
    }
    if (is_cut_branch(net, gm, outaged_pos, cut_eps)) {
        throw UndefinedPtdfError("ptdf: requested for a cut branch");
    }
    const Branch& ob = net.branches[outaged_pos];
    const Branch& mb = net.branches[monitored_pos];
    const int u = net.bus_of(ob.from_bus);
    const int v = net.bus_of(ob.to_bus);
    const int p = net.bus_of(mb.from_bus);
    const int q = net.bus_of(mb.to_bus);
    // Per-branch susceptances carry the off-diagonal sign convention, so that
    // parallel branches between the same bus pair stay distinct elements.
    const double Yuv = -ob.susceptance();
    const double Ypq = -mb.susceptance();
    const double numer = gm.Z(u, p) + gm.Z(v, q) - gm.Z(u, q) - gm.Z(v, p);
    const double denom = 1.0 + Yuv * (gm.Z(u, u) + gm.Z(v, v) - 2.0 * gm.Z(u, v));
    return -(numer / denom) * Ypq;
}

FlowSolution dc_power_flow(const NetworkCase& net, const GridMatrices& gm,
                           const Eigen::VectorXd& injection_mw, double balance_tol_mw) {
    const int n = net.num_buses();
    if (injection_mw.size() != n) {
        throw ContractViolation("dc_power_flow: injection vector size mismatch");
    }
    const IslandPartition part = find_islands(net, gm.in_service);
    std::vector<double> island_sum(part.count, 0.0);
    for (int b = 0; b < n; ++b) island_sum[part.island_of_bus[b]] += injection_mw(b);
    for (int i = 0; i < part.count; ++i) {
        if (std::abs(island_sum[i]) > balance_tol_mw) {
            throw ContractViolation("dc_power_flow: island " + std::to_string(i) +
                                    " injections unbalanced by " +
                                    std::to_string(island_sum[i]) + " MW");
        }
    }
    FlowSolution sol;
    sol.angle_rad = gm.Z * (injection_mw / net.base_mva);
    sol.branch_flow_mw.assign(net.num_branches(), 0.0);
    for (int k = 0; k < net.num_branches(); ++k) {
        if (!gm.in_service[k]) continue;
        const Branch& br = net.branches[k];
        const int u = net.bus_of(br.from_bus);
        const int v = net.bus_of(br.to_bus);
        sol.branch_flow_mw[k] =
            net.base_mva * (sol.angle_rad(u) - sol.angle_rad(v)) / br.reactance_pu;
    }
    return sol;
}

}  // namespace casrisk
