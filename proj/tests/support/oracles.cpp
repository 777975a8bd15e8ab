#include "support/oracles.hpp"

#include <cmath>

namespace hygrid::testing {

Eigen::MatrixXd fd_jacobian(const GridModel& g, const Eigen::VectorXd& state, double h) {
    const int n = static_cast<int>(state.size());
    Eigen::MatrixXd j(n, n);
    for (int c = 0; c < n; ++c) {
        Eigen::VectorXd hi = state, lo = state;
        hi(c) += h;
        lo(c) -= h;
        j.col(c) = (residuals(g, hi) - residuals(g, lo)) / (2.0 * h);
    }
    return j;
}

Eigen::MatrixXcd brute_force_ac_admittance(const std::vector<AcBranch>& branches, int n_nodes) {
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(3 * n_nodes, 3 * n_nodes);
    for (int i = 0; i < n_nodes; ++i) {
        for (int n = 0; n < n_nodes; ++n) {
            for (const AcBranch& br : branches) {
                for (int r = 0; r < 3; ++r) {
                    for (int c = 0; c < 3; ++c) {
                        if (i == n) {
                            if (br.from == i) y(3 * i + r, 3 * n + c) += br.series(r, c) + br.shunt_from(r, c);
                            if (br.to == i) y(3 * i + r, 3 * n + c) += br.series(r, c) + br.shunt_to(r, c);
                        } else if ((br.from == i && br.to == n) || (br.to == i && br.from == n)) {
                            y(3 * i + r, 3 * n + c) -= br.series(r, c);
                        }
                    }
                }
            }
        }
    }
    return y;
}

double two_node_dc_bisection(double e1, double conductance, double p2) {
    auto mismatch = [&](double e2) { return e2 * (conductance * e2 - conductance * e1) - p2; };
    double lo = 0.5, hi = 1.5;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (mismatch(lo) * mismatch(mid) <= 0.0) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Vec3c> ac_branch_currents(const GridModel& g, const std::vector<Vec3c>& e_ac) {
    std::vector<Vec3c> flows;
    flows.reserve(g.ac_branches.size());
    for (const AcBranch& br : g.ac_branches)
        flows.push_back(br.series * (e_ac[br.from] - e_ac[br.to]) + br.shunt_from * e_ac[br.from]);
    return flows;
}

Eigen::VectorXd dc_branch_currents(const GridModel& g, const Eigen::VectorXd& e_dc) {
    Eigen::VectorXd flows(static_cast<Eigen::Index>(g.dc_branches.size()));
    for (size_t b = 0; b < g.dc_branches.size(); ++b) {
        const DcBranch& br = g.dc_branches[b];
        flows(static_cast<Eigen::Index>(b)) = br.conductance * (e_dc(br.from) - e_dc(br.to));
    }
    return flows;
}

}  // namespace hygrid::testing
