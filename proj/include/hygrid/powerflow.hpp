#pragma once

#include <optional>
#include <vector>

#include "hygrid/grid_model.hpp"
#include "hygrid/system_index.hpp"
#include "hygrid/types.hpp"

namespace hygrid {

/// Converged power-flow state. Immutable once returned.
struct OperatingPoint {
    std::vector<Vec3c> e_ac;   // per AC node, all phases (slack included)
    Eigen::VectorXd e_dc;      // per DC node
    std::vector<Vec3c> s_ac;   // realized per-phase complex power injections
    Eigen::VectorXd p_dc;      // realized DC power injections
    int iterations = 0;
    double residual_norm = 0.0;
};

struct SolverOptions {
    double tolerance = 1e-8;   // on the residual inf-norm, per-unit
    int max_iterations = 50;
    bool line_search = false;  // optional step-halving damping
};

/// Flat start: balanced unit voltages on AC (slack phasing from the grid), 1.0 on DC.
/// Converters with negative-sequence injection enabled get a small negative-sequence
/// seed at their AC terminal so the P-/Q- rows are non-degenerate at the first iterate.
Eigen::VectorXd flat_start(const GridModel& g);

Eigen::VectorXd pack_state(const GridModel& g, const OperatingPoint& op);
OperatingPoint unpack_state(const GridModel& g, const Eigen::VectorXd& state);

/// Residuals of every power-flow equation at the candidate state, ordered per
/// SystemIndex. Each entry is (computed - setpoint) for its equation.
Eigen::VectorXd residuals(const GridModel& g, const Eigen::VectorXd& state);

/// Analytic partial derivatives of every residual entry with respect to every real
/// unknown. Same row/column layout as the residual vector and state.
Eigen::MatrixXd jacobian(const GridModel& g, const Eigen::VectorXd& state);

/// Full-Jacobian Newton iteration from the given start (default: flat start).
/// Throws NonConvergence or SingularJacobian.
OperatingPoint solve_pf(const GridModel& g, const SolverOptions& options = {},
                        const std::optional<Eigen::VectorXd>& init = std::nullopt);

/// Realized positive-sequence power injection at an AC node, 3*E+*conj(I+) (p.u.).
Complex positive_sequence_power(const GridModel& g, const std::vector<Vec3c>& e_ac, int node);

}  // namespace hygrid
