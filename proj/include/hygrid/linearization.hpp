#pragma once

#include <vector>

#include "hygrid/powerflow.hpp"
#include "hygrid/sequence.hpp"

namespace hygrid {

/// State-dependent coefficients that linearize the power-flow equations.
/// Phase domain: F(i,n) = diag(E_i) * conj(Y_{i,n}) stored as the full matrix
/// diag(E)*conj(Y); H(i) = conj(I_i) with I = Y*E. DC analogues with real values.
/// Sequence domain (per converter AC terminal): see SequenceFh.
struct FhIdentities {
    Eigen::MatrixXcd f_ac;  // (3n x 3n), block (i,n) = diag(E_i) conj(Y_{i,n})
    Eigen::VectorXcd h_ac;  // (3n), conj of the nodal current injections
    Eigen::MatrixXd f_dc;   // (m x m), F_{j,m} = E_j Y_{j,m}
    Eigen::VectorXd h_dc;   // (m), H_j = sum_m Y_{j,m} E_m

    // Indexed by converter: rows (zero,+,-), columns = all 3n phase coordinates.
    std::vector<Eigen::MatrixXcd> f_seq;  // (3 x 3n) per converter
    std::vector<Mat3c> h_seq;             // (3 x 3) per converter
};

FhIdentities compute_fh(const GridModel& g, const OperatingPoint& op);

enum class LinearizationKind {
    PfJacobian,  // exact Jacobian of residuals() (PV rows differentiate |E|^2)
    ScMatrix,    // sensitivity matrix A (PV magnitude rows in the |E|*d|E| form)
};

/// Shared row builder for the power-flow Jacobian and the sensitivity matrix A.
/// The two differ only in the PV magnitude rows, which are scaled by 2 in the Jacobian.
Eigen::MatrixXd build_linear_system(const GridModel& g, const OperatingPoint& op,
                                    const FhIdentities& fh, LinearizationKind kind);

}  // namespace hygrid
