#pragma once

#include <string>
#include <vector>

#include "hygrid/types.hpp"

namespace hygrid {

enum class AcRole { Slack, PQ, PV, Ic };
enum class DcRole { P, V, Ic };
enum class IcMode { PQ, VdcQ };

struct Bases {
    double power_w = 100e3;
    double ac_voltage_v = 400.0;  // line-to-line RMS
    double dc_voltage_v = 800.0;

    double ac_voltage_ln() const { return ac_voltage_v / std::sqrt(3.0); }
    // Per-phase per-unit with power base = power_w, so that 1 p.u. of per-phase power
    // corresponds to the full base power (see docs/grid_format.md).
    double z_base_ac() const { return ac_voltage_ln() * ac_voltage_ln() / power_w; }
    double z_base_dc() const { return dc_voltage_v * dc_voltage_v / power_w; }
};

struct AcNode {
    std::string name;
    AcRole role = AcRole::PQ;
};

struct DcNode {
    std::string name;
    DcRole role = DcRole::P;
};

/// Three-phase pi-model branch. All matrices per-unit.
struct AcBranch {
    int from = -1;
    int to = -1;
    Mat3c series = Mat3c::Zero();
    Mat3c shunt_from = Mat3c::Zero();
    Mat3c shunt_to = Mat3c::Zero();
};

struct DcBranch {
    int from = -1;
    int to = -1;
    double conductance = 0.0;  // 1/R, per-unit
};

/// AC/DC interfacing converter coupling one AC node and one DC node.
struct Converter {
    int ac_node = -1;
    int dc_node = -1;
    IcMode mode = IcMode::PQ;
    bool negative_sequence_injection = false;
};

/// Controllable values, all per-unit. Entries are only meaningful for the matching role:
/// ac_p/ac_q for PQ nodes (and ac_p for PV), ac_vmag for PV nodes, dc_p for DC P nodes,
/// dc_v for DC V nodes, ic_* per converter.
struct Setpoints {
    std::vector<Vec3d> ac_p;
    std::vector<Vec3d> ac_q;
    std::vector<Vec3d> ac_vmag;
    std::vector<double> dc_p;
    std::vector<double> dc_v;
    std::vector<double> ic_p;      // PQ mode: AC-side active power injection
    std::vector<double> ic_q;      // both modes: AC-side positive-sequence reactive power
    std::vector<double> ic_vdc;    // VdcQ mode: regulated DC voltage
    std::vector<double> ic_p_neg;  // negative-sequence active power (only if enabled)
    std::vector<double> ic_q_neg;
};

/// Immutable network description. Treat as read-only after finalize_grid();
/// safe to share across threads.
struct GridModel {
    Bases bases;
    std::vector<AcNode> ac_nodes;
    std::vector<DcNode> dc_nodes;
    std::vector<AcBranch> ac_branches;
    std::vector<DcBranch> dc_branches;
    std::vector<Converter> converters;
    Setpoints setpoints;
    Vec3c slack_voltage;  // fixed phasors of the slack node, all three phases

    // Derived by finalize_grid():
    Eigen::MatrixXcd y_ac;  // compound admittance, (3n x 3n)
    Eigen::MatrixXd y_dc;   // (m x m)
    int slack_index = -1;
    std::vector<int> converter_of_ac;  // ac node -> converter index or -1
    std::vector<int> converter_of_dc;  // dc node -> converter index or -1

    int n_ac() const { return static_cast<int>(ac_nodes.size()); }
    int n_dc() const { return static_cast<int>(dc_nodes.size()); }
    int n_ic() const { return static_cast<int>(converters.size()); }

    const Mat3c y_ac_block(int i, int n) const { return y_ac.block<3, 3>(3 * i, 3 * n); }

    int ac_index(const std::string& name) const;  // -1 if absent
    int dc_index(const std::string& name) const;
};

/// Balanced positive-sequence unit set at the given angle offset for phase a.
Vec3c balanced_unit_voltage(double angle_a_rad = 0.0);

/// Standard nodal assembly of the compound three-phase admittance matrix.
/// Duplicate branches between the same pair accumulate. Throws StructuralError on
/// out-of-range node ids.
Eigen::MatrixXcd build_ac_admittance(const std::vector<AcBranch>& branches, int n_nodes);

/// Same for the DC network (no shunts modeled; rows sum to zero).
Eigen::MatrixXd build_dc_admittance(const std::vector<DcBranch>& branches, int m_nodes);

/// Fills the derived members (admittance matrices, slack index, converter maps).
/// Throws StructuralError for inconsistent sizes or ids; role-level rule violations are
/// reported by validate_grid instead.
GridModel finalize_grid(GridModel g);

enum class ViolationKind {
    NoAcSlack,
    MultipleAcSlack,
    UnregulatedDcIsland,
    ConverterCoupling,
    AsymmetricSeriesAdmittance,
    NonPositiveConductance,
    AcNotConnected,
    DcNotConnected,
    RoleMismatch,
};

struct Violation {
    ViolationKind kind;
    std::string detail;
};

struct GridValidationReport {
    std::vector<Violation> violations;
    std::vector<bool> ac_branch_circulant;  // per AC branch: series matrix circulant-symmetric
    bool all_circulant = true;

    bool ok() const { return violations.empty(); }
};

/// Checks every structural rule without aborting mid-scan; returns the full list of
/// violations plus the circulant-symmetry status of each branch.
GridValidationReport validate_grid(const GridModel& g);

/// True if m is circulant with equal off-diagonals (required for sequence decoupling).
bool is_circulant_symmetric(const Mat3c& m, double tol = 1e-12);

}  // namespace hygrid
