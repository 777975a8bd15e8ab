#pragma once

#include <string>
#include <vector>

#include "hygrid/linearization.hpp"
#include "hygrid/powerflow.hpp"

namespace hygrid {

enum class ControlKind { AcP, AcQ, AcVmag, DcP, DcV, IcP, IcQ, IcVdc };

/// One element of the control set X: a tagged reference to a controllable injection
/// or voltage. `index` is an AC node for Ac*, a DC node for Dc*, and a converter
/// index for Ic*. `phase` applies to the Ac* kinds only.
struct ControlVariable {
    ControlKind kind = ControlKind::AcP;
    int index = -1;
    int phase = -1;

    bool operator==(const ControlVariable&) const = default;
};

/// Stable human/machine-readable tag, e.g. "P:B09:a", "Q+:IC2", "Vdc:IC1", "Edc:B24".
std::string control_label(const GridModel& g, const ControlVariable& x);

/// The set X for this grid, in deterministic order.
std::vector<ControlVariable> enumerate_controls(const GridModel& g);

/// Throws ContractError if x is inconsistent with the node roles of g.
void check_control(const GridModel& g, const ControlVariable& x);

/// Current per-unit value of the setpoint behind x.
double control_setpoint(const GridModel& g, const ControlVariable& x);

/// Copy of g with the setpoint behind x replaced (admittances untouched).
GridModel with_control_setpoint(GridModel g, const ControlVariable& x, double value);

/// The factorized state-dependent system A. Depends only on (grid, operating point),
/// never on the control variable, so it is assembled and factorized once and reused
/// for every x. Immutable after assembly; concurrent solves are safe.
class ScSystem {
  public:
    ScSystem(const GridModel& g, const OperatingPoint& op);

    const Eigen::MatrixXd& matrix() const { return a_; }
    const SystemIndex& index() const { return index_; }
    const GridModel& grid() const { return *grid_; }
    const OperatingPoint& operating_point() const { return op_; }
    double rcond() const { return rcond_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return lu_.solve(b); }

  private:
    const GridModel* grid_;
    OperatingPoint op_;
    SystemIndex index_;
    Eigen::MatrixXd a_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    double rcond_ = 0.0;
};

/// Assembles and factorizes A at the operating point. Throws SingularSystem when the
/// reciprocal condition estimate falls below 1e-12 (degenerate operating point).
ScSystem assemble_system(const GridModel& g, const OperatingPoint& op);

/// Right-hand side b(x): zero except the rows whose equations carry x on the
/// setpoint side. See docs/sequence_identities.md for the row conventions.
Eigen::VectorXd assemble_b(const ScSystem& sys, const ControlVariable& x);

struct PolarSc {
    std::vector<Vec3d> dmag;   // per AC node, d|E|/dx per phase
    std::vector<Vec3d> dang;   // per AC node, d(angle)/dx per phase
    Eigen::VectorXd ddc;       // per DC node (real quantity passes through)
};

struct CurrentSc {
    std::vector<Vec3c> ac;     // per AC branch, from-side, per phase
    Eigen::VectorXd dc;        // per DC branch
};

/// The solved u(x) for one control variable plus the derived polar and
/// branch-current coefficients.
struct SensitivityResult {
    ControlVariable x;
    std::vector<Vec3c> de_ac;  // complex voltage derivative per AC node (slack = 0)
    Eigen::VectorXd de_dc;     // real voltage derivative per DC node
    PolarSc polar;
    CurrentSc current;
};

/// u(x) = A^{-1} b(x), with slack entries re-inserted as zeros and the polar and
/// branch-current coefficients attached.
SensitivityResult solve_sc(const ScSystem& sys, const ControlVariable& x);

/// Polar derivatives from rectangular ones: d|E|/dx = Re{conj(E) dE/dx}/|E| and
/// d(angle)/dx = Im{conj(E) dE/dx}/|E|^2. Throws ZeroVoltageMagnitude.
PolarSc to_polar(const SensitivityResult& r, const GridModel& g, const OperatingPoint& op);

/// Branch-current derivatives dI = Y_series (dE_from - dE_to) + Y_shunt_from dE_from
/// (AC, per phase) and dI = g (dE_from - dE_to) (DC).
CurrentSc current_sensitivities(const GridModel& g, const OperatingPoint& op,
                                const SensitivityResult& r);

/// Batch driver: one result per x in X, sharing a single factorization of A.
/// With `parallel`, solves run concurrently; results are identical to sequential.
std::vector<SensitivityResult> all_sensitivities(const GridModel& g, const OperatingPoint& op,
                                                 bool parallel = false);

}  // namespace hygrid
