#pragma once

#include <string>
#include <vector>

#include "hygrid/sensitivity.hpp"

namespace hygrid {

/// One finite-difference experiment: shift the setpoint behind x by delta and
/// re-solve the power flow.
struct PerturbationSpec {
    ControlVariable x;
    double delta = 0.005;  // p.u.; defaults: 0.005 for powers, 0.005 for voltages
    bool central = false;  // forward difference by default, central behind a flag
};

/// Numeric derivative of every nodal voltage with respect to the perturbed setpoint.
struct NumericSc {
    ControlVariable x;
    std::vector<Vec3c> de_ac;
    Eigen::VectorXd de_dc;
};

/// Perturbation oracle: (E_perturbed - E_base)/delta with a warm start from the base
/// operating point (central mode: two solves at +/- delta/2). Throws NonConvergence
/// (message carries the control label and delta) if the perturbed case fails.
NumericSc numeric_sc(const GridModel& g, const OperatingPoint& base, const PerturbationSpec& spec,
                     const SolverOptions& options = {});

/// One compared entry: a voltage-derivative component for (x, node, phase, re/im).
struct ErrorRow {
    ControlVariable x;
    std::string node;
    int phase;              // 0..2 for AC, -1 for DC
    std::string component;  // "re", "im" (AC) or "dc"
    double analytic = 0.0;
    double numeric = 0.0;
    double error = 0.0;     // analytic - numeric, signed
};

/// Per-control aggregate in the shape of the published error table: signed mean and
/// the signed error of largest magnitude, plus absolute-value aggregates.
struct ErrorSummary {
    ControlVariable x;
    std::string label;
    double mean_signed = 0.0;
    double max_signed = 0.0;  // entry with the largest magnitude, sign preserved
    double mean_abs = 0.0;
    double max_abs = 0.0;
    int rows = 0;
};

struct ErrorReport {
    std::vector<ErrorRow> rows;
    std::vector<ErrorSummary> summaries;  // one per perturbation spec
};

/// Element-wise comparison of the analytic coefficients against the perturbation
/// oracle for the given specs. The analytic set must come from the same (grid, op);
/// a missing control is a ContractError.
ErrorReport compare(const std::vector<SensitivityResult>& analytic, const GridModel& g,
                    const OperatingPoint& op, const std::vector<PerturbationSpec>& specs,
                    const SolverOptions& options = {});

/// Recomputes the per-control summaries from rows (used by tests and the CLI).
std::vector<ErrorSummary> summarize(const GridModel& g, const std::vector<ErrorRow>& rows);

}  // namespace hygrid
