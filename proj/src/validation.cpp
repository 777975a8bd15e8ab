#include "hygrid/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hygrid/errors.hpp"

namespace hygrid {

namespace {

OperatingPoint solve_shifted(const GridModel& g, const OperatingPoint& base,
                             const ControlVariable& x, double shift, const SolverOptions& options,
                             const PerturbationSpec& spec) {
    const GridModel shifted = with_control_setpoint(g, x, control_setpoint(g, x) + shift);
    try {
        // Warm start from the base operating point: the perturbed steady state is close.
        return solve_pf(shifted, options, pack_state(g, base));
    } catch (const NonConvergence& e) {
        throw NonConvergence(e.iterations, e.final_norm,
                             "perturbation of " + control_label(g, x) + " by " +
                                 std::to_string(spec.delta) + " p.u. did not converge");
    }
}

}  // namespace

NumericSc numeric_sc(const GridModel& g, const OperatingPoint& base, const PerturbationSpec& spec,
                     const SolverOptions& options) {
    if (spec.delta == 0.0) throw ContractError("perturbation delta must be nonzero");
    check_control(g, spec.x);

    NumericSc out;
    out.x = spec.x;
    out.de_ac.assign(g.n_ac(), Vec3c::Zero());
    out.de_dc = Eigen::VectorXd::Zero(g.n_dc());

    if (spec.central) {
        const OperatingPoint hi = solve_shifted(g, base, spec.x, +spec.delta / 2, options, spec);
        const OperatingPoint lo = solve_shifted(g, base, spec.x, -spec.delta / 2, options, spec);
        for (int i = 0; i < g.n_ac(); ++i)
            out.de_ac[i] = (hi.e_ac[i] - lo.e_ac[i]) / spec.delta;
        out.de_dc = (hi.e_dc - lo.e_dc) / spec.delta;
    } else {
        const OperatingPoint hi = solve_shifted(g, base, spec.x, +spec.delta, options, spec);
        for (int i = 0; i < g.n_ac(); ++i)
            out.de_ac[i] = (hi.e_ac[i] - base.e_ac[i]) / spec.delta;
        out.de_dc = (hi.e_dc - base.e_dc) / spec.delta;
    }
    return out;
}

ErrorReport compare(const std::vector<SensitivityResult>& analytic, const GridModel& g,
                    const OperatingPoint& op, const std::vector<PerturbationSpec>& specs,
                    const SolverOptions& options) {
    ErrorReport report;
    for (const PerturbationSpec& spec : specs) {
        const auto it = std::find_if(analytic.begin(), analytic.end(),
                                     [&](const SensitivityResult& r) { return r.x == spec.x; });
        if (it == analytic.end())
            throw ContractError("no analytic result for control " + control_label(g, spec.x));
        const SensitivityResult& a = *it;
        if (static_cast<int>(a.de_ac.size()) != g.n_ac() || a.de_dc.size() != g.n_dc())
            throw ContractError("analytic result dimensions do not match the grid");

        const NumericSc num = numeric_sc(g, op, spec, options);
        for (int i = 0; i < g.n_ac(); ++i) {
            for (int ph = 0; ph < kPhases; ++ph) {
                report.rows.push_back({spec.x, g.ac_nodes[i].name, ph, "re",
                                       a.de_ac[i](ph).real(), num.de_ac[i](ph).real(),
                                       a.de_ac[i](ph).real() - num.de_ac[i](ph).real()});
                report.rows.push_back({spec.x, g.ac_nodes[i].name, ph, "im",
                                       a.de_ac[i](ph).imag(), num.de_ac[i](ph).imag(),
                                       a.de_ac[i](ph).imag() - num.de_ac[i](ph).imag()});
            }
        }
        for (int j = 0; j < g.n_dc(); ++j) {
            report.rows.push_back({spec.x, g.dc_nodes[j].name, -1, "dc", a.de_dc(j),
                                   num.de_dc(j), a.de_dc(j) - num.de_dc(j)});
        }
    }
    report.summaries = summarize(g, report.rows);
    return report;
}

std::vector<ErrorSummary> summarize(const GridModel& g, const std::vector<ErrorRow>& rows) {
    // Keyed by control in first-appearance order; aggregates are row-order independent.
    std::vector<ErrorSummary> out;
    std::map<std::string, size_t> position;
    for (const ErrorRow& row : rows) {
        const std::string label = control_label(g, row.x);
        auto [it, inserted] = position.try_emplace(label, out.size());
        if (inserted) {
            ErrorSummary s;
            s.x = row.x;
            s.label = label;
            out.push_back(s);
        }
        ErrorSummary& s = out[it->second];
        s.mean_signed += row.error;
        s.mean_abs += std::abs(row.error);
        if (std::abs(row.error) > std::abs(s.max_signed)) s.max_signed = row.error;
        s.max_abs = std::max(s.max_abs, std::abs(row.error));
        s.rows += 1;
    }
    for (ErrorSummary& s : out) {
        if (s.rows > 0) {
            s.mean_signed /= s.rows;
            s.mean_abs /= s.rows;
        }
    }
    return out;
}

}  // namespace hygrid
