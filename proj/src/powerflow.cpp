#include "hygrid/powerflow.hpp"

#include <cmath>

#include "hygrid/errors.hpp"
#include "hygrid/linearization.hpp"
#include "hygrid/sequence.hpp"

namespace hygrid {

SystemIndex SystemIndex::of(const GridModel& g) {
    SystemIndex idx;
    idx.n_ac = g.n_ac();
    idx.n_dc = g.n_dc();
    idx.slack = g.slack_index;
    idx.ac_position.assign(idx.n_ac, -1);
    int pos = 0;
    for (int i = 0; i < idx.n_ac; ++i) {
        if (i == idx.slack) continue;
        idx.ac_position[i] = pos++;
    }
    idx.n_free = pos;
    return idx;
}

Eigen::VectorXd flat_start(const GridModel& g) {
    const SystemIndex idx = SystemIndex::of(g);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(idx.size());
    const Vec3c flat = balanced_unit_voltage();
    for (int i = 0; i < g.n_ac(); ++i) {
        if (idx.is_slack(i)) continue;
        Vec3c e = flat;
        const int c = g.converter_of_ac[i];
        if (c >= 0 && g.converters[c].negative_sequence_injection) {
            // Seed a small negative-sequence component; the P-/Q- rows have zero
            // derivatives at an exactly balanced voltage.
            e += 0.02 * from_sequence(SequenceTriple{0.0, 0.0, Complex(1.0, 0.0)});
        }
        for (int ph = 0; ph < kPhases; ++ph) {
            state(idx.col_re(i, ph)) = e(ph).real();
            state(idx.col_im(i, ph)) = e(ph).imag();
        }
    }
    for (int j = 0; j < g.n_dc(); ++j) state(idx.col_dc(j)) = 1.0;
    return state;
}

Eigen::VectorXd pack_state(const GridModel& g, const OperatingPoint& op) {
    const SystemIndex idx = SystemIndex::of(g);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(idx.size());
    for (int i = 0; i < g.n_ac(); ++i) {
        if (idx.is_slack(i)) continue;
        for (int ph = 0; ph < kPhases; ++ph) {
            state(idx.col_re(i, ph)) = op.e_ac[i](ph).real();
            state(idx.col_im(i, ph)) = op.e_ac[i](ph).imag();
        }
    }
    for (int j = 0; j < g.n_dc(); ++j) state(idx.col_dc(j)) = op.e_dc(j);
    return state;
}

namespace {

struct Evaluation {
    std::vector<Vec3c> e_ac;
    Eigen::VectorXd e_dc;
    Eigen::VectorXcd i_ac;  // nodal current injections, stacked (3n)
    Eigen::VectorXd i_dc;
};

Evaluation evaluate(const GridModel& g, const Eigen::VectorXd& state, const SystemIndex& idx) {
    if (state.size() != idx.size())
        throw StateError("state vector sized " + std::to_string(state.size()) + ", expected " +
                         std::to_string(idx.size()));
    Evaluation ev;
    ev.e_ac.resize(g.n_ac());
    Eigen::VectorXcd stacked(3 * g.n_ac());
    for (int i = 0; i < g.n_ac(); ++i) {
        if (idx.is_slack(i)) {
            ev.e_ac[i] = g.slack_voltage;
        } else {
            for (int ph = 0; ph < kPhases; ++ph)
                ev.e_ac[i](ph) = Complex(state(idx.col_re(i, ph)), state(idx.col_im(i, ph)));
        }
        stacked.segment<3>(3 * i) = ev.e_ac[i];
    }
    ev.e_dc = state.tail(g.n_dc());
    ev.i_ac = g.n_ac() > 0 ? Eigen::VectorXcd(g.y_ac * stacked) : Eigen::VectorXcd();
    ev.i_dc = g.n_dc() > 0 ? Eigen::VectorXd(g.y_dc * ev.e_dc) : Eigen::VectorXd();
    return ev;
}

Complex sequence_power(const Mat3c& t, const Vec3c& e, const Vec3c& i, int seq_row) {
    const Vec3c e_seq = t * e;
    const Vec3c i_seq = t * i;
    return 3.0 * e_seq(seq_row) * std::conj(i_seq(seq_row));
}

}  // namespace

OperatingPoint unpack_state(const GridModel& g, const Eigen::VectorXd& state) {
    const SystemIndex idx = SystemIndex::of(g);
    const Evaluation ev = evaluate(g, state, idx);
    OperatingPoint op;
    op.e_ac = ev.e_ac;
    op.e_dc = ev.e_dc;
    op.s_ac.resize(g.n_ac());
    for (int i = 0; i < g.n_ac(); ++i)
        for (int ph = 0; ph < kPhases; ++ph)
            op.s_ac[i](ph) = ev.e_ac[i](ph) * std::conj(ev.i_ac(3 * i + ph));
    op.p_dc = ev.e_dc.cwiseProduct(ev.i_dc);
    return op;
}

Complex positive_sequence_power(const GridModel& g, const std::vector<Vec3c>& e_ac, int node) {
    Vec3c current = Vec3c::Zero();
    for (int n = 0; n < g.n_ac(); ++n) current += g.y_ac_block(node, n) * e_ac[n];
    return sequence_power(fortescue::matrix(), e_ac[node], current, fortescue::kPositive);
}

Eigen::VectorXd residuals(const GridModel& g, const Eigen::VectorXd& state) {
    const SystemIndex idx = SystemIndex::of(g);
    const Evaluation ev = evaluate(g, state, idx);
    const Mat3c& t = fortescue::matrix();
    Eigen::VectorXd r = Eigen::VectorXd::Zero(idx.size());

    for (int i = 0; i < g.n_ac(); ++i) {
        if (idx.is_slack(i)) continue;
        const Vec3c& e = ev.e_ac[i];
        const Vec3c current = ev.i_ac.segment<3>(3 * i);
        switch (g.ac_nodes[i].role) {
            case AcRole::PQ:
                for (int ph = 0; ph < kPhases; ++ph) {
                    const Complex s = e(ph) * std::conj(current(ph));
                    r(idx.row_ac(i, ph)) = s.real() - g.setpoints.ac_p[i](ph);
                    r(idx.row_ac(i, 3 + ph)) = s.imag() - g.setpoints.ac_q[i](ph);
                }
                break;
            case AcRole::PV:
                for (int ph = 0; ph < kPhases; ++ph) {
                    const Complex s = e(ph) * std::conj(current(ph));
                    r(idx.row_ac(i, ph)) = s.real() - g.setpoints.ac_p[i](ph);
                    const double mag = g.setpoints.ac_vmag[i](ph);
                    r(idx.row_ac(i, 3 + ph)) = std::norm(e(ph)) - mag * mag;
                }
                break;
            case AcRole::Ic: {
                const int c = g.converter_of_ac[i];
                const Converter& ic = g.converters[c];
                const Vec3c e_seq = t * e;
                const Complex s_pos = sequence_power(t, e, current, fortescue::kPositive);
                if (ic.mode == IcMode::VdcQ) {
                    // Lossless converter: DC-side injection plus AC-side
                    // positive-sequence injection sums to zero.
                    const double p_dc = ev.e_dc(ic.dc_node) * ev.i_dc(ic.dc_node);
                    r(idx.row_ac(i, 0)) = p_dc + s_pos.real();
                } else {
                    r(idx.row_ac(i, 0)) = s_pos.real() - g.setpoints.ic_p[c];
                }
                r(idx.row_ac(i, 1)) = s_pos.imag() - g.setpoints.ic_q[c];
                r(idx.row_ac(i, 2)) = e_seq(fortescue::kZero).real();
                r(idx.row_ac(i, 3)) = e_seq(fortescue::kZero).imag();
                if (ic.negative_sequence_injection) {
                    const Complex s_neg = sequence_power(t, e, current, fortescue::kNegative);
                    r(idx.row_ac(i, 4)) = s_neg.real() - g.setpoints.ic_p_neg[c];
                    r(idx.row_ac(i, 5)) = s_neg.imag() - g.setpoints.ic_q_neg[c];
                } else {
                    r(idx.row_ac(i, 4)) = e_seq(fortescue::kNegative).real();
                    r(idx.row_ac(i, 5)) = e_seq(fortescue::kNegative).imag();
                }
                break;
            }
            case AcRole::Slack:
                break;
        }
    }

    for (int j = 0; j < g.n_dc(); ++j) {
        const double p = ev.e_dc(j) * ev.i_dc(j);
        switch (g.dc_nodes[j].role) {
            case DcRole::P:
                r(idx.row_dc(j)) = p - g.setpoints.dc_p[j];
                break;
            case DcRole::V:
                r(idx.row_dc(j)) = ev.e_dc(j) - g.setpoints.dc_v[j];
                break;
            case DcRole::Ic: {
                const int c = g.converter_of_dc[j];
                if (g.converters[c].mode == IcMode::VdcQ) {
                    r(idx.row_dc(j)) = ev.e_dc(j) - g.setpoints.ic_vdc[c];
                } else {
                    // P_k = -P*_l for a lossless converter under uniform
                    // injection-positive orientation.
                    r(idx.row_dc(j)) = p + g.setpoints.ic_p[c];
                }
                break;
            }
        }
    }
    return r;
}

Eigen::MatrixXd jacobian(const GridModel& g, const Eigen::VectorXd& state) {
    const OperatingPoint op = unpack_state(g, state);
    const FhIdentities fh = compute_fh(g, op);
    return build_linear_system(g, op, fh, LinearizationKind::PfJacobian);
}

OperatingPoint solve_pf(const GridModel& g, const SolverOptions& options,
                        const std::optional<Eigen::VectorXd>& init) {
    {
        const GridValidationReport report = validate_grid(g);
        if (!report.ok())
            throw StructuralError("grid fails validation: " + report.violations.front().detail);
    }

    // Negative-sequence power rows are degenerate at balanced voltages, so grids with
    // that mode enabled are solved by continuation: converge the constrained variant
    // first, then release the constraints from its solution.
    bool wants_continuation = false;
    if (!init.has_value())
        for (const Converter& ic : g.converters)
            if (ic.negative_sequence_injection) wants_continuation = true;
    if (wants_continuation) {
        GridModel constrained = g;
        for (Converter& ic : constrained.converters) ic.negative_sequence_injection = false;
        try {
            const OperatingPoint stage = solve_pf(constrained, options);
            // Ramp the negative-sequence power targets up from zero. The power
            // surface is bilinear in (E-, I-); a cold Newton start toward a distant
            // target tends to overshoot across its fold.
            GridModel ramp = g;
            Eigen::VectorXd state = pack_state(constrained, stage);
            OperatingPoint op = stage;
            for (const double t : {0.0, 0.5, 1.0}) {
                for (int c = 0; c < g.n_ic(); ++c) {
                    ramp.setpoints.ic_p_neg[c] = t * g.setpoints.ic_p_neg[c];
                    ramp.setpoints.ic_q_neg[c] = t * g.setpoints.ic_q_neg[c];
                }
                op = solve_pf(ramp, options, state);
                state = pack_state(ramp, op);
            }
            return op;
        } catch (const Error&) {
            // fall back to the seeded flat start below
        }
    }

    Eigen::VectorXd state = init.value_or(flat_start(g));
    const SystemIndex idx = SystemIndex::of(g);
    if (state.size() != idx.size())
        throw StateError("initial state has wrong dimension");

    Eigen::VectorXd r = residuals(g, state);
    double norm = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
    int iter = 0;
    for (; iter < options.max_iterations && norm > options.tolerance; ++iter) {
        const Eigen::MatrixXd jac = jacobian(g, state);
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        const double rcond = lu.rcond();
        if (!std::isfinite(rcond) || rcond < 1e-14) throw SingularJacobian(iter, rcond);
        const Eigen::VectorXd step = lu.solve(-r);

        double scale = 1.0;
        if (options.line_search) {
            for (int halvings = 0; halvings < 8; ++halvings) {
                const Eigen::VectorXd trial = residuals(g, state + scale * step);
                if (trial.cwiseAbs().maxCoeff() < norm) break;
                scale *= 0.5;
            }
        }
        state += scale * step;
        r = residuals(g, state);
        norm = r.cwiseAbs().maxCoeff();
    }
    if (norm > options.tolerance) throw NonConvergence(iter, norm);

    OperatingPoint op = unpack_state(g, state);
    op.iterations = iter;
    op.residual_norm = norm;
    return op;
}

}  // namespace hygrid
