#include "support/balanced_reference.hpp"

#include "hygrid/errors.hpp"
#include "hygrid/sequence.hpp"

namespace hygrid::testing {

BalancedSc balanced_reference_sc(const GridModel& g, const OperatingPoint& op,
                                 const ControlVariable& x) {
    const int n = g.n_ac();
    const int m = g.n_dc();
    const int slack = g.slack_index;

    // Positive-sequence admittance of every 3x3 block.
    const Mat3c& t = fortescue::matrix();
    const Mat3c& tinv = fortescue::inverse();
    Eigen::MatrixXcd y_pos(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            y_pos(i, k) = (t * g.y_ac_block(i, k) * tinv)(1, 1);

    // Single-phase state = phase-a voltages (exact for balanced operation).
    Eigen::VectorXcd e(n);
    for (int i = 0; i < n; ++i) e(i) = op.e_ac[i](0);
    const Eigen::VectorXcd current = y_pos * e;

    std::vector<int> pos(n, -1);
    int free_count = 0;
    for (int i = 0; i < n; ++i)
        if (i != slack) pos[i] = free_count++;
    const int dim = 2 * free_count + m;
    auto col_re = [&](int i) { return pos[i]; };
    auto col_im = [&](int i) { return free_count + pos[i]; };
    auto col_dc = [&](int j) { return 2 * free_count + j; };
    auto row0 = [&](int i) { return 2 * pos[i]; };
    auto row1 = [&](int i) { return 2 * pos[i] + 1; };
    auto row_dc = [&](int j) { return 2 * free_count + j; };

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    auto add_power_rows = [&](int rp, int rq, int i, double scale) {
        for (int k = 0; k < n; ++k) {
            if (pos[k] < 0) continue;
            const Complex f = e(i) * std::conj(y_pos(i, k));
            if (rp >= 0) {
                a(rp, col_re(k)) += scale * f.real();
                a(rp, col_im(k)) += scale * f.imag();
            }
            if (rq >= 0) {
                a(rq, col_re(k)) += scale * f.imag();
                a(rq, col_im(k)) -= scale * f.real();
            }
        }
        if (pos[i] >= 0) {
            const Complex h = std::conj(current(i));
            if (rp >= 0) {
                a(rp, col_re(i)) += scale * h.real();
                a(rp, col_im(i)) -= scale * h.imag();
            }
            if (rq >= 0) {
                a(rq, col_re(i)) += scale * h.imag();
                a(rq, col_im(i)) += scale * h.real();
            }
        }
    };

    for (int i = 0; i < n; ++i) {
        if (i == slack) continue;
        switch (g.ac_nodes[i].role) {
            case AcRole::PQ:
                add_power_rows(row0(i), row1(i), i, 1.0);
                break;
            case AcRole::PV:
                add_power_rows(row0(i), -1, i, 1.0);
                a(row1(i), col_re(i)) = e(i).real();
                a(row1(i), col_im(i)) = e(i).imag();
                break;
            case AcRole::Ic: {
                const Converter& ic = g.converters[g.converter_of_ac[i]];
                add_power_rows(row0(i), row1(i), i, 3.0);
                if (ic.mode == IcMode::VdcQ) {
                    const int k = ic.dc_node;
                    for (int mm = 0; mm < m; ++mm)
                        a(row0(i), col_dc(mm)) +=
                            op.e_dc(k) * g.y_dc(k, mm) +
                            (mm == k ? g.y_dc.row(k).dot(op.e_dc) : 0.0);
                }
                break;
            }
            case AcRole::Slack:
                break;
        }
    }
    for (int j = 0; j < m; ++j) {
        const DcRole role = g.dc_nodes[j].role;
        const bool power_row =
            role == DcRole::P ||
            (role == DcRole::Ic && g.converters[g.converter_of_dc[j]].mode == IcMode::PQ);
        if (power_row) {
            for (int mm = 0; mm < m; ++mm)
                a(row_dc(j), col_dc(mm)) +=
                    op.e_dc(j) * g.y_dc(j, mm) + (mm == j ? g.y_dc.row(j).dot(op.e_dc) : 0.0);
        } else {
            a(row_dc(j), col_dc(j)) = 1.0;
        }
    }

    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    switch (x.kind) {
        case ControlKind::AcP: b(row0(x.index)) = 1.0; break;
        case ControlKind::AcQ: b(row1(x.index)) = 1.0; break;
        case ControlKind::AcVmag: b(row1(x.index)) = g.setpoints.ac_vmag[x.index](0); break;
        case ControlKind::DcP:
        case ControlKind::DcV: b(row_dc(x.index)) = 1.0; break;
        case ControlKind::IcP:
            b(row0(g.converters[x.index].ac_node)) = 1.0;
            b(row_dc(g.converters[x.index].dc_node)) = -1.0;
            break;
        case ControlKind::IcQ: b(row1(g.converters[x.index].ac_node)) = 1.0; break;
        case ControlKind::IcVdc: b(row_dc(g.converters[x.index].dc_node)) = 1.0; break;
    }

    const Eigen::VectorXd u = Eigen::PartialPivLU<Eigen::MatrixXd>(a).solve(b);
    BalancedSc out;
    out.de_ac.assign(n, Complex(0, 0));
    for (int i = 0; i < n; ++i)
        if (pos[i] >= 0) out.de_ac[i] = Complex(u(col_re(i)), u(col_im(i)));
    out.de_dc = u.tail(m);
    return out;
}

}  // namespace hygrid::testing
