#include "hygrid/linearization.hpp"

#include "hygrid/errors.hpp"

namespace hygrid {

FhIdentities compute_fh(const GridModel& g, const OperatingPoint& op) {
    const int n = g.n_ac();
    const int m = g.n_dc();
    if (static_cast<int>(op.e_ac.size()) != n || op.e_dc.size() != m)
        throw StateError("operating point does not match the grid dimensions");

    FhIdentities fh;
    if (n > 0) {
        Eigen::VectorXcd e(3 * n);
        for (int i = 0; i < n; ++i) e.segment<3>(3 * i) = op.e_ac[i];
        const Eigen::VectorXcd current = g.y_ac * e;
        fh.f_ac = e.asDiagonal() * g.y_ac.conjugate();
        fh.h_ac = current.conjugate();

        const Mat3c& t = fortescue::matrix();
        fh.f_seq.resize(g.n_ic());
        fh.h_seq.resize(g.n_ic());
        for (int c = 0; c < g.n_ic(); ++c) {
            const int l = g.converters[c].ac_node;
            const Vec3c e_seq = t * op.e_ac[l];
            const Vec3c i_seq = t * current.segment<3>(3 * l);
            fh.f_seq[c] =
                e_seq.asDiagonal() * t.conjugate() * g.y_ac.middleRows(3 * l, 3).conjugate();
            fh.h_seq[c] = i_seq.conjugate().asDiagonal() * t;
        }
    }
    if (m > 0) {
        fh.f_dc = op.e_dc.asDiagonal() * g.y_dc;
        fh.h_dc = g.y_dc * op.e_dc;
    }
    return fh;
}

namespace {

// d(Re s)/dE' = Re F, d(Re s)/dE'' = Im F for the conjugated-derivative terms;
// the own-node H term contributes (Re H, -Im H) to the real part and
// (Im H, Re H) to the imaginary part.
struct PowerRowWriter {
    Eigen::MatrixXd& a;
    const SystemIndex& idx;

    void add_f(int row_re, int row_im, int n, int ph, Complex f, double scale = 1.0) {
        if (idx.ac_position[n] < 0) return;  // slack column excluded
        if (row_re >= 0) {
            a(row_re, idx.col_re(n, ph)) += scale * f.real();
            a(row_re, idx.col_im(n, ph)) += scale * f.imag();
        }
        if (row_im >= 0) {
            a(row_im, idx.col_re(n, ph)) += scale * f.imag();
            a(row_im, idx.col_im(n, ph)) -= scale * f.real();
        }
    }

    void add_h(int row_re, int row_im, int i, int ph, Complex h, double scale = 1.0) {
        if (idx.ac_position[i] < 0) return;
        if (row_re >= 0) {
            a(row_re, idx.col_re(i, ph)) += scale * h.real();
            a(row_re, idx.col_im(i, ph)) -= scale * h.imag();
        }
        if (row_im >= 0) {
            a(row_im, idx.col_re(i, ph)) += scale * h.imag();
            a(row_im, idx.col_im(i, ph)) += scale * h.real();
        }
    }
};

}  // namespace

Eigen::MatrixXd build_linear_system(const GridModel& g, const OperatingPoint& op,
                                    const FhIdentities& fh, LinearizationKind kind) {
    const SystemIndex idx = SystemIndex::of(g);
    const int n = g.n_ac();
    const int m = g.n_dc();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(idx.size(), idx.size());
    PowerRowWriter w{a, idx};
    const Mat3c& t = fortescue::matrix();
    // Sequence powers carry 3*E_seq*conj(I_seq); see docs/sequence_identities.md.
    constexpr double kSeqScale = 3.0;

    for (int i = 0; i < n; ++i) {
        if (idx.is_slack(i)) continue;
        switch (g.ac_nodes[i].role) {
            case AcRole::PQ:
            case AcRole::PV: {
                const bool pv = g.ac_nodes[i].role == AcRole::PV;
                for (int ph = 0; ph < kPhases; ++ph) {
                    const int row_p = idx.row_ac(i, ph);
                    const int row_q = pv ? -1 : idx.row_ac(i, 3 + ph);
                    for (int nn = 0; nn < n; ++nn)
                        for (int ps = 0; ps < kPhases; ++ps)
                            w.add_f(row_p, row_q, nn, ps, fh.f_ac(3 * i + ph, 3 * nn + ps));
                    w.add_h(row_p, row_q, i, ph, fh.h_ac(3 * i + ph));
                    if (pv) {
                        const int row_m = idx.row_ac(i, 3 + ph);
                        const double factor = kind == LinearizationKind::PfJacobian ? 2.0 : 1.0;
                        a(row_m, idx.col_re(i, ph)) = factor * op.e_ac[i](ph).real();
                        a(row_m, idx.col_im(i, ph)) = factor * op.e_ac[i](ph).imag();
                    }
                }
                break;
            }
            case AcRole::Ic: {
                const int c = g.converter_of_ac[i];
                const Converter& ic = g.converters[c];
                const int row_p = idx.row_ac(i, 0);
                const int row_q = idx.row_ac(i, 1);
                for (int nn = 0; nn < n; ++nn)
                    for (int ps = 0; ps < kPhases; ++ps)
                        w.add_f(row_p, row_q, nn, ps,
                                fh.f_seq[c](fortescue::kPositive, 3 * nn + ps), kSeqScale);
                for (int ps = 0; ps < kPhases; ++ps)
                    w.add_h(row_p, row_q, i, ps, fh.h_seq[c](fortescue::kPositive, ps), kSeqScale);
                if (ic.mode == IcMode::VdcQ) {
                    const int k = ic.dc_node;
                    for (int mm = 0; mm < m; ++mm)
                        a(row_p, idx.col_dc(mm)) += fh.f_dc(k, mm) + (mm == k ? fh.h_dc(k) : 0.0);
                }

                // Zero-sequence constraint rows; negative-sequence constraints or
                // negative-sequence power rows depending on the converter option.
                for (int ps = 0; ps < kPhases; ++ps) {
                    const Complex t0 = t(fortescue::kZero, ps);
                    a(idx.row_ac(i, 2), idx.col_re(i, ps)) = t0.real();
                    a(idx.row_ac(i, 2), idx.col_im(i, ps)) = -t0.imag();
                    a(idx.row_ac(i, 3), idx.col_re(i, ps)) = t0.imag();
                    a(idx.row_ac(i, 3), idx.col_im(i, ps)) = t0.real();
                }
                if (ic.negative_sequence_injection) {
                    const int row_pn = idx.row_ac(i, 4);
                    const int row_qn = idx.row_ac(i, 5);
                    for (int nn = 0; nn < n; ++nn)
                        for (int ps = 0; ps < kPhases; ++ps)
                            w.add_f(row_pn, row_qn, nn, ps,
                                    fh.f_seq[c](fortescue::kNegative, 3 * nn + ps), kSeqScale);
                    for (int ps = 0; ps < kPhases; ++ps)
                        w.add_h(row_pn, row_qn, i, ps, fh.h_seq[c](fortescue::kNegative, ps),
                                kSeqScale);
                } else {
                    for (int ps = 0; ps < kPhases; ++ps) {
                        const Complex tn = t(fortescue::kNegative, ps);
                        a(idx.row_ac(i, 4), idx.col_re(i, ps)) = tn.real();
                        a(idx.row_ac(i, 4), idx.col_im(i, ps)) = -tn.imag();
                        a(idx.row_ac(i, 5), idx.col_re(i, ps)) = tn.imag();
                        a(idx.row_ac(i, 5), idx.col_im(i, ps)) = tn.real();
                    }
                }
                break;
            }
            case AcRole::Slack:
                break;
        }
    }

    for (int j = 0; j < m; ++j) {
        const int row = idx.row_dc(j);
        const DcRole role = g.dc_nodes[j].role;
        const bool power_row =
            role == DcRole::P ||
            (role == DcRole::Ic && g.converters[g.converter_of_dc[j]].mode == IcMode::PQ);
        if (power_row) {
            for (int mm = 0; mm < m; ++mm)
                a(row, idx.col_dc(mm)) += fh.f_dc(j, mm) + (mm == j ? fh.h_dc(j) : 0.0);
        } else {
            a(row, idx.col_dc(j)) = 1.0;
        }
    }
    return a;
}

}  // namespace hygrid
