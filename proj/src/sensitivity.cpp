#include "hygrid/sensitivity.hpp"

#include <cmath>
#include <future>

#include "hygrid/errors.hpp"
#include "hygrid/sequence.hpp"

namespace hygrid {

namespace {

const char* kind_prefix(ControlKind k) {
    switch (k) {
        case ControlKind::AcP: return "P";
        case ControlKind::AcQ: return "Q";
        case ControlKind::AcVmag: return "Vm";
        case ControlKind::DcP: return "Pdc";
        case ControlKind::DcV: return "Edc";
        case ControlKind::IcP: return "Pic";
        case ControlKind::IcQ: return "Qic";
        case ControlKind::IcVdc: return "Vdc";
    }
    return "?";
}

bool is_ac_kind(ControlKind k) {
    return k == ControlKind::AcP || k == ControlKind::AcQ || k == ControlKind::AcVmag;
}

}  // namespace

std::string control_label(const GridModel& g, const ControlVariable& x) {
    std::string label = kind_prefix(x.kind);
    switch (x.kind) {
        case ControlKind::AcP:
        case ControlKind::AcQ:
        case ControlKind::AcVmag:
            label += ":" + g.ac_nodes[x.index].name + ":" + kPhaseNames[x.phase];
            break;
        case ControlKind::DcP:
        case ControlKind::DcV:
            label += ":" + g.dc_nodes[x.index].name;
            break;
        case ControlKind::IcP:
        case ControlKind::IcQ:
            label += ":" + g.ac_nodes[g.converters[x.index].ac_node].name;
            break;
        case ControlKind::IcVdc:
            label += ":" + g.dc_nodes[g.converters[x.index].dc_node].name;
            break;
    }
    return label;
}

std::vector<ControlVariable> enumerate_controls(const GridModel& g) {
    std::vector<ControlVariable> xs;
    for (int i = 0; i < g.n_ac(); ++i) {
        if (g.ac_nodes[i].role == AcRole::PQ) {
            for (int ph = 0; ph < kPhases; ++ph) xs.push_back({ControlKind::AcP, i, ph});
            for (int ph = 0; ph < kPhases; ++ph) xs.push_back({ControlKind::AcQ, i, ph});
        } else if (g.ac_nodes[i].role == AcRole::PV) {
            for (int ph = 0; ph < kPhases; ++ph) xs.push_back({ControlKind::AcP, i, ph});
            for (int ph = 0; ph < kPhases; ++ph) xs.push_back({ControlKind::AcVmag, i, ph});
        }
    }
    for (int j = 0; j < g.n_dc(); ++j) {
        if (g.dc_nodes[j].role == DcRole::P) xs.push_back({ControlKind::DcP, j, -1});
        if (g.dc_nodes[j].role == DcRole::V) xs.push_back({ControlKind::DcV, j, -1});
    }
    for (int c = 0; c < g.n_ic(); ++c) {
        if (g.converters[c].mode == IcMode::PQ) xs.push_back({ControlKind::IcP, c, -1});
        xs.push_back({ControlKind::IcQ, c, -1});
        if (g.converters[c].mode == IcMode::VdcQ) xs.push_back({ControlKind::IcVdc, c, -1});
    }
    return xs;
}

void check_control(const GridModel& g, const ControlVariable& x) {
    auto fail = [&](const std::string& why) {
        throw ContractError("control variable inconsistent with node role: " + why);
    };
    if (is_ac_kind(x.kind)) {
        if (x.index < 0 || x.index >= g.n_ac()) fail("AC node index out of range");
        if (x.phase < 0 || x.phase >= kPhases) fail("phase out of range");
        const AcRole role = g.ac_nodes[x.index].role;
        if (x.kind == ControlKind::AcP && role != AcRole::PQ && role != AcRole::PV)
            fail("P setpoints exist on PQ/PV nodes only");
        if (x.kind == ControlKind::AcQ && role != AcRole::PQ)
            fail("Q setpoints exist on PQ nodes only");
        if (x.kind == ControlKind::AcVmag && role != AcRole::PV)
            fail("|E| setpoints exist on PV nodes only");
        return;
    }
    if (x.kind == ControlKind::DcP || x.kind == ControlKind::DcV) {
        if (x.index < 0 || x.index >= g.n_dc()) fail("DC node index out of range");
        const DcRole role = g.dc_nodes[x.index].role;
        if (x.kind == ControlKind::DcP && role != DcRole::P) fail("node is not a DC P node");
        if (x.kind == ControlKind::DcV && role != DcRole::V) fail("node is not a DC V node");
        return;
    }
    if (x.index < 0 || x.index >= g.n_ic()) fail("converter index out of range");
    const IcMode mode = g.converters[x.index].mode;
    if (x.kind == ControlKind::IcP && mode != IcMode::PQ)
        fail("P setpoint exists on P-Q converters only");
    if (x.kind == ControlKind::IcVdc && mode != IcMode::VdcQ)
        fail("Vdc setpoint exists on Vdc-Q converters only");
}

double control_setpoint(const GridModel& g, const ControlVariable& x) {
    check_control(g, x);
    switch (x.kind) {
        case ControlKind::AcP: return g.setpoints.ac_p[x.index](x.phase);
        case ControlKind::AcQ: return g.setpoints.ac_q[x.index](x.phase);
        case ControlKind::AcVmag: return g.setpoints.ac_vmag[x.index](x.phase);
        case ControlKind::DcP: return g.setpoints.dc_p[x.index];
        case ControlKind::DcV: return g.setpoints.dc_v[x.index];
        case ControlKind::IcP: return g.setpoints.ic_p[x.index];
        case ControlKind::IcQ: return g.setpoints.ic_q[x.index];
        case ControlKind::IcVdc: return g.setpoints.ic_vdc[x.index];
    }
    throw ContractError("unreachable control kind");
}

GridModel with_control_setpoint(GridModel g, const ControlVariable& x, double value) {
    check_control(g, x);
    switch (x.kind) {
        case ControlKind::AcP: g.setpoints.ac_p[x.index](x.phase) = value; break;
        case ControlKind::AcQ: g.setpoints.ac_q[x.index](x.phase) = value; break;
        case ControlKind::AcVmag: g.setpoints.ac_vmag[x.index](x.phase) = value; break;
        case ControlKind::DcP: g.setpoints.dc_p[x.index] = value; break;
        case ControlKind::DcV: g.setpoints.dc_v[x.index] = value; break;
        case ControlKind::IcP: g.setpoints.ic_p[x.index] = value; break;
        case ControlKind::IcQ: g.setpoints.ic_q[x.index] = value; break;
        case ControlKind::IcVdc: g.setpoints.ic_vdc[x.index] = value; break;
    }
    return g;
}

ScSystem::ScSystem(const GridModel& g, const OperatingPoint& op)
    : grid_(&g), op_(op), index_(SystemIndex::of(g)) {
    const FhIdentities fh = compute_fh(g, op);
    a_ = build_linear_system(g, op, fh, LinearizationKind::ScMatrix);
    lu_.compute(a_);
    rcond_ = lu_.rcond();
    if (!std::isfinite(rcond_) || rcond_ < 1e-12) throw SingularSystem(rcond_);
}

ScSystem assemble_system(const GridModel& g, const OperatingPoint& op) {
    return ScSystem(g, op);
}

Eigen::VectorXd assemble_b(const ScSystem& sys, const ControlVariable& x) {
    const GridModel& g = sys.grid();
    check_control(g, x);
    const SystemIndex& idx = sys.index();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(idx.size());
    switch (x.kind) {
        case ControlKind::AcP:
            b(idx.row_ac(x.index, x.phase)) = 1.0;
            break;
        case ControlKind::AcQ:
            b(idx.row_ac(x.index, 3 + x.phase)) = 1.0;
            break;
        case ControlKind::AcVmag:
            // d(|E|^2)/dx = 2 |E*| d|E*|/dx; the A row carries (E', E''), so the
            // right side is |E*| exactly as in the magnitude-row convention.
            b(idx.row_ac(x.index, 3 + x.phase)) = g.setpoints.ac_vmag[x.index](x.phase);
            break;
        case ControlKind::DcP:
        case ControlKind::DcV:
            b(idx.row_dc(x.index)) = 1.0;
            break;
        case ControlKind::IcP: {
            const Converter& ic = g.converters[x.index];
            b(idx.row_ac(ic.ac_node, 0)) = 1.0;
            // The DC terminal's power row enforces P_k = -P*_l.
            b(idx.row_dc(ic.dc_node)) = -1.0;
            break;
        }
        case ControlKind::IcQ:
            b(idx.row_ac(g.converters[x.index].ac_node, 1)) = 1.0;
            break;
        case ControlKind::IcVdc:
            b(idx.row_dc(g.converters[x.index].dc_node)) = 1.0;
            break;
    }
    return b;
}

SensitivityResult solve_sc(const ScSystem& sys, const ControlVariable& x) {
    const GridModel& g = sys.grid();
    const SystemIndex& idx = sys.index();
    const Eigen::VectorXd u = sys.solve(assemble_b(sys, x));

    SensitivityResult r;
    r.x = x;
    r.de_ac.assign(g.n_ac(), Vec3c::Zero());
    for (int i = 0; i < g.n_ac(); ++i) {
        if (idx.is_slack(i)) continue;  // slack derivatives are identically zero
        for (int ph = 0; ph < kPhases; ++ph)
            r.de_ac[i](ph) = Complex(u(idx.col_re(i, ph)), u(idx.col_im(i, ph)));
    }
    r.de_dc = u.tail(g.n_dc());
    r.polar = to_polar(r, g, sys.operating_point());
    r.current = current_sensitivities(g, sys.operating_point(), r);
    return r;
}

PolarSc to_polar(const SensitivityResult& r, const GridModel& g, const OperatingPoint& op) {
    PolarSc p;
    p.dmag.assign(g.n_ac(), Vec3d::Zero());
    p.dang.assign(g.n_ac(), Vec3d::Zero());
    for (int i = 0; i < g.n_ac(); ++i) {
        for (int ph = 0; ph < kPhases; ++ph) {
            const Complex e = op.e_ac[i](ph);
            const double mag = std::abs(e);
            if (mag <= 0.0)
                throw ZeroVoltageMagnitude(g.ac_nodes[i].name + std::string(":") +
                                           kPhaseNames[ph]);
            const Complex product = std::conj(e) * r.de_ac[i](ph);
            p.dmag[i](ph) = product.real() / mag;
            p.dang[i](ph) = product.imag() / (mag * mag);
        }
    }
    p.ddc = r.de_dc;
    return p;
}

CurrentSc current_sensitivities(const GridModel& g, const OperatingPoint& op,
                                const SensitivityResult& r) {
    (void)op;
    if (static_cast<int>(r.de_ac.size()) != g.n_ac() || r.de_dc.size() != g.n_dc())
        throw StructuralError("sensitivity result does not match the grid dimensions");
    CurrentSc out;
    out.ac.reserve(g.ac_branches.size());
    for (const AcBranch& br : g.ac_branches) {
        out.ac.push_back(br.series * (r.de_ac[br.from] - r.de_ac[br.to]) +
                         br.shunt_from * r.de_ac[br.from]);
    }
    out.dc.resize(static_cast<Eigen::Index>(g.dc_branches.size()));
    for (size_t b = 0; b < g.dc_branches.size(); ++b) {
        const DcBranch& br = g.dc_branches[b];
        out.dc(static_cast<Eigen::Index>(b)) =
            br.conductance * (r.de_dc(br.from) - r.de_dc(br.to));
    }
    return out;
}

std::vector<SensitivityResult> all_sensitivities(const GridModel& g, const OperatingPoint& op,
                                                 bool parallel) {
    const ScSystem sys(g, op);  // factorized once, shared by every solve
    const std::vector<ControlVariable> xs = enumerate_controls(g);
    std::vector<SensitivityResult> results(xs.size());
    if (parallel) {
        std::vector<std::future<SensitivityResult>> futures;
        futures.reserve(xs.size());
        for (const ControlVariable& x : xs)
            futures.push_back(
                std::async(std::launch::async, [&sys, x] { return solve_sc(sys, x); }));
        for (size_t k = 0; k < futures.size(); ++k) results[k] = futures[k].get();
    } else {
        for (size_t k = 0; k < xs.size(); ++k) results[k] = solve_sc(sys, xs[k]);
    }
    return results;
}

}  // namespace hygrid
