#include "hygrid/grid_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "hygrid/errors.hpp"

namespace hygrid {

namespace {

void check_node_index(int id, int count, const char* what) {
    if (id < 0 || id >= count) {
        throw StructuralError(std::string(what) + " references node index " + std::to_string(id) +
                              " outside [0, " + std::to_string(count) + ")");
    }
}

// Connected component ids via union-find over branch endpoints.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

int GridModel::ac_index(const std::string& name) const {
    for (int i = 0; i < n_ac(); ++i)
        if (ac_nodes[i].name == name) return i;
    return -1;
}

int GridModel::dc_index(const std::string& name) const {
    for (int j = 0; j < n_dc(); ++j)
        if (dc_nodes[j].name == name) return j;
    return -1;
}

Vec3c balanced_unit_voltage(double angle_a_rad) {
    const double two_thirds_pi = 2.0 * std::numbers::pi / 3.0;
    return Vec3c(std::polar(1.0, angle_a_rad), std::polar(1.0, angle_a_rad - two_thirds_pi),
                 std::polar(1.0, angle_a_rad + two_thirds_pi));
}

namespace {

// Accumulation in a canonical order makes the assembled matrix bit-identical under
// any permutation of the branch list.
int compare_mat3(const Mat3c& a, const Mat3c& b) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
            if (a(r, c).real() != b(r, c).real())
                return a(r, c).real() < b(r, c).real() ? -1 : 1;
            if (a(r, c).imag() != b(r, c).imag())
                return a(r, c).imag() < b(r, c).imag() ? -1 : 1;
        }
    return 0;
}

}  // namespace

Eigen::MatrixXcd build_ac_admittance(const std::vector<AcBranch>& branches, int n_nodes) {
    std::vector<const AcBranch*> ordered;
    ordered.reserve(branches.size());
    for (const AcBranch& b : branches) {
        check_node_index(b.from, n_nodes, "AC branch");
        check_node_index(b.to, n_nodes, "AC branch");
        ordered.push_back(&b);
    }
    std::sort(ordered.begin(), ordered.end(), [](const AcBranch* a, const AcBranch* b) {
        if (a->from != b->from) return a->from < b->from;
        if (a->to != b->to) return a->to < b->to;
        if (int c = compare_mat3(a->series, b->series)) return c < 0;
        if (int c = compare_mat3(a->shunt_from, b->shunt_from)) return c < 0;
        return compare_mat3(a->shunt_to, b->shunt_to) < 0;
    });

    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(3 * n_nodes, 3 * n_nodes);
    for (const AcBranch* b : ordered) {
        y.block<3, 3>(3 * b->from, 3 * b->from) += b->series + b->shunt_from;
        y.block<3, 3>(3 * b->to, 3 * b->to) += b->series + b->shunt_to;
        y.block<3, 3>(3 * b->from, 3 * b->to) -= b->series;
        y.block<3, 3>(3 * b->to, 3 * b->from) -= b->series;
    }
    return y;
}

Eigen::MatrixXd build_dc_admittance(const std::vector<DcBranch>& branches, int m_nodes) {
    std::vector<DcBranch> ordered;
    ordered.reserve(branches.size());
    for (const DcBranch& b : branches) {
        check_node_index(b.from, m_nodes, "DC branch");
        check_node_index(b.to, m_nodes, "DC branch");
        ordered.push_back(b);
    }
    std::sort(ordered.begin(), ordered.end(), [](const DcBranch& a, const DcBranch& b) {
        if (a.from != b.from) return a.from < b.from;
        if (a.to != b.to) return a.to < b.to;
        return a.conductance < b.conductance;
    });

    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(m_nodes, m_nodes);
    for (const DcBranch& b : ordered) {
        y(b.from, b.from) += b.conductance;
        y(b.to, b.to) += b.conductance;
        y(b.from, b.to) -= b.conductance;
        y(b.to, b.from) -= b.conductance;
    }
    return y;
}

GridModel finalize_grid(GridModel g) {
    const int n = g.n_ac();
    const int m = g.n_dc();

    auto resize3 = [&](std::vector<Vec3d>& v, int count) {
        if (v.empty()) v.assign(count, Vec3d::Zero());
        if (static_cast<int>(v.size()) != count)
            throw StructuralError("setpoint vector sized " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(count));
    };
    auto resize1 = [&](std::vector<double>& v, int count) {
        if (v.empty()) v.assign(count, 0.0);
        if (static_cast<int>(v.size()) != count)
            throw StructuralError("setpoint vector sized " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(count));
    };
    resize3(g.setpoints.ac_p, n);
    resize3(g.setpoints.ac_q, n);
    resize3(g.setpoints.ac_vmag, n);
    resize1(g.setpoints.dc_p, m);
    resize1(g.setpoints.dc_v, m);
    resize1(g.setpoints.ic_p, g.n_ic());
    resize1(g.setpoints.ic_q, g.n_ic());
    resize1(g.setpoints.ic_vdc, g.n_ic());
    resize1(g.setpoints.ic_p_neg, g.n_ic());
    resize1(g.setpoints.ic_q_neg, g.n_ic());

    if (g.slack_voltage.isZero(0.0)) g.slack_voltage = balanced_unit_voltage();

    g.y_ac = build_ac_admittance(g.ac_branches, n);
    g.y_dc = build_dc_admittance(g.dc_branches, m);

    g.slack_index = -1;
    for (int i = 0; i < n; ++i) {
        if (g.ac_nodes[i].role == AcRole::Slack && g.slack_index < 0) g.slack_index = i;
    }

    g.converter_of_ac.assign(n, -1);
    g.converter_of_dc.assign(m, -1);
    for (int c = 0; c < g.n_ic(); ++c) {
        const Converter& ic = g.converters[c];
        check_node_index(ic.ac_node, n, "converter");
        check_node_index(ic.dc_node, m, "converter");
        g.converter_of_ac[ic.ac_node] = c;
        g.converter_of_dc[ic.dc_node] = c;
    }
    return g;
}

bool is_circulant_symmetric(const Mat3c& m, double tol) {
    // circ(s, t, t): equal diagonal, all off-diagonals equal.
    const Complex s = m(0, 0);
    const Complex t = m(0, 1);
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            const Complex want = (r == c) ? s : t;
            if (std::abs(m(r, c) - want) > tol) return false;
        }
    }
    return true;
}

GridValidationReport validate_grid(const GridModel& g) {
    GridValidationReport rep;
    auto add = [&](ViolationKind k, std::string detail) {
        rep.violations.push_back({k, std::move(detail)});
    };

    const int n = g.n_ac();
    const int m = g.n_dc();

    // Slack rules (only when an AC network exists).
    if (n > 0) {
        int slacks = 0;
        for (const AcNode& node : g.ac_nodes)
            if (node.role == AcRole::Slack) ++slacks;
        if (slacks == 0) add(ViolationKind::NoAcSlack, "AC network has no slack node");
        if (slacks > 1)
            add(ViolationKind::MultipleAcSlack,
                "AC network has " + std::to_string(slacks) + " slack nodes; exactly one allowed");
    }

    // DC regulation: at least one V node or VdcQ converter terminal.
    if (m > 0) {
        bool regulated = false;
        for (const DcNode& node : g.dc_nodes)
            if (node.role == DcRole::V) regulated = true;
        for (const Converter& ic : g.converters)
            if (ic.mode == IcMode::VdcQ) regulated = true;
        if (!regulated)
            add(ViolationKind::UnregulatedDcIsland,
                "DC network has no voltage-regulated node (V node or Vdc-Q converter)");
    }

    // Converter coupling: role tags on both ends, no node shared between converters.
    std::set<int> seen_ac, seen_dc;
    for (int c = 0; c < g.n_ic(); ++c) {
        const Converter& ic = g.converters[c];
        const std::string tag = "converter " + std::to_string(c);
        if (ic.ac_node < 0 || ic.ac_node >= n || ic.dc_node < 0 || ic.dc_node >= m) {
            add(ViolationKind::ConverterCoupling, tag + " references nodes out of range");
            continue;
        }
        if (g.ac_nodes[ic.ac_node].role != AcRole::Ic)
            add(ViolationKind::RoleMismatch, tag + " AC terminal " + g.ac_nodes[ic.ac_node].name +
                                                 " is not tagged with the converter role");
        if (g.dc_nodes[ic.dc_node].role != DcRole::Ic)
            add(ViolationKind::RoleMismatch, tag + " DC terminal " + g.dc_nodes[ic.dc_node].name +
                                                 " is not tagged with the converter role");
        if (!seen_ac.insert(ic.ac_node).second)
            add(ViolationKind::ConverterCoupling,
                "AC node " + g.ac_nodes[ic.ac_node].name + " belongs to more than one converter");
        if (!seen_dc.insert(ic.dc_node).second)
            add(ViolationKind::ConverterCoupling,
                "DC node " + g.dc_nodes[ic.dc_node].name + " belongs to more than one converter");
    }
    for (int i = 0; i < n; ++i) {
        if (g.ac_nodes[i].role == AcRole::Ic && !seen_ac.count(i))
            add(ViolationKind::ConverterCoupling,
                "AC node " + g.ac_nodes[i].name + " is tagged as converter terminal but unused");
    }
    for (int j = 0; j < m; ++j) {
        if (g.dc_nodes[j].role == DcRole::Ic && !seen_dc.count(j))
            add(ViolationKind::ConverterCoupling,
                "DC node " + g.dc_nodes[j].name + " is tagged as converter terminal but unused");
    }

    // Branch-level checks.
    rep.ac_branch_circulant.resize(g.ac_branches.size(), true);
    for (size_t b = 0; b < g.ac_branches.size(); ++b) {
        const AcBranch& br = g.ac_branches[b];
        const std::string tag =
            "AC branch " + std::to_string(b) + " (" + g.ac_nodes[br.from].name + "-" +
            g.ac_nodes[br.to].name + ")";
        if (!br.series.isApprox(br.series.transpose(), 1e-9))
            add(ViolationKind::AsymmetricSeriesAdmittance, tag + " series matrix not symmetric");
        rep.ac_branch_circulant[b] = is_circulant_symmetric(br.series, 1e-9);
        if (!rep.ac_branch_circulant[b]) rep.all_circulant = false;
    }
    for (size_t b = 0; b < g.dc_branches.size(); ++b) {
        if (g.dc_branches[b].conductance <= 0.0)
            add(ViolationKind::NonPositiveConductance,
                "DC branch " + std::to_string(b) + " conductance must be > 0");
    }

    // Single island per network (v1 restriction).
    if (n > 1) {
        UnionFind uf(n);
        for (const AcBranch& br : g.ac_branches) uf.unite(br.from, br.to);
        const int root = uf.find(0);
        for (int i = 1; i < n; ++i)
            if (uf.find(i) != root)
                add(ViolationKind::AcNotConnected,
                    "AC node " + g.ac_nodes[i].name + " not connected to the main island");
    }
    if (m > 1) {
        UnionFind uf(m);
        for (const DcBranch& br : g.dc_branches) uf.unite(br.from, br.to);
        const int root = uf.find(0);
        for (int j = 1; j < m; ++j)
            if (uf.find(j) != root)
                add(ViolationKind::DcNotConnected,
                    "DC node " + g.dc_nodes[j].name + " not connected to the main island");
    }

    return rep;
}

}  // namespace hygrid
