#include "hygrid/grid_io.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hygrid/errors.hpp"

namespace hygrid {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
    throw FileError(origin + ": " + message);
}

void expect_keys(const json& obj, const std::set<std::string>& allowed, const std::string& origin,
                 const std::string& context) {
    if (!obj.is_object()) fail(origin, context + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key))
            fail(origin, context + ": unknown key \"" + key + "\"");
    }
}

double require_number(const json& obj, const std::string& key, const std::string& origin,
                      const std::string& context) {
    if (!obj.contains(key)) fail(origin, context + ": missing \"" + key + "\"");
    if (!obj.at(key).is_number()) fail(origin, context + ": \"" + key + "\" must be a number");
    return obj.at(key).get<double>();
}

std::string require_string(const json& obj, const std::string& key, const std::string& origin,
                           const std::string& context) {
    if (!obj.contains(key) || !obj.at(key).is_string())
        fail(origin, context + ": missing string \"" + key + "\"");
    return obj.at(key).get<std::string>();
}

Complex parse_complex(const json& obj, const std::string& origin, const std::string& context) {
    expect_keys(obj, {"re", "im"}, origin, context);
    return {require_number(obj, "re", origin, context), require_number(obj, "im", origin, context)};
}

Vec3d parse_triple(const json& arr, const std::string& origin, const std::string& context) {
    if (!arr.is_array() || arr.size() != 3)
        fail(origin, context + " must be an array of 3 numbers");
    Vec3d v;
    for (int k = 0; k < 3; ++k) {
        if (!arr[k].is_number()) fail(origin, context + " must contain numbers");
        v(k) = arr[k].get<double>();
    }
    return v;
}

Mat3c parse_matrix3(const json& arr, const std::string& origin, const std::string& context) {
    if (!arr.is_array() || arr.size() != 3) fail(origin, context + " must be a 3x3 array");
    Mat3c m;
    for (int r = 0; r < 3; ++r) {
        if (!arr[r].is_array() || arr[r].size() != 3) fail(origin, context + " must be 3x3");
        for (int c = 0; c < 3; ++c) m(r, c) = parse_complex(arr[r][c], origin, context);
    }
    return m;
}

Mat3c circulant(Complex self, Complex mutual) {
    Mat3c m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = (r == c) ? self : mutual;
    return m;
}

}  // namespace

GridModel parse_grid(const std::string& json_text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(origin, std::string("not valid JSON: ") + e.what());
    }
    expect_keys(doc,
                {"bases", "ac_nodes", "dc_nodes", "ac_branches", "dc_branches", "ics",
                 "setpoints", "slack_voltage"},
                origin, "document");

    GridModel g;

    if (doc.contains("bases")) {
        const json& b = doc.at("bases");
        expect_keys(b, {"power_w", "ac_voltage_v", "dc_voltage_v"}, origin, "bases");
        g.bases.power_w = require_number(b, "power_w", origin, "bases");
        if (b.contains("ac_voltage_v"))
            g.bases.ac_voltage_v = require_number(b, "ac_voltage_v", origin, "bases");
        if (b.contains("dc_voltage_v"))
            g.bases.dc_voltage_v = require_number(b, "dc_voltage_v", origin, "bases");
    }
    const double v_ln = g.bases.ac_voltage_ln();
    const double z_ac = g.bases.z_base_ac();
    const double z_dc = g.bases.z_base_dc();

    auto parse_role_ac = [&](const std::string& s) {
        if (s == "slack") return AcRole::Slack;
        if (s == "pq") return AcRole::PQ;
        if (s == "pv") return AcRole::PV;
        if (s == "ic") return AcRole::Ic;
        fail(origin, "unknown AC role \"" + s + "\"");
    };
    auto parse_role_dc = [&](const std::string& s) {
        if (s == "p") return DcRole::P;
        if (s == "v") return DcRole::V;
        if (s == "ic") return DcRole::Ic;
        fail(origin, "unknown DC role \"" + s + "\"");
    };

    std::set<std::string> names;
    for (const json& node : doc.value("ac_nodes", json::array())) {
        expect_keys(node, {"id", "role"}, origin, "ac_nodes entry");
        AcNode n;
        n.name = require_string(node, "id", origin, "ac_nodes entry");
        n.role = parse_role_ac(require_string(node, "role", origin, n.name));
        if (!names.insert(n.name).second) fail(origin, "duplicate node id " + n.name);
        g.ac_nodes.push_back(n);
    }
    for (const json& node : doc.value("dc_nodes", json::array())) {
        expect_keys(node, {"id", "role"}, origin, "dc_nodes entry");
        DcNode n;
        n.name = require_string(node, "id", origin, "dc_nodes entry");
        n.role = parse_role_dc(require_string(node, "role", origin, n.name));
        if (!names.insert(n.name).second) fail(origin, "duplicate node id " + n.name);
        g.dc_nodes.push_back(n);
    }

    auto ac_id = [&](const json& obj, const char* key, const std::string& ctx) {
        const std::string name = require_string(obj, key, origin, ctx);
        const int i = g.ac_index(name);
        if (i < 0) fail(origin, ctx + ": unknown AC node " + name);
        return i;
    };
    auto dc_id = [&](const json& obj, const char* key, const std::string& ctx) {
        const std::string name = require_string(obj, key, origin, ctx);
        const int j = g.dc_index(name);
        if (j < 0) fail(origin, ctx + ": unknown DC node " + name);
        return j;
    };

    for (const json& br : doc.value("ac_branches", json::array())) {
        expect_keys(br,
                    {"from", "to", "unit", "z_self", "z_mutual", "b_shunt", "y_series",
                     "y_shunt_from", "y_shunt_to"},
                    origin, "ac_branches entry");
        AcBranch branch;
        branch.from = ac_id(br, "from", "ac_branches entry");
        branch.to = ac_id(br, "to", "ac_branches entry");
        const std::string unit = br.value("unit", std::string("pu"));
        if (unit != "pu" && unit != "ohm") fail(origin, "branch unit must be \"pu\" or \"ohm\"");
        const std::string ctx = "branch " + g.ac_nodes[branch.from].name + "-" +
                                g.ac_nodes[branch.to].name;

        if (br.contains("y_series")) {
            if (unit != "pu") fail(origin, ctx + ": explicit y_series must be per-unit");
            branch.series = parse_matrix3(br.at("y_series"), origin, ctx + " y_series");
            if (br.contains("y_shunt_from"))
                branch.shunt_from = parse_matrix3(br.at("y_shunt_from"), origin, ctx);
            if (br.contains("y_shunt_to"))
                branch.shunt_to = parse_matrix3(br.at("y_shunt_to"), origin, ctx);
        } else {
            if (!br.contains("z_self")) fail(origin, ctx + ": needs z_self or y_series");
            Complex zs = parse_complex(br.at("z_self"), origin, ctx + " z_self");
            Complex zm = br.contains("z_mutual")
                             ? parse_complex(br.at("z_mutual"), origin, ctx + " z_mutual")
                             : Complex(0, 0);
            double b_shunt = br.contains("b_shunt")
                                 ? require_number(br, "b_shunt", origin, ctx)
                                 : 0.0;
            if (unit == "ohm") {
                zs /= z_ac;
                zm /= z_ac;
                b_shunt *= z_ac;  // siemens -> p.u. admittance
            }
            const Mat3c z = circulant(zs, zm);
            if (std::abs(z.determinant()) < 1e-15)
                fail(origin, ctx + ": series impedance matrix is singular");
            branch.series = z.inverse();
            branch.shunt_from = circulant(Complex(0.0, b_shunt / 2.0), Complex(0, 0));
            branch.shunt_to = branch.shunt_from;
        }
        g.ac_branches.push_back(branch);
    }

    for (const json& br : doc.value("dc_branches", json::array())) {
        expect_keys(br, {"from", "to", "unit", "r"}, origin, "dc_branches entry");
        DcBranch branch;
        branch.from = dc_id(br, "from", "dc_branches entry");
        branch.to = dc_id(br, "to", "dc_branches entry");
        const std::string unit = br.value("unit", std::string("pu"));
        double r = require_number(br, "r", origin, "dc_branches entry");
        if (unit == "ohm") r /= z_dc;
        else if (unit != "pu") fail(origin, "branch unit must be \"pu\" or \"ohm\"");
        if (r <= 0.0) fail(origin, "DC branch resistance must be positive");
        branch.conductance = 1.0 / r;
        g.dc_branches.push_back(branch);
    }

    for (const json& ic : doc.value("ics", json::array())) {
        expect_keys(ic, {"ac_node", "dc_node", "mode", "allow_negative_sequence"}, origin,
                    "ics entry");
        Converter c;
        c.ac_node = ac_id(ic, "ac_node", "ics entry");
        c.dc_node = dc_id(ic, "dc_node", "ics entry");
        const std::string mode = require_string(ic, "mode", origin, "ics entry");
        if (mode == "vdc_q") c.mode = IcMode::VdcQ;
        else if (mode == "p_q") c.mode = IcMode::PQ;
        else fail(origin, "converter mode must be \"vdc_q\" or \"p_q\"");
        c.negative_sequence_injection = ic.value("allow_negative_sequence", false);
        g.converters.push_back(c);
    }

    // Setpoints, keyed by node id with role-dependent keys.
    g.setpoints.ac_p.assign(g.n_ac(), Vec3d::Zero());
    g.setpoints.ac_q.assign(g.n_ac(), Vec3d::Zero());
    g.setpoints.ac_vmag.assign(g.n_ac(), Vec3d::Ones());
    g.setpoints.dc_p.assign(g.n_dc(), 0.0);
    g.setpoints.dc_v.assign(g.n_dc(), 1.0);
    g.setpoints.ic_p.assign(g.n_ic(), 0.0);
    g.setpoints.ic_q.assign(g.n_ic(), 0.0);
    g.setpoints.ic_vdc.assign(g.n_ic(), 1.0);
    g.setpoints.ic_p_neg.assign(g.n_ic(), 0.0);
    g.setpoints.ic_q_neg.assign(g.n_ic(), 0.0);

    // converter maps are needed to route IC setpoints; build them early.
    std::vector<int> conv_of_ac(g.n_ac(), -1), conv_of_dc(g.n_dc(), -1);
    for (int c = 0; c < g.n_ic(); ++c) {
        conv_of_ac[g.converters[c].ac_node] = c;
        conv_of_dc[g.converters[c].dc_node] = c;
    }

    const double s_base = g.bases.power_w;
    const json setpoint_doc = doc.value("setpoints", json::object());
    for (const auto& [name, sp] : setpoint_doc.items()) {
        const std::string ctx = "setpoints for " + name;
        const int i = g.ac_index(name);
        const int j = g.dc_index(name);
        if (i < 0 && j < 0) fail(origin, ctx + ": unknown node");

        if (i >= 0) {
            const AcRole role = g.ac_nodes[i].role;
            if (role == AcRole::Slack) fail(origin, ctx + ": slack node takes no setpoints");
            if (role == AcRole::PQ || role == AcRole::PV) {
                expect_keys(sp, {"p_w", "p_pu", "q_var", "q_pu", "v_mag_v", "v_mag_pu"}, origin,
                            ctx);
                if (sp.contains("p_w"))
                    g.setpoints.ac_p[i] = parse_triple(sp.at("p_w"), origin, ctx) / s_base;
                if (sp.contains("p_pu"))
                    g.setpoints.ac_p[i] = parse_triple(sp.at("p_pu"), origin, ctx);
                if (role == AcRole::PQ) {
                    if (sp.contains("v_mag_v") || sp.contains("v_mag_pu"))
                        fail(origin, ctx + ": PQ node takes no voltage setpoint");
                    if (sp.contains("q_var"))
                        g.setpoints.ac_q[i] = parse_triple(sp.at("q_var"), origin, ctx) / s_base;
                    if (sp.contains("q_pu"))
                        g.setpoints.ac_q[i] = parse_triple(sp.at("q_pu"), origin, ctx);
                } else {
                    if (sp.contains("q_var") || sp.contains("q_pu"))
                        fail(origin, ctx + ": PV node takes no Q setpoint");
                    if (sp.contains("v_mag_v"))
                        g.setpoints.ac_vmag[i] = parse_triple(sp.at("v_mag_v"), origin, ctx) / v_ln;
                    if (sp.contains("v_mag_pu"))
                        g.setpoints.ac_vmag[i] = parse_triple(sp.at("v_mag_pu"), origin, ctx);
                }
            } else {  // converter AC terminal
                const int c = conv_of_ac[i];
                if (c < 0) fail(origin, ctx + ": converter terminal not bound to any converter");
                expect_keys(sp,
                            {"p_w", "p_pu", "q_var", "q_pu", "p_neg_w", "p_neg_pu", "q_neg_var",
                             "q_neg_pu"},
                            origin, ctx);
                const bool pq_mode = g.converters[c].mode == IcMode::PQ;
                if ((sp.contains("p_w") || sp.contains("p_pu")) && !pq_mode)
                    fail(origin, ctx + ": Vdc-Q converter takes no AC P setpoint");
                if (sp.contains("p_w"))
                    g.setpoints.ic_p[c] = require_number(sp, "p_w", origin, ctx) / s_base;
                if (sp.contains("p_pu"))
                    g.setpoints.ic_p[c] = require_number(sp, "p_pu", origin, ctx);
                if (sp.contains("q_var"))
                    g.setpoints.ic_q[c] = require_number(sp, "q_var", origin, ctx) / s_base;
                if (sp.contains("q_pu"))
                    g.setpoints.ic_q[c] = require_number(sp, "q_pu", origin, ctx);
                if (sp.contains("p_neg_w"))
                    g.setpoints.ic_p_neg[c] = require_number(sp, "p_neg_w", origin, ctx) / s_base;
                if (sp.contains("p_neg_pu"))
                    g.setpoints.ic_p_neg[c] = require_number(sp, "p_neg_pu", origin, ctx);
                if (sp.contains("q_neg_var"))
                    g.setpoints.ic_q_neg[c] = require_number(sp, "q_neg_var", origin, ctx) / s_base;
                if (sp.contains("q_neg_pu"))
                    g.setpoints.ic_q_neg[c] = require_number(sp, "q_neg_pu", origin, ctx);
            }
        } else {
            const DcRole role = g.dc_nodes[j].role;
            if (role == DcRole::P) {
                expect_keys(sp, {"p_w", "p_pu"}, origin, ctx);
                if (sp.contains("p_w"))
                    g.setpoints.dc_p[j] = require_number(sp, "p_w", origin, ctx) / s_base;
                if (sp.contains("p_pu"))
                    g.setpoints.dc_p[j] = require_number(sp, "p_pu", origin, ctx);
            } else if (role == DcRole::V) {
                expect_keys(sp, {"e_v", "e_pu"}, origin, ctx);
                if (sp.contains("e_v"))
                    g.setpoints.dc_v[j] =
                        require_number(sp, "e_v", origin, ctx) / g.bases.dc_voltage_v;
                if (sp.contains("e_pu"))
                    g.setpoints.dc_v[j] = require_number(sp, "e_pu", origin, ctx);
            } else {  // converter DC terminal
                const int c = conv_of_dc[j];
                if (c < 0) fail(origin, ctx + ": converter terminal not bound to any converter");
                if (g.converters[c].mode != IcMode::VdcQ)
                    fail(origin, ctx + ": P-Q converter takes no DC voltage setpoint");
                expect_keys(sp, {"e_v", "e_pu"}, origin, ctx);
                if (sp.contains("e_v"))
                    g.setpoints.ic_vdc[c] =
                        require_number(sp, "e_v", origin, ctx) / g.bases.dc_voltage_v;
                if (sp.contains("e_pu"))
                    g.setpoints.ic_vdc[c] = require_number(sp, "e_pu", origin, ctx);
            }
        }
    }

    if (doc.contains("slack_voltage")) {
        const json& sv = doc.at("slack_voltage");
        expect_keys(sv, {"magnitude_pu", "angle_deg"}, origin, "slack_voltage");
        Vec3d mag = Vec3d::Ones();
        Vec3d ang;
        ang << 0.0, -120.0, 120.0;
        if (sv.contains("magnitude_pu"))
            mag = parse_triple(sv.at("magnitude_pu"), origin, "slack_voltage.magnitude_pu");
        if (sv.contains("angle_deg"))
            ang = parse_triple(sv.at("angle_deg"), origin, "slack_voltage.angle_deg");
        for (int ph = 0; ph < kPhases; ++ph)
            g.slack_voltage(ph) = std::polar(mag(ph), ang(ph) * std::numbers::pi / 180.0);
    }

    try {
        return finalize_grid(std::move(g));
    } catch (const Error& e) {
        fail(origin, e.what());
    }
}

GridModel load_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open grid file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_grid(buffer.str(), path.string());
}

}  // namespace hygrid
