#include "hygrid/run.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "hygrid/errors.hpp"
#include "hygrid/grid_io.hpp"
#include "hygrid/powerflow.hpp"
#include "hygrid/sensitivity.hpp"
#include "hygrid/validation.hpp"

namespace hygrid {

namespace {

// 12 significant digits in scientific notation: enough to round-trip doubles for diffing.
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.11e", v);
    return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw FileError("cannot open output file " + tmp.string());
        out << content;
        if (!out.good()) throw FileError("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::filesystem::path with_suffix(const std::filesystem::path& prefix, const std::string& suffix) {
    return std::filesystem::path(prefix.string() + suffix);
}

double angle_deg(Complex e) { return std::arg(e) * 180.0 / std::numbers::pi; }

std::string network_of(const ControlVariable& x) {
    switch (x.kind) {
        case ControlKind::AcP:
        case ControlKind::AcQ:
        case ControlKind::AcVmag: return "AC";
        case ControlKind::DcP:
        case ControlKind::DcV: return "DC";
        default: return "IC";
    }
}

std::string bus_type_of(const GridModel& g, const ControlVariable& x) {
    switch (x.kind) {
        case ControlKind::AcP:
            return g.ac_nodes[x.index].role == AcRole::PV ? "P-V" : "P-Q";
        case ControlKind::AcQ: return "P-Q";
        case ControlKind::AcVmag: return "P-V";
        case ControlKind::DcP: return "P";
        case ControlKind::DcV: return "V";
        case ControlKind::IcP:
        case ControlKind::IcQ:
        case ControlKind::IcVdc:
            return g.converters[x.index].mode == IcMode::VdcQ ? "Vdc-Q" : "P-Q";
    }
    return "?";
}

std::string pf_csv(const GridModel& g, const OperatingPoint& op) {
    std::ostringstream out;
    out << "# iterations: " << op.iterations << "\n";
    out << "# residual_inf_norm: " << fmt(op.residual_norm) << "\n";
    out << "node,phase,re_pu,im_pu,mag_pu,angle_deg\n";
    for (int i = 0; i < g.n_ac(); ++i)
        for (int ph = 0; ph < kPhases; ++ph) {
            const Complex e = op.e_ac[i](ph);
            out << g.ac_nodes[i].name << ',' << kPhaseNames[ph] << ',' << fmt(e.real()) << ','
                << fmt(e.imag()) << ',' << fmt(std::abs(e)) << ',' << fmt(angle_deg(e)) << "\n";
        }
    for (int j = 0; j < g.n_dc(); ++j)
        out << g.dc_nodes[j].name << ",dc," << fmt(op.e_dc(j)) << ',' << fmt(0.0) << ','
            << fmt(std::abs(op.e_dc(j))) << ',' << fmt(0.0) << "\n";
    return out.str();
}

nlohmann::ordered_json pf_json(const GridModel& g, const OperatingPoint& op) {
    nlohmann::ordered_json doc;
    doc["iterations"] = op.iterations;
    doc["residual_inf_norm"] = op.residual_norm;
    auto& ac = doc["ac_nodes"] = nlohmann::ordered_json::array();
    for (int i = 0; i < g.n_ac(); ++i) {
        nlohmann::ordered_json node;
        node["id"] = g.ac_nodes[i].name;
        for (int ph = 0; ph < kPhases; ++ph) {
            const Complex e = op.e_ac[i](ph);
            node["phases"].push_back({{"phase", kPhaseNames[ph]},
                                      {"re_pu", e.real()},
                                      {"im_pu", e.imag()},
                                      {"mag_pu", std::abs(e)},
                                      {"angle_deg", angle_deg(e)}});
        }
        ac.push_back(node);
    }
    auto& dc = doc["dc_nodes"] = nlohmann::ordered_json::array();
    for (int j = 0; j < g.n_dc(); ++j)
        dc.push_back({{"id", g.dc_nodes[j].name}, {"e_pu", op.e_dc(j)}});
    return doc;
}

std::string sc_voltage_csv(const GridModel& g, const std::vector<SensitivityResult>& results) {
    std::ostringstream out;
    out << "x,node,phase,dmag_dx,dang_dx,dre_dx,dim_dx\n";
    for (const SensitivityResult& r : results) {
        const std::string label = control_label(g, r.x);
        for (int i = 0; i < g.n_ac(); ++i)
            for (int ph = 0; ph < kPhases; ++ph)
                out << label << ',' << g.ac_nodes[i].name << ',' << kPhaseNames[ph] << ','
                    << fmt(r.polar.dmag[i](ph)) << ',' << fmt(r.polar.dang[i](ph)) << ','
                    << fmt(r.de_ac[i](ph).real()) << ',' << fmt(r.de_ac[i](ph).imag()) << "\n";
        for (int j = 0; j < g.n_dc(); ++j)
            out << label << ',' << g.dc_nodes[j].name << ",dc," << fmt(r.de_dc(j)) << ','
                << fmt(0.0) << ',' << fmt(r.de_dc(j)) << ',' << fmt(0.0) << "\n";
    }
    return out.str();
}

std::string sc_current_csv(const GridModel& g, const std::vector<SensitivityResult>& results) {
    std::ostringstream out;
    out << "x,network,from,to,phase,dre_dx,dim_dx\n";
    for (const SensitivityResult& r : results) {
        const std::string label = control_label(g, r.x);
        for (size_t b = 0; b < g.ac_branches.size(); ++b) {
            const AcBranch& br = g.ac_branches[b];
            for (int ph = 0; ph < kPhases; ++ph)
                out << label << ",ac," << g.ac_nodes[br.from].name << ','
                    << g.ac_nodes[br.to].name << ',' << kPhaseNames[ph] << ','
                    << fmt(r.current.ac[b](ph).real()) << ',' << fmt(r.current.ac[b](ph).imag())
                    << "\n";
        }
        for (size_t b = 0; b < g.dc_branches.size(); ++b) {
            const DcBranch& br = g.dc_branches[b];
            out << label << ",dc," << g.dc_nodes[br.from].name << ',' << g.dc_nodes[br.to].name
                << ",dc," << fmt(r.current.dc(static_cast<Eigen::Index>(b))) << ',' << fmt(0.0)
                << "\n";
        }
    }
    return out.str();
}

nlohmann::ordered_json sc_json(const GridModel& g, const std::vector<SensitivityResult>& results) {
    nlohmann::ordered_json doc;
    auto& controls = doc["controls"] = nlohmann::ordered_json::array();
    for (const SensitivityResult& r : results) {
        nlohmann::ordered_json entry;
        entry["x"] = control_label(g, r.x);
        for (int i = 0; i < g.n_ac(); ++i)
            for (int ph = 0; ph < kPhases; ++ph)
                entry["voltage"].push_back({{"node", g.ac_nodes[i].name},
                                            {"phase", kPhaseNames[ph]},
                                            {"dmag_dx", r.polar.dmag[i](ph)},
                                            {"dang_dx", r.polar.dang[i](ph)},
                                            {"dre_dx", r.de_ac[i](ph).real()},
                                            {"dim_dx", r.de_ac[i](ph).imag()}});
        for (int j = 0; j < g.n_dc(); ++j)
            entry["voltage"].push_back({{"node", g.dc_nodes[j].name},
                                        {"phase", "dc"},
                                        {"dmag_dx", r.de_dc(j)},
                                        {"dang_dx", 0.0},
                                        {"dre_dx", r.de_dc(j)},
                                        {"dim_dx", 0.0}});
        for (size_t b = 0; b < g.ac_branches.size(); ++b)
            for (int ph = 0; ph < kPhases; ++ph)
                entry["current"].push_back(
                    {{"network", "ac"},
                     {"from", g.ac_nodes[g.ac_branches[b].from].name},
                     {"to", g.ac_nodes[g.ac_branches[b].to].name},
                     {"phase", kPhaseNames[ph]},
                     {"dre_dx", r.current.ac[b](ph).real()},
                     {"dim_dx", r.current.ac[b](ph).imag()}});
        for (size_t b = 0; b < g.dc_branches.size(); ++b)
            entry["current"].push_back({{"network", "dc"},
                                        {"from", g.dc_nodes[g.dc_branches[b].from].name},
                                        {"to", g.dc_nodes[g.dc_branches[b].to].name},
                                        {"phase", "dc"},
                                        {"dre_dx", r.current.dc(static_cast<Eigen::Index>(b))},
                                        {"dim_dx", 0.0}});
        controls.push_back(entry);
    }
    return doc;
}

std::string validate_csv(const GridModel& g, const ErrorReport& report) {
    std::ostringstream out;
    out << "x,node,phase,component,analytic,numeric,error\n";
    for (const ErrorRow& row : report.rows)
        out << control_label(g, row.x) << ',' << row.node << ','
            << (row.phase >= 0 ? kPhaseNames[row.phase] : "dc") << ',' << row.component << ','
            << fmt(row.analytic) << ',' << fmt(row.numeric) << ',' << fmt(row.error) << "\n";
    return out.str();
}

void print_validate_summary(const GridModel& g, const ErrorReport& report, std::ostream& out) {
    out << "Bus\tNetwork\tBus type\tMean error [p.u.]\tMax error [p.u.]\n";
    for (const ErrorSummary& s : report.summaries) {
        out << s.label << '\t' << network_of(s.x) << '\t' << bus_type_of(g, s.x) << '\t'
            << fmt(s.mean_signed) << '\t' << fmt(s.max_signed) << "\n";
    }
}

int run_checked(const RunConfig& config) {
    if (config.tolerance < 1e-12 || config.tolerance > 1e-4)
        throw ContractError("tolerance must lie in [1e-12, 1e-4]");
    if (config.max_iterations < 1 || config.max_iterations > 10000)
        throw ContractError("max-iter must lie in [1, 10000]");
    if (config.delta_p == 0.0 || config.delta_v == 0.0)
        throw ContractError("perturbation deltas must be nonzero");

    const GridModel grid = load_grid(config.grid_path);
    SolverOptions solver;
    solver.tolerance = config.tolerance;
    solver.max_iterations = config.max_iterations;

    const OperatingPoint op = solve_pf(grid, solver);

    switch (config.command) {
        case Command::Pf: {
            const std::string text = config.format == OutputFormat::Json
                                         ? pf_json(grid, op).dump(2) + "\n"
                                         : pf_csv(grid, op);
            if (config.output_path.empty()) std::cout << text;
            else write_atomic(config.output_path, text);
            std::cout << "pf: converged in " << op.iterations << " iterations, residual "
                      << fmt(op.residual_norm) << "\n";
            return kExitOk;
        }
        case Command::Sc: {
            const std::vector<SensitivityResult> results =
                all_sensitivities(grid, op, config.parallel);
            if (config.format == OutputFormat::Json) {
                const std::string text = sc_json(grid, results).dump(2) + "\n";
                if (config.output_path.empty()) std::cout << text;
                else write_atomic(with_suffix(config.output_path, ".json"), text);
            } else {
                const std::string volt = sc_voltage_csv(grid, results);
                const std::string curr = sc_current_csv(grid, results);
                if (config.output_path.empty()) {
                    std::cout << volt << curr;
                } else {
                    write_atomic(with_suffix(config.output_path, "_voltage.csv"), volt);
                    write_atomic(with_suffix(config.output_path, "_current.csv"), curr);
                }
            }
            std::cout << "sc: " << results.size() << " control variables\n";
            return kExitOk;
        }
        case Command::Validate: {
            const std::vector<SensitivityResult> analytic =
                all_sensitivities(grid, op, config.parallel);
            std::vector<PerturbationSpec> specs;
            for (const ControlVariable& x : enumerate_controls(grid)) {
                const bool voltage = x.kind == ControlKind::AcVmag ||
                                     x.kind == ControlKind::DcV || x.kind == ControlKind::IcVdc;
                specs.push_back({x, voltage ? config.delta_v : config.delta_p, config.central});
            }
            const ErrorReport report = compare(analytic, grid, op, specs, solver);
            if (!config.output_path.empty())
                write_atomic(config.output_path, validate_csv(grid, report));
            print_validate_summary(grid, report, std::cout);
            return kExitOk;
        }
    }
    throw ContractError("unknown command");
}

}  // namespace

int run(const RunConfig& config) {
    try {
        return run_checked(config);
    } catch (const Error& e) {
        std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
        const std::string& cat = e.category();
        if (cat == "file") return kExitFileError;
        if (cat == "non-convergence") return kExitNonConvergence;
        if (cat == "singular-jacobian" || cat == "singular-system") return kExitSingular;
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return kExitBadConfig;
    }
}

}  // namespace hygrid
