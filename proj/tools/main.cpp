#include <CLI11.hpp>

#include "hygrid/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Power flow and voltage/current sensitivity coefficients for unbalanced "
                 "hybrid AC/DC networks"};
    app.require_subcommand(1);

    hygrid::RunConfig config;
    std::string format = "csv";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--grid", config.grid_path, "grid description file (JSON)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", config.output_path, "output path (default: stdout)");
        cmd->add_option("--format", format, "output format: csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--tol", config.tolerance, "solver tolerance (residual inf-norm, p.u.)")
            ->check(CLI::Range(1e-12, 1e-4));
        cmd->add_option("--max-iter", config.max_iterations, "Newton iteration budget")
            ->check(CLI::Range(1, 10000));
    };

    CLI::App* pf = app.add_subcommand("pf", "solve the hybrid AC/DC power flow");
    add_common(pf);

    CLI::App* sc = app.add_subcommand("sc", "compute all sensitivity coefficients");
    add_common(sc);
    sc->add_flag("--parallel", config.parallel, "solve the control variables concurrently");

    CLI::App* validate =
        app.add_subcommand("validate", "compare analytic coefficients against the "
                                       "finite-difference perturbation oracle");
    add_common(validate);
    validate->add_option("--delta-p", config.delta_p, "power perturbation size (p.u.)");
    validate->add_option("--delta-v", config.delta_v, "voltage perturbation size (p.u.)");
    validate->add_flag("--central", config.central, "use central differences");
    validate->add_flag("--parallel", config.parallel, "solve the control variables concurrently");

    CLI11_PARSE(app, argc, argv);

    if (pf->parsed()) config.command = hygrid::Command::Pf;
    if (sc->parsed()) config.command = hygrid::Command::Sc;
    if (validate->parsed()) config.command = hygrid::Command::Validate;
    config.format = format == "json" ? hygrid::OutputFormat::Json : hygrid::OutputFormat::Csv;

    return hygrid::run(config);
}
