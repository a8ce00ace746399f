// =============================================================================
// contrakit - Command-Line Front End
// =============================================================================
// Thin flag-parsing shell around the command implementations in
// contrakit::cli. Exit codes: 0 success, 1 failed certificate or runtime
// error, 2 rejected input, 3 diverged integration.
// =============================================================================

#include "contrakit/clicore.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>

namespace {

void add_model_flags(CLI::App* cmd, contrakit::cli::RunConfig& cfg) {
    cmd->add_option("--example", cfg.example, "built-in example id (see `contrakit list`)");
    cmd->add_option("--file", cfg.file, "path to a system-definition file");
    cmd->add_option("--mu", cfg.mu, "timescale ratio override");
    cmd->add_option("--k", cfg.k, "high-gain parameter override");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"contrakit: contraction analysis and composite control for "
                 "two-timescale systems"};
    app.require_subcommand(1);

    contrakit::cli::RunConfig cfg;

    CLI::App* list = app.add_subcommand("list", "list the built-in examples");

    CLI::App* check = app.add_subcommand("check", "contraction verdicts over the model's boxes");
    add_model_flags(check, cfg);
    check->add_option("--per-axis", cfg.per_axis, "grid resolution per axis");
    check->add_option("--sub", cfg.subsystem,
                      "which subsystem to check: reduced, fast, or joint (default: both "
                      "subsystem checks)");

    CLI::App* simulate =
        app.add_subcommand("simulate", "integrate the closed loop and write CSV/SVG output");
    add_model_flags(simulate, cfg);
    simulate->add_option("--t-end", cfg.t_end, "simulation horizon");
    simulate->add_option("--dt", cfg.dt, "integration step (default mu / 100)");
    simulate->add_option("--init", cfg.init, "comma-separated initial state (x then z)");
    simulate->add_option("--per-axis", cfg.per_axis, "grid resolution for the envelopes");
    simulate->add_option("--out", cfg.out_dir, "output directory (else $CONTRAKIT_OUT, else .)");
    simulate->add_flag("--svg", cfg.svg, "also render an SVG plot");
    simulate->add_option("--saturation", cfg.saturation,
                         "input magnitude clamp (high-gain example only)");

    CLI::App* bounds =
        app.add_subcommand("bounds", "estimated constants and every certified envelope");
    add_model_flags(bounds, cfg);
    bounds->add_option("--per-axis", cfg.per_axis, "grid resolution per axis");
    bounds->add_option("--init", cfg.init, "initial state used for envelope values");
    bounds->add_option("--sweep", cfg.sweep, "lo:hi:steps sweep over mu (or k)");
    bounds->add_flag("--baseline", cfg.baseline,
                     "also print the composite Lyapunov baseline (motivating example)");

    CLI::App* reproduce =
        app.add_subcommand("reproduce", "re-run the five bundled case studies");
    reproduce->add_option("--out", cfg.out_dir, "output root (else $CONTRAKIT_OUT, else .)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    std::string command;
    if (list->parsed()) command = "list";
    else if (check->parsed()) command = "check";
    else if (simulate->parsed()) command = "simulate";
    else if (bounds->parsed()) command = "bounds";
    else if (reproduce->parsed()) command = "reproduce";

    return contrakit::cli::dispatch(command, cfg, std::cout, std::cerr);
}
