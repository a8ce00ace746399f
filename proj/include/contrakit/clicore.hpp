#pragma once

// =============================================================================
// contrakit - Command Implementations
// =============================================================================
// The command-line front end as a library: each subcommand takes a RunConfig
// and an output stream and returns the process exit code. The binary parses
// flags into a RunConfig and calls dispatch(); tests call the same entry
// points in-process.
//
// Exit-code contract:
//   0  the command succeeded and every requested certificate holds
//   1  analysis completed but a certificate fails (not contracting, gain
//      condition violated), or a generic runtime error
//   2  rejected input (unknown example, malformed file or flag value)
//   3  the integration diverged (a partial CSV is still written)
// =============================================================================

#include <ostream>
#include <string>

namespace contrakit::cli {

/// Options shared by all subcommands; a value < 0 (or an empty string)
/// means "use the model's default".
struct RunConfig {
    std::string example;    ///< built-in model id
    std::string file;       ///< path to a system-definition file
    double mu = -1.0;       ///< timescale ratio override
    double k = -1.0;        ///< high-gain parameter override
    double t_end = -1.0;    ///< simulation horizon
    double dt = -1.0;       ///< integration step (default mu / 100)
    int per_axis = -1;      ///< grid resolution for region scans
    std::string init;       ///< comma-separated initial state (x then z)
    std::string out_dir;    ///< output directory (else $CONTRAKIT_OUT, else ".")
    bool svg = false;       ///< also render an SVG plot
    double saturation = 0.0;///< input magnitude clamp (0 = none)
    std::string subsystem;  ///< check scope: "reduced", "fast", "joint", "" = both
    std::string sweep;      ///< "lo:hi:steps" parameter sweep for bounds
    bool baseline = false;  ///< also print the composite Lyapunov baseline
};

/// Prints the built-in examples with their defaults.
int cmd_list(std::ostream& out);

/// Contraction verdicts (or the gain condition for the high-gain model).
int cmd_check(const RunConfig& cfg, std::ostream& out);

/// Integrates the closed loop and writes CSV (and optionally SVG) output.
int cmd_simulate(const RunConfig& cfg, std::ostream& out);

/// Prints estimated constants and every certified envelope.
int cmd_bounds(const RunConfig& cfg, std::ostream& out);

/// Re-runs the five bundled case studies into case-1/ .. case-5/.
int cmd_reproduce(const RunConfig& cfg, std::ostream& out);

/// Runs `command`, mapping thrown errors onto the exit-code contract.
int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& out,
             std::ostream& err);

} // namespace contrakit::cli
