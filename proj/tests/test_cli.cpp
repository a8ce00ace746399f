#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

using Catch::Matchers::ContainsSubstring;

namespace {

namespace fs = std::filesystem;

struct CliResult {
    int code = -1;
    std::string output; ///< stdout and stderr combined
};

/// Per-process scratch directory, wiped once at startup.
[[nodiscard]] const fs::path& scratch_root() {
    static const fs::path root = [] {
        const fs::path p = fs::temp_directory_path() / "contrakit_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

[[nodiscard]] CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path capture =
        scratch_root() / ("capture_" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string("'") + CONTRAKIT_BIN + "' " + args + " > '" +
                            capture.string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (status != -1 && WIFEXITED(status)) r.code = WEXITSTATUS(status);
    std::ifstream in(capture);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    return r;
}

[[nodiscard]] std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

[[nodiscard]] std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

[[nodiscard]] std::string data_path(const std::string& name) {
    return std::string(CONTRAKIT_TEST_DATA_DIR) + "/" + name;
}

} // namespace

// -----------------------------------------------------------------------------
// list / argument handling
// -----------------------------------------------------------------------------

TEST_CASE("list names every built-in example", "[cli][list]") {
    const CliResult r = run_cli("list");
    CHECK(r.code == 0);
    for (const char* id : {"motivating", "dcmotor", "nonstandard", "highgain"}) {
        CHECK_THAT(r.output, ContainsSubstring(id));
    }
    CHECK_THAT(r.output, ContainsSubstring("defaults:"));
    CHECK_THAT(r.output, ContainsSubstring("k = 4.5"));
}

TEST_CASE("unknown subcommands and examples are rejected", "[cli][errors]") {
    CHECK(run_cli("frobnicate").code == 2);

    const CliResult unknown = run_cli("check --example warp_drive");
    CHECK(unknown.code == 2);
    CHECK_THAT(unknown.output, ContainsSubstring("unknown example 'warp_drive'"));
    CHECK_THAT(unknown.output, ContainsSubstring("motivating"));  // lists the known ids

    const CliResult both = run_cli("check --example motivating --file x.sps");
    CHECK(both.code == 2);
    CHECK_THAT(both.output, ContainsSubstring("exactly one of --example or --file"));

    const CliResult sub = run_cli("check --example dcmotor --sub sideways");
    CHECK(sub.code == 2);
    CHECK_THAT(sub.output, ContainsSubstring("--sub must be one of reduced, fast, joint"));
}

// -----------------------------------------------------------------------------
// check
// -----------------------------------------------------------------------------

TEST_CASE("check certifies the dcmotor design", "[cli][check]") {
    const CliResult r = run_cli("check --example dcmotor");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("reduced:"));
    CHECK_THAT(r.output, ContainsSubstring("fast:"));
    CHECK_THAT(r.output, ContainsSubstring("verdict: contracting"));
}

TEST_CASE("check reports the flat reduced model of the motivating example",
          "[cli][check]") {
    // The reduced slow field flattens at the origin, so only the fast
    // subsystem is certified and the overall verdict is withheld.
    const CliResult r = run_cli("check --example motivating");
    CHECK(r.code == 1);
    CHECK_THAT(r.output, ContainsSubstring("semi-contracting"));
    CHECK_THAT(r.output, ContainsSubstring("verdict: not certified"));

    const CliResult fast_only = run_cli("check --example motivating --sub fast");
    CHECK(fast_only.code == 0);
    CHECK_THAT(fast_only.output, ContainsSubstring("verdict: contracting"));
}

TEST_CASE("check on a definition file without a design notes the fallback",
          "[cli][check]") {
    const CliResult r = run_cli("check --file '" + data_path("nonstandard.sps") + "'");
    CHECK(r.code == 1);  // coupled plant under u1 alone is not contracting
    CHECK_THAT(r.output, ContainsSubstring("using u = u1(x)"));
    CHECK_THAT(r.output, ContainsSubstring("joint:"));
}

TEST_CASE("check gates the high-gain example on the gain condition", "[cli][check]") {
    const CliResult pass = run_cli("check --example highgain --k 10");
    CHECK(pass.code == 0);
    CHECK_THAT(pass.output, ContainsSubstring("satisfied"));

    const CliResult fail = run_cli("check --example highgain --k 2");
    CHECK(fail.code == 1);
    CHECK_THAT(fail.output, ContainsSubstring("VIOLATED"));
    CHECK_THAT(fail.output, ContainsSubstring("raise the gain k"));
}

// -----------------------------------------------------------------------------
// simulate
// -----------------------------------------------------------------------------

TEST_CASE("simulate writes trajectory CSV with envelope columns", "[cli][simulate]") {
    const fs::path dir = scratch_root() / "sim_motivating";
    const CliResult r = run_cli("simulate --example motivating --t-end 2 --out '" +
                                dir.string() + "'");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("fast envelope: contained"));

    const std::string csv = slurp(dir / "motivating_traj.csv");
    // Slow envelope is not certified here (flat reduced model), so only the
    // fast bound column appears.
    CHECK(first_line(csv) == "t,x1,z1,u,fast_bound");

    const fs::path dir2 = scratch_root() / "sim_dcmotor";
    const CliResult r2 = run_cli("simulate --example dcmotor --out '" + dir2.string() +
                                 "' --svg");
    CHECK(r2.code == 0);
    const std::string csv2 = slurp(dir2 / "dcmotor_traj.csv");
    CHECK(first_line(csv2) == "t,x1,z1,u,fast_bound,slow_bound");
    CHECK_THAT(slurp(dir2 / "dcmotor_traj.svg"), ContainsSubstring("<svg"));
}

TEST_CASE("identical runs produce identical bytes", "[cli][simulate]") {
    const fs::path a = scratch_root() / "det_a";
    const fs::path b = scratch_root() / "det_b";
    CHECK(run_cli("simulate --example motivating --t-end 2 --out '" + a.string() + "'")
              .code == 0);
    CHECK(run_cli("simulate --example motivating --t-end 2 --out '" + b.string() + "'")
              .code == 0);
    const std::string left = slurp(a / "motivating_traj.csv");
    CHECK(left == slurp(b / "motivating_traj.csv"));
    CHECK(left.size() > 1000);
}

TEST_CASE("diverging integrations exit 3 and keep the valid prefix",
          "[cli][simulate]") {
    const fs::path model = scratch_root() / "unstable.sps";
    {
        std::ofstream os(model);
        os << "[system]\n"
              "name = unstable\n"
              "n = 1\n"
              "m = 0\n"
              "mu = 1\n"
              "\n"
              // x1*x1 rather than x1^2: the power node refuses non-finite
              // results, while a plain product overflows to inf and lets the
              // integrator's divergence detection report the blowup.
              "[dynamics]\n"
              "f1 = x1*x1\n"
              "\n"
              "[region.slow]\n"
              "x1 = -3, 3\n";
    }
    const fs::path dir = scratch_root() / "diverge";
    const CliResult r = run_cli("simulate --file '" + model.string() +
                                "' --init 2 --t-end 2 --dt 0.001 --out '" + dir.string() +
                                "'");
    CHECK(r.code == 3);
    CHECK_THAT(r.output, ContainsSubstring("integration diverged after t ="));

    const std::string csv = slurp(dir / "unstable_traj.csv");
    CHECK(first_line(csv) == "t,x1,u");
    CHECK_THAT(csv, ContainsSubstring("# truncated: integration diverged"));
}

TEST_CASE("simulate validates the initial state", "[cli][simulate]") {
    const CliResult wrong_count = run_cli("simulate --example motivating --init 0.9");
    CHECK(wrong_count.code == 2);
    CHECK_THAT(wrong_count.output, ContainsSubstring("initial state needs 2 values"));

    const CliResult not_a_number =
        run_cli("simulate --example motivating --init '0.9;0.4'");
    CHECK(not_a_number.code == 2);
    CHECK_THAT(not_a_number.output, ContainsSubstring("cannot parse --init entry"));
}

TEST_CASE("simulate reports tracking and high-gain summaries", "[cli][simulate]") {
    const fs::path dir = scratch_root() / "sim_other";
    const CliResult tracking = run_cli("simulate --example nonstandard --t-end 5 --out '" +
                                       dir.string() + "'");
    CHECK(tracking.code == 0);
    CHECK_THAT(tracking.output, ContainsSubstring("steady tracking error ||e|| ="));
    CHECK_THAT(tracking.output, ContainsSubstring("tracking limit ="));
    CHECK_THAT(tracking.output, ContainsSubstring("fast envelope: contained"));

    const CliResult hg = run_cli("simulate --example highgain --saturation 5 --out '" +
                                 dir.string() + "'");
    CHECK(hg.code == 0);
    CHECK_THAT(hg.output, ContainsSubstring("saturation = 5"));
    CHECK_THAT(hg.output, ContainsSubstring("steady scaled error ="));
    CHECK_THAT(hg.output, ContainsSubstring("steady-state bound ="));
    CHECK_THAT(hg.output, ContainsSubstring("(satisfied)"));
}

// -----------------------------------------------------------------------------
// bounds
// -----------------------------------------------------------------------------

TEST_CASE("bounds prints the constant table and envelopes", "[cli][bounds]") {
    const CliResult r = run_cli("bounds --example motivating");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("lambda_z = 2   chi_z = 1"));
    CHECK_THAT(r.output, ContainsSubstring("fast envelope: value(0)"));
    CHECK_THAT(r.output, ContainsSubstring("slow envelope: not certified"));
    CHECK_THAT(r.output,
               ContainsSubstring("exponential-decay threshold mu* = 0.295858"));

    const CliResult dc = run_cli("bounds --example dcmotor");
    CHECK(dc.code == 0);
    CHECK_THAT(dc.output, ContainsSubstring("slow envelope: value(0)"));
    CHECK_THAT(dc.output, ContainsSubstring("mu* = unbounded (d_q = 0)"));
}

TEST_CASE("bounds baseline reports the weighted Lyapunov estimate", "[cli][bounds]") {
    const CliResult r = run_cli("bounds --example motivating --baseline");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("baseline mu_max = 0.428571"));
    CHECK_THAT(r.output, ContainsSubstring("at d* = 0.567568"));
    CHECK_THAT(r.output, ContainsSubstring("baseline note:"));

    const CliResult wrong = run_cli("bounds --example dcmotor --baseline");
    CHECK(wrong.code == 2);
    CHECK_THAT(wrong.output,
               ContainsSubstring("--baseline applies to the built-in 'motivating'"));
}

TEST_CASE("bounds sweeps a parameter range", "[cli][bounds]") {
    const CliResult r = run_cli("bounds --example dcmotor --sweep 0.05:0.15:3");
    CHECK(r.code == 0);
    CHECK_THAT(r.output, ContainsSubstring("sweep over mu:"));
    CHECK_THAT(r.output, ContainsSubstring("mu = 0.05:"));
    CHECK_THAT(r.output, ContainsSubstring("mu = 0.1:"));
    CHECK_THAT(r.output, ContainsSubstring("mu = 0.15:"));

    CHECK(run_cli("bounds --example dcmotor --sweep 1:0:5").code == 2);
    CHECK(run_cli("bounds --example dcmotor --sweep nope").code == 2);

    const CliResult hg = run_cli("bounds --example highgain --k 2");
    CHECK(hg.code == 1);
    CHECK_THAT(hg.output, ContainsSubstring("gain condition fails"));
}

TEST_CASE("bounds requires a full design", "[cli][bounds]") {
    const CliResult r = run_cli("bounds --file '" + data_path("nonstandard.sps") + "'");
    CHECK(r.code == 2);
    CHECK_THAT(r.output, ContainsSubstring("bounds needs a full design"));
}

// -----------------------------------------------------------------------------
// reproduce
// -----------------------------------------------------------------------------

TEST_CASE("reproduce regenerates the bundled case studies", "[cli][reproduce]") {
    const fs::path root = scratch_root() / "repro";
    const CliResult r = run_cli("reproduce --out '" + root.string() + "'");
    CHECK(r.code == 0);
    for (int i = 1; i <= 5; ++i) {
        INFO("case-" << i);
        CHECK(fs::exists(root / ("case-" + std::to_string(i)) / "summary.txt"));
    }
    CHECK(fs::exists(root / "case-1" / "motivating_mu0.1.csv"));
    CHECK(fs::exists(root / "case-1" / "motivating_mu0.1.svg"));
    CHECK(fs::exists(root / "case-3" / "baseline_curve.csv"));
    CHECK_THAT(slurp(root / "case-3" / "summary.txt"),
               ContainsSubstring("mu_max = 0.428571"));
    CHECK_THAT(slurp(root / "case-5" / "summary.txt"),
               ContainsSubstring("k = 2: ") );
    CHECK_THAT(slurp(root / "case-5" / "summary.txt"),
               ContainsSubstring("raise the gain k"));
}
