#include "contrakit/clicore.hpp"

#include "contrakit/composite.hpp"
#include "contrakit/contraction.hpp"
#include "contrakit/errors.hpp"
#include "contrakit/highgain.hpp"
#include "contrakit/model.hpp"
#include "contrakit/nonstandard.hpp"
#include "contrakit/numerics.hpp"
#include "contrakit/output.hpp"
#include "contrakit/registry.hpp"
#include "contrakit/sysdsl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

namespace contrakit::cli {

namespace {

// =============================================================================
// Formatting helpers
// =============================================================================

[[nodiscard]] std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

[[nodiscard]] std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
}

[[nodiscard]] std::string vec_str(const StateVector& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fmt6(v[i]);
    }
    return s + ")";
}

// =============================================================================
// Option parsing and resolution
// =============================================================================

[[nodiscard]] double parse_double(const std::string& text, const std::string& what) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw InputError("cannot parse " + what + " '" + text + "' as a number");
    }
    return value;
}

[[nodiscard]] StateVector parse_init(const std::string& text) {
    StateVector out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        std::string piece = text.substr(start, comma - start);
        // trim spaces
        const auto a = piece.find_first_not_of(" \t");
        const auto b = piece.find_last_not_of(" \t");
        if (a == std::string::npos) throw InputError("empty entry in --init '" + text + "'");
        piece = piece.substr(a, b - a + 1);
        out.push_back(parse_double(piece, "--init entry"));
        start = comma + 1;
        if (comma == text.size()) break;
    }
    if (out.empty()) throw InputError("--init needs at least one value");
    return out;
}

/// "lo:hi:steps" -> evenly spaced values, steps >= 2.
[[nodiscard]] std::vector<double> parse_sweep(const std::string& text) {
    const std::size_t c1 = text.find(':');
    const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : text.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
        throw InputError("--sweep expects lo:hi:steps, got '" + text + "'");
    }
    const double lo = parse_double(text.substr(0, c1), "--sweep lower end");
    const double hi = parse_double(text.substr(c1 + 1, c2 - c1 - 1), "--sweep upper end");
    const double steps_d = parse_double(text.substr(c2 + 1), "--sweep step count");
    const int steps = static_cast<int>(steps_d);
    if (steps < 2 || static_cast<double>(steps) != steps_d) {
        throw InputError("--sweep step count must be an integer >= 2");
    }
    if (!(hi > lo)) throw InputError("--sweep needs lo < hi");
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        values.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    }
    return values;
}

[[nodiscard]] std::string resolve_out_dir(const RunConfig& cfg) {
    if (!cfg.out_dir.empty()) return cfg.out_dir;
    if (const char* env = std::getenv("CONTRAKIT_OUT"); env != nullptr && *env != '\0') {
        return std::string(env);
    }
    return ".";
}

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw InputError("cannot create output directory '" + path + "': " + ec.message());
}

struct Source {
    bool is_example = false;
    std::string id;   ///< example id when is_example
    std::string path; ///< file path otherwise
    std::string name; ///< id or file stem, used in output names
};

[[nodiscard]] Source resolve_source(const RunConfig& cfg) {
    if (cfg.example.empty() == cfg.file.empty()) {
        throw InputError("pass exactly one of --example or --file");
    }
    Source src;
    if (!cfg.example.empty()) {
        src.is_example = true;
        src.id = cfg.example;
        src.name = cfg.example;
        (void)registry::find(cfg.example); // throws with the known-id list
    } else {
        src.path = cfg.file;
        src.name = std::filesystem::path(cfg.file).stem().string();
        if (src.name.empty()) src.name = "system";
    }
    return src;
}

// =============================================================================
// Model loading
// =============================================================================

/// A standard two-timescale model ready for analysis: either a full design
/// (control + manifold) or a bare system with whatever input closure the
/// definition provides.
struct StandardModel {
    std::optional<composite::StandardDesign> design;
    TwoTimescaleSystem system; ///< open-loop copy (always set)
    std::function<double(const StateVector& x, const StateVector& z)> input; ///< closed loop
    contraction::Metric metric_x = contraction::Metric::identity(1);
    contraction::Metric metric_z = contraction::Metric::identity(1);
    std::string note; ///< non-empty when the model lacks parts of a design
};

[[nodiscard]] sysdsl::CompiledSystem load_compiled(const std::string& path, double mu_override) {
    sysdsl::SystemFile file = sysdsl::load_system_file(path);
    if (mu_override > 0.0) file.mu = mu_override;
    return sysdsl::compile(file);
}

[[nodiscard]] StandardModel load_standard(const Source& src, double mu) {
    StandardModel mdl;
    if (src.is_example) {
        const auto& info = registry::find(src.id);
        if (info.kind != registry::ExampleKind::standard) {
            throw InputError("example '" + src.id + "' is not a standard two-timescale design");
        }
        mdl.design = registry::make_standard(src.id, mu);
        mdl.system = mdl.design->system;
        mdl.metric_x = mdl.design->metric_x;
        mdl.metric_z = mdl.design->metric_z;
        const auto* design = &*mdl.design;
        auto shared = std::make_shared<composite::StandardDesign>(*design);
        mdl.input = [shared](const StateVector& x, const StateVector& z) {
            return shared->input_at(x, z);
        };
        return mdl;
    }

    sysdsl::CompiledSystem compiled = load_compiled(src.path, mu);
    mdl.system = compiled.system;
    if (compiled.metric_slow) mdl.metric_x = *compiled.metric_slow;
    else mdl.metric_x = contraction::Metric::identity(compiled.system.n);
    if (compiled.metric_fast) mdl.metric_z = *compiled.metric_fast;
    else if (compiled.system.m > 0) mdl.metric_z = contraction::Metric::identity(compiled.system.m);

    if (compiled.control && compiled.manifold) {
        mdl.design = composite::make_standard_design(compiled.system, *compiled.control,
                                                     mdl.metric_x, mdl.metric_z);
        auto shared = std::make_shared<composite::StandardDesign>(*mdl.design);
        mdl.input = [shared](const StateVector& x, const StateVector& z) {
            return shared->input_at(x, z);
        };
    } else if (compiled.u1) {
        auto u1 = compiled.u1;
        mdl.input = [u1](const StateVector& x, const StateVector&) { return u1(x); };
        mdl.note = "definition has no full design (control + manifold); using u = u1(x)";
    } else {
        mdl.input = [](const StateVector&, const StateVector&) { return 0.0; };
        mdl.note = "definition has no control law; using u = 0";
    }
    return mdl;
}

[[nodiscard]] double effective_mu(const RunConfig& cfg, const Source& src) {
    if (cfg.mu > 0.0) return cfg.mu;
    if (src.is_example) {
        const auto& info = registry::find(src.id);
        if (info.kind == registry::ExampleKind::highgain) return 1.0;
        return info.default_mu;
    }
    return 0.0; // keep the file's value (load_compiled only overrides for > 0)
}

[[nodiscard]] double effective_k(const RunConfig& cfg) {
    if (cfg.k > 0.0) return cfg.k;
    return registry::find("highgain").default_k;
}

[[nodiscard]] int effective_per_axis(const RunConfig& cfg, int fallback) {
    return cfg.per_axis > 0 ? cfg.per_axis : fallback;
}

/// Stacked initial state (x then z): --init when given, else the example
/// default, else the box centers.
[[nodiscard]] StateVector initial_state(const RunConfig& cfg, const Source& src,
                                        const TwoTimescaleSystem& system) {
    StateVector init;
    if (!cfg.init.empty()) {
        init = parse_init(cfg.init);
    } else if (src.is_example) {
        init = registry::find(src.id).initial_state;
    } else {
        init = system.slow_region.center();
        if (system.m > 0) {
            const StateVector zc = system.fast_region.center();
            init.insert(init.end(), zc.begin(), zc.end());
        }
    }
    if (init.size() != system.n + system.m) {
        throw InputError("initial state needs " + std::to_string(system.n + system.m) +
                         " values (x then z), got " + std::to_string(init.size()));
    }
    return init;
}

void split_state(const TwoTimescaleSystem& system, const StateVector& stacked, StateVector& x,
                 StateVector& z) {
    x.assign(stacked.begin(), stacked.begin() + static_cast<std::ptrdiff_t>(system.n));
    z.assign(stacked.begin() + static_cast<std::ptrdiff_t>(system.n), stacked.end());
}

// =============================================================================
// Check helpers
// =============================================================================

void print_report(std::ostream& out, const std::string& label,
                  const contraction::ContractionReport& rep) {
    out << "  " << label << ": " << contraction::to_string(rep.verdict)
        << "  rate = " << fmt6(rep.rate) << "  chi = " << fmt6(rep.metric_chi)
        << "  samples = " << rep.samples << "  worst = " << vec_str(rep.worst_point) << "\n";
}

[[nodiscard]] bool want(const std::string& sub, const char* which) {
    return sub.empty() || sub == which;
}

[[nodiscard]] int check_standard(const RunConfig& cfg, std::ostream& out, const Source& src) {
    const double mu = effective_mu(cfg, src);
    StandardModel mdl = load_standard(src, mu);
    const TwoTimescaleSystem& sys = mdl.design ? mdl.design->system : mdl.system;
    const int per = effective_per_axis(cfg, 21);
    const std::string& sub = cfg.subsystem;

    out << "check " << src.name << " (mu = " << tag(sys.mu) << ", grid " << per
        << " per axis)\n";
    if (!mdl.note.empty()) out << "  note: " << mdl.note << "\n";

    bool all_contracting = true;
    bool checked = false;
    const auto record = [&](const contraction::ContractionReport& rep) {
        checked = true;
        all_contracting =
            all_contracting && rep.verdict == contraction::Verdict::contracting;
    };

    if (mdl.design) {
        const auto design = std::make_shared<composite::StandardDesign>(*mdl.design);
        if (want(sub, "reduced")) {
            const numerics::VectorField reduced = [design](const StateVector& x) {
                const StateVector z = design->manifold(x);
                return design->system.f(x, z, design->control.u1(x));
            };
            const auto rep =
                contraction::check_region(reduced, sys.slow_region, mdl.metric_x, per);
            print_report(out, "reduced", rep);
            record(rep);
        }
        if (want(sub, "fast") && sys.m > 0) {
            const auto fast = [design](const StateVector& z, const StateVector& x) {
                return design->system.g(x, z, design->system.mu, design->input_at(x, z));
            };
            const auto rep = contraction::partial_contraction_check(
                fast, sys.fast_region, sys.slow_region, mdl.metric_z, per);
            print_report(out, "fast", rep);
            record(rep);
        }
        if (sub == "joint") {
            const auto joint = [design](const StateVector& s) {
                StateVector x, z;
                split_state(design->system, s, x, z);
                const double u = design->input_at(x, z);
                StateVector dx = design->system.f(x, z, u);
                const StateVector dz = design->system.g(x, z, design->system.mu, u);
                for (double v : dz) dx.push_back(v / design->system.mu);
                return dx;
            };
            const auto region = BoxRegion::product(sys.slow_region, sys.fast_region);
            const auto rep = contraction::check_region(
                joint, region, contraction::Metric::identity(sys.n + sys.m), per);
            print_report(out, "joint", rep);
            record(rep);
        }
    } else {
        // No design: check the coupled system under the available input.
        auto input = mdl.input;
        auto system = std::make_shared<TwoTimescaleSystem>(sys);
        if (sys.m == 0) {
            const numerics::VectorField slow_only = [system, input](const StateVector& x) {
                return system->f(x, StateVector{}, input(x, StateVector{}));
            };
            const auto rep =
                contraction::check_region(slow_only, sys.slow_region, mdl.metric_x, per);
            print_report(out, "reduced", rep);
            record(rep);
        } else {
            const auto joint = [system, input](const StateVector& s) {
                StateVector x, z;
                split_state(*system, s, x, z);
                const double u = input(x, z);
                StateVector dx = system->f(x, z, u);
                const StateVector dz = system->g(x, z, system->mu, u);
                for (double v : dz) dx.push_back(v / system->mu);
                return dx;
            };
            const auto region = BoxRegion::product(sys.slow_region, sys.fast_region);
            const auto rep = contraction::check_region(
                joint, region, contraction::Metric::identity(sys.n + sys.m), per);
            print_report(out, "joint", rep);
            record(rep);
        }
    }

    if (!checked) throw InputError("nothing to check for --sub '" + sub + "'");
    out << (all_contracting ? "verdict: contracting\n" : "verdict: not certified\n");
    return all_contracting ? 0 : 1;
}

[[nodiscard]] int check_tracking(const RunConfig& cfg, std::ostream& out) {
    const double mu = cfg.mu > 0.0 ? cfg.mu : registry::find("nonstandard").default_mu;
    const auto design =
        std::make_shared<nonstandard::NonstandardDesign>(registry::make_tracking(mu));
    const int per = effective_per_axis(cfg, 21);
    const std::string& sub = cfg.subsystem;

    out << "check nonstandard (mu = " << tag(mu) << ", grid " << per
        << " per axis, error coordinates at t = 0)\n";

    bool all_contracting = true;
    bool checked = false;
    const auto record = [&](const contraction::ContractionReport& rep) {
        checked = true;
        all_contracting =
            all_contracting && rep.verdict == contraction::Verdict::contracting;
    };

    if (want(sub, "reduced")) {
        const std::size_t m = design->system.m;
        const numerics::VectorField reduced = [design, m](const StateVector& e) {
            const StateVector e_z(m, 0.0);
            const StateVector xr = design->x_ref(0.0);
            const StateVector xrd = design->x_ref_dot(0.0);
            StateVector x = e;
            for (std::size_t i = 0; i < x.size(); ++i) x[i] += xr[i];
            const StateVector z = design->virtual_manifold(e, 0.0);
            const double u = design->control(e_z, e, 0.0);
            StateVector fx = design->system.f(x, z, u);
            for (std::size_t i = 0; i < fx.size(); ++i) fx[i] -= xrd[i];
            return fx;
        };
        const auto rep =
            contraction::check_region(reduced, design->error_region, design->metric_e, per);
        print_report(out, "reduced error", rep);
        record(rep);
    }
    if (want(sub, "fast")) {
        const auto fields = nonstandard::fast_error_dynamics(*design);
        const BoxRegion ez_region = nonstandard::fast_error_region(*design, per);
        const auto fast = [fields](const StateVector& e_z, const StateVector& e) {
            return fields.unperturbed(e_z, e, 0.0);
        };
        const auto rep = contraction::partial_contraction_check(
            fast, ez_region, design->error_region, design->metric_ez, per);
        print_report(out, "fast error", rep);
        record(rep);
    }
    if (sub == "joint") {
        const auto joint = [design](const StateVector& s) {
            StateVector x, z;
            split_state(design->system, s, x, z);
            const StateVector xr = design->x_ref(0.0);
            StateVector e = x;
            for (std::size_t i = 0; i < e.size(); ++i) e[i] -= xr[i];
            StateVector e_z = z;
            const StateVector zde = design->virtual_manifold(e, 0.0);
            for (std::size_t i = 0; i < e_z.size(); ++i) e_z[i] -= zde[i];
            const double u = design->control(e_z, e, 0.0);
            StateVector dx = design->system.f(x, z, u);
            const StateVector dz = design->system.g(x, z, design->system.mu, u);
            for (double v : dz) dx.push_back(v / design->system.mu);
            return dx;
        };
        const auto region =
            BoxRegion::product(design->system.slow_region, design->system.fast_region);
        const auto rep = contraction::check_region(
            joint, region, contraction::Metric::identity(design->system.n + design->system.m),
            per);
        print_report(out, "joint", rep);
        record(rep);
    }

    if (!checked) throw InputError("nothing to check for --sub '" + cfg.subsystem + "'");
    out << (all_contracting ? "verdict: contracting\n" : "verdict: not certified\n");
    return all_contracting ? 0 : 1;
}

void print_gain_check(std::ostream& out, double k, const highgain::GainConditionCheck& chk) {
    out << "  k = " << tag(k) << ": threshold = " << fmt6(chk.threshold)
        << "  sup ||d gbar3 / d xi|| = " << fmt6(chk.jac_sup)
        << "  margin = " << fmt6(chk.margin) << "  "
        << (chk.ok ? "satisfied" : "VIOLATED") << "  worst = " << vec_str(chk.worst) << "\n";
}

[[nodiscard]] int check_highgain(const RunConfig& cfg, std::ostream& out) {
    const double k = effective_k(cfg);
    const int per = effective_per_axis(cfg, 9);
    const auto setup = registry::make_highgain(k);
    const auto chk = highgain::gain_condition_check(setup.chain, setup.design, per);

    out << "check highgain (gain condition on the analysis box, grid " << per
        << " per axis)\n";
    print_gain_check(out, k, chk);
    out << (chk.ok ? "verdict: contracting\n"
                   : "verdict: not certified (raise the gain k)\n");
    return chk.ok ? 0 : 1;
}

// =============================================================================
// Envelope helpers (shared by simulate / bounds / reproduce)
// =============================================================================

struct Envelopes {
    composite::BoundCurve fast;    ///< fast transient envelope (may be inapplicable)
    composite::BoundCurve slow;    ///< slow transient envelope
    bool fast_ok = false;          ///< fast envelope curve exists
    bool slow_attempted = false;
    std::string fast_reason;       ///< set when the fast envelope is refused
    std::string slow_reason;
    double mu_star = 0.0;
};

[[nodiscard]] Envelopes standard_envelopes(const BoundSet& bounds, double x0_err, double z0_err) {
    Envelopes env;
    try {
        env.fast = composite::fast_error_bound(bounds, z0_err);
        env.fast_ok = true;
    } catch (const NotApplicableError& e) {
        env.fast_reason = e.what();
    }
    try {
        env.slow = composite::slow_error_bound(bounds, x0_err, z0_err);
        env.slow_attempted = true;
        if (!env.slow.has_curve()) env.slow_reason = env.slow.note;
    } catch (const NotApplicableError& e) {
        env.slow_reason = e.what();
    }
    env.mu_star = composite::exponential_mu_threshold(bounds.d_q, bounds.lambda_z);
    return env;
}

void print_bound_table(std::ostream& out, const BoundSet& b) {
    out << "  lambda_x = " << fmt6(b.lambda_x) << "   chi_x = " << fmt6(b.chi_x) << "\n";
    out << "  lambda_z = " << fmt6(b.lambda_z) << "   chi_z = " << fmt6(b.chi_z) << "\n";
    out << "  L1 = " << fmt6(b.L1) << "   L2 = " << fmt6(b.L2) << "   L_u = " << fmt6(b.L_u)
        << "\n";
    out << "  d1 = " << fmt6(b.d1) << "   d2 = " << fmt6(b.d2) << "   d_q = " << fmt6(b.d_q)
        << "\n";
}

void print_envelopes(std::ostream& out, const Envelopes& env) {
    if (env.fast_ok) {
        out << "  fast envelope: value(0) = " << fmt6(env.fast.at(0.0))
            << ", limit = " << fmt6(env.fast.limit);
        if (!env.fast.note.empty()) out << "  [" << env.fast.note << "]";
        out << "\n";
    } else {
        out << "  fast envelope: not certified (" << env.fast_reason << ")\n";
    }
    if (env.slow_attempted && env.slow.has_curve()) {
        out << "  slow envelope: value(0) = " << fmt6(env.slow.at(0.0))
            << ", limit = " << fmt6(env.slow.limit);
        if (!env.slow.note.empty()) out << "  [" << env.slow.note << "]";
        out << "\n";
    } else if (env.slow_attempted) {
        out << "  slow envelope: curve withheld (" << env.slow_reason
            << "); limit = " << fmt6(env.slow.limit) << "\n";
    } else {
        out << "  slow envelope: not certified (" << env.slow_reason << ")\n";
    }
    if (std::isfinite(env.mu_star)) {
        out << "  exponential-decay threshold mu* = " << fmt6(env.mu_star) << "\n";
    } else {
        out << "  exponential-decay threshold mu* = unbounded (d_q = 0)\n";
    }
}

/// Containment of an observed error series under an envelope curve.
struct Containment {
    bool contained = true;
    double max_error = 0.0;
    double min_margin = kInfinity;
    double worst_time = 0.0;
};

[[nodiscard]] Containment check_containment(const std::vector<double>& times,
                                            const std::vector<double>& errors,
                                            const std::function<double(double)>& curve) {
    Containment c;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double bound = curve(times[i]);
        const double margin = bound - errors[i];
        c.max_error = std::max(c.max_error, errors[i]);
        if (margin < c.min_margin) {
            c.min_margin = margin;
            c.worst_time = times[i];
        }
        if (errors[i] > bound) c.contained = false;
    }
    return c;
}

[[nodiscard]] std::vector<double> fast_error_series(const composite::StandardDesign& design,
                                                    const Trajectory& traj) {
    const auto manifold = composite::manifold_series(design, traj);
    std::vector<double> errors;
    errors.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        StateVector x, z;
        split_state(design.system, traj.states[i], x, z);
        StateVector diff = z;
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] -= manifold[i][j];
        errors.push_back(norm(diff));
    }
    return errors;
}

// =============================================================================
// Simulation output helpers
// =============================================================================

struct SimResult {
    Trajectory traj;
    double truncated_at = -1.0; ///< >= 0 when the integration diverged
};

/// Runs `sim(t_end)`; on divergence, re-runs to the last valid grid time so
/// the partial prefix (identical on the fixed grid) can still be written.
template <typename F>
[[nodiscard]] SimResult run_guarded(const F& sim, double t_end, const StateVector& stacked_init) {
    SimResult r;
    try {
        r.traj = sim(t_end);
        return r;
    } catch (const DivergenceError& e) {
        r.truncated_at = std::max(0.0, e.last_valid_time());
    }
    if (r.truncated_at > 0.0) {
        r.traj = sim(r.truncated_at);
    } else {
        r.traj.times = {0.0};
        r.traj.states = {stacked_init};
        r.traj.inputs = {0.0};
    }
    return r;
}

void write_outputs(std::ostream& out, const RunConfig& cfg, const std::string& name,
                   const TwoTimescaleSystem& sys, const SimResult& sim,
                   const output::CsvOptions& opts_in) {
    const std::string dir = resolve_out_dir(cfg);
    ensure_dir(dir);
    output::CsvOptions opts = opts_in;
    opts.n = sys.n;
    opts.m = sys.m;
    opts.truncated_at = sim.truncated_at;
    const std::string csv_path = dir + "/" + name + "_traj.csv";
    output::write_csv_file(csv_path, sim.traj, opts);
    out << "  wrote " << csv_path << "\n";

    if (cfg.svg) {
        std::vector<output::SvgSeries> series;
        for (std::size_t i = 0; i < sys.n; ++i) {
            output::SvgSeries s;
            s.label = "x" + std::to_string(i + 1);
            for (const auto& st : sim.traj.states) s.values.push_back(st[i]);
            series.push_back(std::move(s));
        }
        for (std::size_t j = 0; j < sys.m; ++j) {
            output::SvgSeries s;
            s.label = "z" + std::to_string(j + 1);
            for (const auto& st : sim.traj.states) s.values.push_back(st[sys.n + j]);
            series.push_back(std::move(s));
        }
        const std::string svg_path = dir + "/" + name + "_traj.svg";
        output::write_svg_file(svg_path, name + " trajectory", sim.traj.times, series);
        out << "  wrote " << svg_path << "\n";
    }
}

// =============================================================================
// simulate
// =============================================================================

[[nodiscard]] int simulate_standard(const RunConfig& cfg, std::ostream& out, const Source& src) {
    const double mu = effective_mu(cfg, src);
    StandardModel mdl = load_standard(src, mu);
    const TwoTimescaleSystem& sys = mdl.design ? mdl.design->system : mdl.system;

    const StateVector stacked = initial_state(cfg, src, sys);
    StateVector x0, z0;
    split_state(sys, stacked, x0, z0);

    const double t_end = cfg.t_end > 0.0
                             ? cfg.t_end
                             : (src.is_example ? registry::find(src.id).default_t_end : 10.0);
    const double dt = cfg.dt > 0.0 ? cfg.dt : sys.mu / 100.0;

    out << "simulate " << src.name << " (mu = " << tag(sys.mu) << ", dt = " << tag(dt)
        << ", t_end = " << tag(t_end) << ")\n";
    if (!mdl.note.empty()) out << "  note: " << mdl.note << "\n";

    output::CsvOptions opts;
    Envelopes env;
    if (mdl.design) {
        const BoundSet bounds = composite::estimate_constants(*mdl.design,
                                                              effective_per_axis(cfg, 21));
        StateVector zds0 = mdl.design->manifold(x0);
        for (std::size_t j = 0; j < zds0.size(); ++j) zds0[j] = z0[j] - zds0[j];
        env = standard_envelopes(bounds, 0.0, norm(zds0));
        if (env.fast_ok) opts.fast_bound = env.fast.at;
        if (env.slow_attempted && env.slow.has_curve()) opts.slow_bound = env.slow.at;
    }

    SimResult sim;
    if (mdl.design) {
        const auto design = std::make_shared<composite::StandardDesign>(*mdl.design);
        sim = run_guarded(
            [design, x0, z0, dt](double te) {
                return composite::simulate_closed_loop(*design, x0, z0, te, dt);
            },
            t_end, stacked);
    } else {
        // Bare system: integrate the coupled field under the available input.
        auto input = mdl.input;
        auto system = std::make_shared<TwoTimescaleSystem>(sys);
        const auto field = [system, input](double, const StateVector& s) {
            StateVector x, z;
            split_state(*system, s, x, z);
            const double u = input(x, z);
            StateVector dx = system->f(x, z, u);
            if (system->m > 0) {
                const StateVector dz = system->g(x, z, system->mu, u);
                for (double v : dz) dx.push_back(v / system->mu);
            }
            return dx;
        };
        sim = run_guarded(
            [&, system, input](double te) {
                Trajectory traj = numerics::rk4_integrate(field, stacked, 0.0, te, dt);
                traj.inputs.clear();
                for (const auto& s : traj.states) {
                    StateVector x, z;
                    split_state(*system, s, x, z);
                    traj.inputs.push_back(input(x, z));
                }
                return traj;
            },
            t_end, stacked);
    }

    out << "  samples = " << sim.traj.size()
        << ", final state = " << vec_str(sim.traj.states.back()) << "\n";

    if (mdl.design && env.fast_ok && sim.truncated_at < 0.0) {
        const auto errors = fast_error_series(*mdl.design, sim.traj);
        const auto c = check_containment(sim.traj.times, errors, env.fast.at);
        out << "  fast envelope: " << (c.contained ? "contained" : "VIOLATED")
            << " (max error = " << fmt6(c.max_error)
            << ", min margin = " << fmt6(c.min_margin) << " at t = " << fmt6(c.worst_time)
            << ")\n";
    } else if (mdl.design && !env.fast_ok) {
        out << "  fast envelope: not certified (" << env.fast_reason << ")\n";
    }
    if (mdl.design && env.slow_attempted && !env.slow.has_curve()) {
        out << "  slow envelope: curve withheld (" << env.slow_reason << ")\n";
    }

    write_outputs(out, cfg, src.name, sys, sim, opts);
    if (sim.truncated_at >= 0.0) {
        out << "  integration diverged after t = " << fmt6(sim.truncated_at)
            << "; wrote the valid prefix\n";
        return 3;
    }
    return 0;
}

[[nodiscard]] int simulate_tracking_cmd(const RunConfig& cfg, std::ostream& out,
                                        const Source& src) {
    const auto& info = registry::find(src.id);
    const double mu = cfg.mu > 0.0 ? cfg.mu : info.default_mu;
    auto design = registry::make_tracking(mu);
    const TwoTimescaleSystem& sys = design.system;

    const StateVector stacked = initial_state(cfg, src, sys);
    StateVector x0, z0;
    split_state(sys, stacked, x0, z0);

    const double t_end = cfg.t_end > 0.0 ? cfg.t_end : info.default_t_end;
    const double dt = cfg.dt > 0.0 ? cfg.dt : mu / 100.0;

    out << "simulate nonstandard (mu = " << tag(mu) << ", dt = " << tag(dt)
        << ", t_end = " << tag(t_end) << ")\n";

    const BoundSet bounds =
        nonstandard::estimate_tracking_constants(design, effective_per_axis(cfg, 21));

    // Initial fast error: e_z(0) = z(0) - z_de(e(0), 0).
    StateVector e0 = x0;
    const StateVector xr0 = design.x_ref(0.0);
    for (std::size_t i = 0; i < e0.size(); ++i) e0[i] -= xr0[i];
    StateVector ez0 = z0;
    const StateVector zde0 = design.virtual_manifold(e0, 0.0);
    for (std::size_t j = 0; j < ez0.size(); ++j) ez0[j] -= zde0[j];

    composite::BoundCurve fast;
    bool fast_ok = false;
    std::string fast_reason;
    try {
        fast = nonstandard::tracking_fast_bound(bounds, norm(ez0));
        fast_ok = true;
    } catch (const NotApplicableError& e) {
        fast_reason = e.what();
    }

    const auto shared = std::make_shared<nonstandard::NonstandardDesign>(design);
    nonstandard::TrackingRun run;
    SimResult sim;
    bool have_run = false;
    sim = run_guarded(
        [shared, x0, z0, dt, &run, &have_run](double te) {
            run = nonstandard::simulate_tracking(*shared, x0, z0, te, dt);
            have_run = true;
            return run.trajectory;
        },
        t_end, stacked);

    out << "  samples = " << sim.traj.size()
        << ", final state = " << vec_str(sim.traj.states.back()) << "\n";

    output::CsvOptions opts;
    if (fast_ok) opts.fast_bound = fast.at;

    if (have_run && sim.truncated_at < 0.0) {
        out << "  steady tracking error ||e|| = " << fmt6(run.steady_error)
            << " (window from t = " << fmt6(run.window_start) << ")\n";
        try {
            const auto limit = nonstandard::tracking_slow_limit(bounds);
            out << "  tracking limit = " << fmt6(limit.value) << "\n";
        } catch (const NotApplicableError& e) {
            out << "  tracking limit: not certified (" << e.what() << ")\n";
        }
        if (fast_ok) {
            const auto series = nonstandard::tracking_error_series(*shared, sim.traj);
            std::vector<double> ez_errors;
            ez_errors.reserve(series.size());
            for (const auto& p : series) ez_errors.push_back(p.second);
            const auto c = check_containment(sim.traj.times, ez_errors, fast.at);
            out << "  fast envelope: " << (c.contained ? "contained" : "VIOLATED")
                << " (max error = " << fmt6(c.max_error)
                << ", min margin = " << fmt6(c.min_margin) << " at t = " << fmt6(c.worst_time)
                << ")\n";
        } else {
            out << "  fast envelope: not certified (" << fast_reason << ")\n";
        }
    }

    write_outputs(out, cfg, src.name, sys, sim, opts);
    if (sim.truncated_at >= 0.0) {
        out << "  integration diverged after t = " << fmt6(sim.truncated_at)
            << "; wrote the valid prefix\n";
        return 3;
    }
    return 0;
}

[[nodiscard]] int simulate_highgain_cmd(const RunConfig& cfg, std::ostream& out,
                                        const Source& src) {
    const auto& info = registry::find(src.id);
    const double k = effective_k(cfg);
    const auto setup = registry::make_highgain(k);
    const TwoTimescaleSystem sys = registry::make_system("highgain", 1.0);

    const StateVector stacked = initial_state(cfg, src, sys);
    const double x0 = stacked[0];
    const StateVector z0(stacked.begin() + 1, stacked.end());

    const double t_end = cfg.t_end > 0.0 ? cfg.t_end : info.default_t_end;
    const double dt = cfg.dt > 0.0 ? cfg.dt : setup.design.mu / 100.0;

    out << "simulate highgain (k = " << tag(k) << ", dt = " << tag(dt)
        << ", t_end = " << tag(t_end);
    if (cfg.saturation > 0.0) out << ", saturation = " << tag(cfg.saturation);
    out << ")\n";

    const auto chain = std::make_shared<highgain::StrictFeedbackChain>(setup.chain);
    const auto design = std::make_shared<highgain::HighGainDesign>(setup.design);
    highgain::HighGainRun run;
    bool have_run = false;
    const double sat = cfg.saturation;
    SimResult sim = run_guarded(
        [chain, design, x0, z0, dt, sat, &run, &have_run](double te) {
            run = highgain::simulate_highgain(*chain, *design, x0, z0, te, dt, sat);
            have_run = true;
            return run.trajectory;
        },
        t_end, stacked);

    out << "  samples = " << sim.traj.size()
        << ", final state = " << vec_str(sim.traj.states.back()) << "\n";

    if (have_run && sim.truncated_at < 0.0) {
        out << "  steady scaled error = " << fmt6(run.steady_error) << " (window from t = "
            << fmt6(run.window_start) << ")\n";
        try {
            const auto constants = highgain::estimate_highgain_constants(setup.chain,
                                                                         setup.design);
            const double bound = highgain::steady_state_bound(constants, setup.design);
            out << "  steady-state bound = " << fmt6(bound) << " ("
                << (run.steady_error <= bound ? "satisfied" : "VIOLATED") << ")\n";
        } catch (const NotApplicableError& e) {
            out << "  steady-state bound: not certified (" << e.what() << ")\n";
        }
    }

    write_outputs(out, cfg, src.name, sys, sim, output::CsvOptions{});
    if (sim.truncated_at >= 0.0) {
        out << "  integration diverged after t = " << fmt6(sim.truncated_at)
            << "; wrote the valid prefix\n";
        return 3;
    }
    return 0;
}

// =============================================================================
// bounds
// =============================================================================

[[nodiscard]] int bounds_standard(const RunConfig& cfg, std::ostream& out, const Source& src) {
    const int per = effective_per_axis(cfg, 21);

    const auto describe = [&](double mu) -> std::pair<BoundSet, Envelopes> {
        StandardModel mdl = load_standard(src, mu);
        if (!mdl.design) {
            throw InputError("bounds needs a full design (control + manifold); " + mdl.note);
        }
        const BoundSet bounds = composite::estimate_constants(*mdl.design, per);
        const StateVector stacked = initial_state(cfg, src, mdl.design->system);
        StateVector x0, z0;
        split_state(mdl.design->system, stacked, x0, z0);
        StateVector diff = mdl.design->manifold(x0);
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = z0[j] - diff[j];
        return {bounds, standard_envelopes(bounds, 0.0, norm(diff))};
    };

    const double mu = effective_mu(cfg, src);
    const auto [bounds, env] = describe(mu > 0.0 ? mu : -1.0);
    out << "bounds " << src.name << " (mu = " << tag(bounds.mu) << ", grid " << per
        << " per axis)\n";
    print_bound_table(out, bounds);
    print_envelopes(out, env);

    if (cfg.baseline) {
        if (!(src.is_example && src.id == "motivating")) {
            throw InputError("--baseline applies to the built-in 'motivating' example only");
        }
        // Interconnection constants of the example's quadratic Lyapunov pair.
        const auto base = composite::mu_max_composite_lyapunov(1.0, 2.0, 7.0 / 4.0, 4.0 / 3.0,
                                                               7.0 / 3.0);
        out << "  baseline mu_max = " << fmt6(base.mu_max) << " at d* = " << fmt6(base.d_star)
            << "\n";
        if (!base.note.empty()) out << "  baseline note: " << base.note << "\n";
    }

    if (!cfg.sweep.empty()) {
        out << "sweep over mu:\n";
        for (double mv : parse_sweep(cfg.sweep)) {
            const auto [b, e] = describe(mv);
            out << "  mu = " << tag(mv) << ": lambda_x = " << fmt6(b.lambda_x)
                << ", lambda_z = " << fmt6(b.lambda_z);
            if (e.fast_ok) out << ", fast limit = " << fmt6(e.fast.limit);
            else out << ", fast: not certified";
            if (e.slow_attempted && e.slow.has_curve()) {
                out << ", slow limit = " << fmt6(e.slow.limit);
            } else if (e.slow_attempted) {
                out << ", slow curve withheld (limit = " << fmt6(e.slow.limit) << ")";
            } else {
                out << ", slow: not certified";
            }
            out << "\n";
        }
    }
    return env.fast_ok ? 0 : 1;
}

[[nodiscard]] int bounds_tracking(const RunConfig& cfg, std::ostream& out) {
    const auto& info = registry::find("nonstandard");
    const double mu = cfg.mu > 0.0 ? cfg.mu : info.default_mu;
    const int per = effective_per_axis(cfg, 21);
    auto design = registry::make_tracking(mu);
    const BoundSet b = nonstandard::estimate_tracking_constants(design, per);

    out << "bounds nonstandard (mu = " << tag(mu) << ", grid " << per << " per axis)\n";
    out << "  lambda_e = " << fmt6(b.lambda_x) << "   chi_e = " << fmt6(b.chi_x) << "\n";
    out << "  lambda_ez = " << fmt6(b.lambda_z) << "   chi_ez = " << fmt6(b.chi_z) << "\n";
    out << "  manifold drift d_e = " << fmt6(b.d_e) << "   interconnection L_e = "
        << fmt6(b.L2) << "\n";

    const StateVector stacked = initial_state(cfg, Source{true, "nonstandard", "", "nonstandard"},
                                              design.system);
    StateVector x0, z0;
    split_state(design.system, stacked, x0, z0);
    StateVector e0 = x0;
    const StateVector xr0 = design.x_ref(0.0);
    for (std::size_t i = 0; i < e0.size(); ++i) e0[i] -= xr0[i];
    StateVector ez0 = z0;
    const StateVector zde0 = design.virtual_manifold(e0, 0.0);
    for (std::size_t j = 0; j < ez0.size(); ++j) ez0[j] -= zde0[j];

    bool certified = true;
    try {
        const auto fast = nonstandard::tracking_fast_bound(b, norm(ez0));
        out << "  fast envelope: value(0) = " << fmt6(fast.at(0.0))
            << ", limit = " << fmt6(fast.limit);
        if (!fast.note.empty()) out << "  [" << fast.note << "]";
        out << "\n";
    } catch (const NotApplicableError& e) {
        out << "  fast envelope: not certified (" << e.what() << ")\n";
        certified = false;
    }
    try {
        const auto limit = nonstandard::tracking_slow_limit(b);
        out << "  tracking limit = " << fmt6(limit.value) << "\n";
        out << "  mapping: " << limit.mapping_note << "\n";
    } catch (const NotApplicableError& e) {
        out << "  tracking limit: not certified (" << e.what() << ")\n";
        certified = false;
    }

    if (!cfg.sweep.empty()) {
        out << "sweep over mu:\n";
        for (double mv : parse_sweep(cfg.sweep)) {
            auto d = registry::make_tracking(mv);
            const BoundSet bv = nonstandard::estimate_tracking_constants(d, per);
            out << "  mu = " << tag(mv) << ": lambda_e = " << fmt6(bv.lambda_x)
                << ", lambda_ez = " << fmt6(bv.lambda_z);
            try {
                const auto lim = nonstandard::tracking_slow_limit(bv);
                out << ", tracking limit = " << fmt6(lim.value);
            } catch (const NotApplicableError&) {
                out << ", tracking limit: not certified";
            }
            out << "\n";
        }
    }
    return certified ? 0 : 1;
}

[[nodiscard]] int bounds_highgain(const RunConfig& cfg, std::ostream& out) {
    const double k = effective_k(cfg);
    const int per = effective_per_axis(cfg, 9);

    const auto describe = [&](double kv, bool verbose) -> bool {
        const auto setup = registry::make_highgain(kv);
        const auto chk = highgain::gain_condition_check(setup.chain, setup.design, per);
        print_gain_check(out, kv, chk);
        if (!chk.ok) {
            if (verbose) {
                out << "  steady-state bound: not certified (gain condition fails; raise the "
                       "gain k)\n";
            }
            return false;
        }
        const auto constants = highgain::estimate_highgain_constants(setup.chain, setup.design,
                                                                     per);
        if (verbose) {
            out << "  c4 = " << fmt6(constants.c4) << "   c5 = " << fmt6(constants.c5) << "\n";
        }
        const double bound = highgain::steady_state_bound(constants, setup.design);
        out << "  steady-state bound = " << fmt6(bound) << "\n";
        return true;
    };

    out << "bounds highgain (grid " << per << " per axis)\n";
    const bool ok = describe(k, true);

    if (!cfg.sweep.empty()) {
        out << "sweep over k:\n";
        for (double kv : parse_sweep(cfg.sweep)) describe(kv, false);
    }
    return ok ? 0 : 1;
}

} // namespace

// =============================================================================
// Public entry points
// =============================================================================

int cmd_list(std::ostream& out) {
    for (const auto& info : registry::examples()) {
        const char* kind = info.kind == registry::ExampleKind::standard ? "standard"
                           : info.kind == registry::ExampleKind::nonstandard ? "nonstandard"
                                                                             : "highgain";
        out << info.id << " (" << kind << "): " << info.description << "\n";
        out << "  defaults:";
        if (info.kind == registry::ExampleKind::highgain) {
            out << " k = " << tag(info.default_k);
        } else {
            out << " mu = " << tag(info.default_mu);
        }
        out << ", t_end = " << tag(info.default_t_end)
            << ", init = " << vec_str(info.initial_state) << "\n";
        out << "  expected: " << info.expected << "\n";
    }
    return 0;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
    const Source src = resolve_source(cfg);
    if (!cfg.subsystem.empty() && cfg.subsystem != "reduced" && cfg.subsystem != "fast" &&
        cfg.subsystem != "joint") {
        throw InputError("--sub must be one of reduced, fast, joint");
    }
    if (src.is_example) {
        const auto& info = registry::find(src.id);
        if (info.kind == registry::ExampleKind::highgain) return check_highgain(cfg, out);
        if (info.kind == registry::ExampleKind::nonstandard) return check_tracking(cfg, out);
    }
    return check_standard(cfg, out, src);
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    const Source src = resolve_source(cfg);
    if (src.is_example) {
        const auto& info = registry::find(src.id);
        if (info.kind == registry::ExampleKind::highgain) {
            return simulate_highgain_cmd(cfg, out, src);
        }
        if (info.kind == registry::ExampleKind::nonstandard) {
            return simulate_tracking_cmd(cfg, out, src);
        }
    }
    return simulate_standard(cfg, out, src);
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
    const Source src = resolve_source(cfg);
    if (src.is_example) {
        const auto& info = registry::find(src.id);
        if (info.kind == registry::ExampleKind::highgain) return bounds_highgain(cfg, out);
        if (info.kind == registry::ExampleKind::nonstandard) return bounds_tracking(cfg, out);
    }
    if (cfg.baseline && !src.is_example) {
        throw InputError("--baseline applies to the built-in 'motivating' example only");
    }
    return bounds_standard(cfg, out, src);
}

namespace {

// =============================================================================
// reproduce: the five bundled case studies
// =============================================================================

void write_summary(const std::string& dir, const std::string& text) {
    std::ofstream os(dir + "/summary.txt", std::ios::binary);
    if (!os) throw InputError("cannot open '" + dir + "/summary.txt' for writing");
    os << text;
}

/// Simulate + envelope containment for one standard example at one mu;
/// appends a summary line and writes the trajectory CSV.
void standard_case_run(std::ostringstream& summary, const std::string& dir,
                       const std::string& id, double mu, bool svg) {
    auto design = registry::make_standard(id, mu);
    const BoundSet bounds = composite::estimate_constants(design);
    const auto& info = registry::find(id);
    StateVector x0, z0;
    split_state(design.system, info.initial_state, x0, z0);
    StateVector diff = design.manifold(x0);
    for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = z0[j] - diff[j];
    const Envelopes env = standard_envelopes(bounds, 0.0, norm(diff));

    const double dt = mu / 100.0;
    const Trajectory traj =
        composite::simulate_closed_loop(design, x0, z0, info.default_t_end, dt);

    output::CsvOptions opts;
    opts.n = design.system.n;
    opts.m = design.system.m;
    if (env.fast_ok) opts.fast_bound = env.fast.at;
    if (env.slow_attempted && env.slow.has_curve()) opts.slow_bound = env.slow.at;
    const std::string base = dir + "/" + id + "_mu" + tag(mu);
    output::write_csv_file(base + ".csv", traj, opts);
    if (svg) {
        std::vector<output::SvgSeries> series(2);
        series[0].label = "x1";
        series[1].label = "z1";
        for (const auto& s : traj.states) {
            series[0].values.push_back(s[0]);
            series[1].values.push_back(s[1]);
        }
        output::write_svg_file(base + ".svg", id + " (mu = " + tag(mu) + ")", traj.times,
                               series);
    }

    summary << "mu = " << tag(mu) << ": lambda_x = " << fmt6(bounds.lambda_x)
            << ", lambda_z = " << fmt6(bounds.lambda_z);
    if (env.fast_ok) {
        const auto errors = fast_error_series(design, traj);
        const auto c = check_containment(traj.times, errors, env.fast.at);
        summary << "; fast envelope " << (c.contained ? "contained" : "VIOLATED")
                << " (max error = " << fmt6(c.max_error)
                << ", min margin = " << fmt6(c.min_margin) << ")";
    } else {
        summary << "; fast envelope not certified";
    }
    if (env.slow_attempted && env.slow.has_curve()) {
        summary << "; slow limit = " << fmt6(env.slow.limit);
    } else if (env.slow_attempted) {
        summary << "; slow curve withheld (limit = " << fmt6(env.slow.limit) << ")";
    } else {
        summary << "; slow envelope not certified";
    }
    summary << "\n";
}

void case_standard(std::ostream& out, const std::string& root, int index,
                   const std::string& id) {
    const std::string dir = root + "/case-" + std::to_string(index);
    ensure_dir(dir);
    std::ostringstream summary;
    summary << "case-" << index << ": composite design for the '" << id << "' example\n\n";

    // Verdicts at the default ratio.
    const auto& info = registry::find(id);
    auto design = registry::make_standard(id, info.default_mu);
    const auto shared = std::make_shared<composite::StandardDesign>(design);
    const numerics::VectorField reduced = [shared](const StateVector& x) {
        return shared->system.f(x, shared->manifold(x), shared->control.u1(x));
    };
    const auto slow_rep = contraction::check_region(reduced, design.system.slow_region,
                                                    design.metric_x);
    const auto fast_field = [shared](const StateVector& z, const StateVector& x) {
        return shared->system.g(x, z, shared->system.mu, shared->input_at(x, z));
    };
    const auto fast_rep = contraction::partial_contraction_check(
        fast_field, design.system.fast_region, design.system.slow_region, design.metric_z);
    summary << "reduced: " << contraction::to_string(slow_rep.verdict)
            << " (rate = " << fmt6(slow_rep.rate) << ")\n";
    summary << "fast: " << contraction::to_string(fast_rep.verdict)
            << " (rate = " << fmt6(fast_rep.rate) << ")\n\n";

    for (double mu : {0.05, 0.1, 0.2, 0.5}) {
        standard_case_run(summary, dir, id, mu, mu == 0.1);
    }
    write_summary(dir, summary.str());
    out << "case-" << index << " (" << id << "): done\n";
}

void case_baseline(std::ostream& out, const std::string& root) {
    const std::string dir = root + "/case-3";
    ensure_dir(dir);
    const auto base =
        composite::mu_max_composite_lyapunov(1.0, 2.0, 7.0 / 4.0, 4.0 / 3.0, 7.0 / 3.0);

    // The weighted-Lyapunov estimate mu(d) over the open unit interval.
    std::vector<double> ds, mus;
    for (int i = 1; i <= 99; ++i) {
        const double d = static_cast<double>(i) / 100.0;
        const double denom = 1.0 * (7.0 / 3.0) +
                             std::pow((1.0 - d) * (7.0 / 4.0) + d * (4.0 / 3.0), 2) /
                                 (4.0 * d * (1.0 - d));
        ds.push_back(d);
        mus.push_back(1.0 * 2.0 / denom);
    }
    std::ofstream csv(dir + "/baseline_curve.csv", std::ios::binary);
    if (!csv) throw InputError("cannot open '" + dir + "/baseline_curve.csv' for writing");
    csv << "d,mu\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        csv << output::g17(ds[i]) << "," << output::g17(mus[i]) << "\n";
    }
    output::SvgSeries series;
    series.label = "mu(d)";
    series.values = mus;
    output::write_svg_file(dir + "/baseline_curve.svg", "weighted Lyapunov estimate", ds,
                           {series});

    std::ostringstream summary;
    summary << "case-3: composite Lyapunov baseline for the motivating example\n\n";
    summary << "mu_max = " << fmt6(base.mu_max) << " at d* = " << fmt6(base.d_star) << "\n";
    if (!base.note.empty()) summary << "note: " << base.note << "\n";
    write_summary(dir, summary.str());
    out << "case-3 (baseline): done\n";
}

void case_tracking(std::ostream& out, const std::string& root) {
    const std::string dir = root + "/case-4";
    ensure_dir(dir);
    std::ostringstream summary;
    summary << "case-4: tracking design for the 'nonstandard' example\n\n";

    const auto& info = registry::find("nonstandard");
    StateVector x0{info.initial_state[0]}, z0{info.initial_state[1]};

    for (double mu : {0.05, 0.1, 0.2}) {
        auto design = registry::make_tracking(mu);
        const BoundSet b = nonstandard::estimate_tracking_constants(design);
        const auto run =
            nonstandard::simulate_tracking(design, x0, z0, info.default_t_end, mu / 100.0);

        StateVector ez0 = z0;
        const StateVector zde0 = design.virtual_manifold(x0, 0.0);
        for (std::size_t j = 0; j < ez0.size(); ++j) ez0[j] -= zde0[j];
        const auto fast = nonstandard::tracking_fast_bound(b, norm(ez0));
        const auto limit = nonstandard::tracking_slow_limit(b);

        const auto series = nonstandard::tracking_error_series(design, run.trajectory);
        std::vector<double> ez_errors;
        for (const auto& p : series) ez_errors.push_back(p.second);
        const auto c = check_containment(run.trajectory.times, ez_errors, fast.at);

        output::CsvOptions opts;
        opts.n = 1;
        opts.m = 1;
        opts.fast_bound = fast.at;
        const std::string base = dir + "/nonstandard_mu" + tag(mu);
        output::write_csv_file(base + ".csv", run.trajectory, opts);
        if (mu == 0.1) {
            std::vector<output::SvgSeries> svg(2);
            svg[0].label = "x1";
            svg[1].label = "z1";
            for (const auto& s : run.trajectory.states) {
                svg[0].values.push_back(s[0]);
                svg[1].values.push_back(s[1]);
            }
            output::write_svg_file(base + ".svg", "nonstandard (mu = " + tag(mu) + ")",
                                   run.trajectory.times, svg);
        }

        summary << "mu = " << tag(mu) << ": steady error = " << fmt6(run.steady_error)
                << ", tracking limit = " << fmt6(limit.value) << ", fast envelope "
                << (c.contained ? "contained" : "VIOLATED")
                << " (min margin = " << fmt6(c.min_margin) << ")\n";
        if (mu == 0.1) summary << "mapping: " << limit.mapping_note << "\n";
    }
    write_summary(dir, summary.str());
    out << "case-4 (nonstandard): done\n";
}

void case_highgain(std::ostream& out, const std::string& root) {
    const std::string dir = root + "/case-5";
    ensure_dir(dir);
    std::ostringstream summary;
    summary << "case-5: high-gain design for the strict-feedback chain\n\n";

    const auto& info = registry::find("highgain");
    const double x0 = info.initial_state[0];
    const StateVector z0{info.initial_state[1], info.initial_state[2]};

    for (double k : {2.0, 4.5, 10.0}) {
        const auto setup = registry::make_highgain(k);
        const auto chk = highgain::gain_condition_check(setup.chain, setup.design);
        summary << "k = " << tag(k) << ": threshold = " << fmt6(chk.threshold)
                << ", sup = " << fmt6(chk.jac_sup) << ", margin = " << fmt6(chk.margin)
                << ", gain condition " << (chk.ok ? "satisfied" : "VIOLATED");
        if (!chk.ok) {
            summary << " (no steady-state bound; raise the gain k)\n";
            continue;
        }
        const auto constants = highgain::estimate_highgain_constants(setup.chain, setup.design);
        const double bound = highgain::steady_state_bound(constants, setup.design);
        const auto run = highgain::simulate_highgain(setup.chain, setup.design, x0, z0,
                                                     info.default_t_end,
                                                     setup.design.mu / 100.0);
        summary << ", bound = " << fmt6(bound)
                << ", steady scaled error = " << fmt6(run.steady_error)
                << (run.steady_error <= bound ? " (within bound)" : " (VIOLATED)") << "\n";

        output::CsvOptions opts;
        opts.n = 1;
        opts.m = 2;
        const std::string base = dir + "/highgain_k" + tag(k);
        output::write_csv_file(base + ".csv", run.trajectory, opts);
        if (k == 4.5) {
            std::vector<output::SvgSeries> svg(3);
            svg[0].label = "x1";
            svg[1].label = "z1";
            svg[2].label = "z2";
            for (const auto& s : run.trajectory.states) {
                svg[0].values.push_back(s[0]);
                svg[1].values.push_back(s[1]);
                svg[2].values.push_back(s[2]);
            }
            output::write_svg_file(base + ".svg", "highgain (k = " + tag(k) + ")",
                                   run.trajectory.times, svg);
        }
    }
    write_summary(dir, summary.str());
    out << "case-5 (highgain): done\n";
}

} // namespace

int cmd_reproduce(const RunConfig& cfg, std::ostream& out) {
    const std::string root = resolve_out_dir(cfg);
    ensure_dir(root);
    case_standard(out, root, 1, "motivating");
    case_standard(out, root, 2, "dcmotor");
    case_baseline(out, root);
    case_tracking(out, root);
    case_highgain(out, root);
    out << "reproduce: wrote case-1 .. case-5 under " << root << "\n";
    return 0;
}

int dispatch(const std::string& command, const RunConfig& cfg, std::ostream& out,
             std::ostream& err) {
    try {
        if (command == "list") return cmd_list(out);
        if (command == "check") return cmd_check(cfg, out);
        if (command == "simulate") return cmd_simulate(cfg, out);
        if (command == "bounds") return cmd_bounds(cfg, out);
        if (command == "reproduce") return cmd_reproduce(cfg, out);
        throw InputError("unknown command '" + command +
                         "' (expected list, check, simulate, bounds, or reproduce)");
    } catch (const DivergenceError& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace contrakit::cli
