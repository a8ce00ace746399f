// =============================================================================
// contrakit - Acceptance Suite
// =============================================================================
// End-to-end checks that the shipped designs and analysis pipeline deliver
// what the library promises: certified thresholds come out at their published
// values, closed-loop runs settle where the envelopes say they must, random
// linear systems are certified (or refused) correctly, and the definition-file
// front end agrees with the native examples to the last bit.
//
// Usage:  acceptance        runs every criterion
//         acceptance N      runs criterion N only (1..10)
//
// Each criterion prints one [PASS]/[FAIL] line followed by indented clause
// details. The exit code is 0 only when every executed criterion passes.
// =============================================================================

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "contrakit/composite.hpp"
#include "contrakit/contraction.hpp"
#include "contrakit/errors.hpp"
#include "contrakit/highgain.hpp"
#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"
#include "contrakit/nonstandard.hpp"
#include "contrakit/numerics.hpp"
#include "contrakit/registry.hpp"
#include "contrakit/sysdsl.hpp"

namespace {

using namespace contrakit;

// ---------------------------------------------------------------------------
// Reporting scaffolding
// ---------------------------------------------------------------------------

struct Result {
    bool pass = true;
    std::vector<std::string> clauses;

    void clause(bool ok, const std::string& text) {
        pass = pass && ok;
        clauses.push_back(std::string(ok ? "  - ok    " : "  - FAILED") + "  " + text);
    }

    void note(const std::string& text) { clauses.push_back("  - note    " + text); }
};

[[nodiscard]] std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

[[nodiscard]] std::string data_file(const std::string& name) {
    return std::string(CONTRAKIT_TEST_DATA_DIR) + "/" + name;
}

// ---------------------------------------------------------------------------
// Criterion 1: the composite Lyapunov baseline reproduces its published
// threshold value and maximizing weight.
// ---------------------------------------------------------------------------

void criterion_1(Result& r) {
    const auto base =
        composite::mu_max_composite_lyapunov(1.0, 2.0, 7.0 / 4.0, 4.0 / 3.0, 7.0 / 3.0);
    r.clause(std::abs(base.mu_max - 0.4246) <= 5e-3,
             "mu_max = " + fmt(base.mu_max) + " within 0.005 of 0.4246");
    r.clause(std::abs(base.d_star - 21.0 / 47.0) <= 1e-2,
             "d* = " + fmt(base.d_star) + " within 0.01 of " + fmt(21.0 / 47.0));
}

// ---------------------------------------------------------------------------
// Criterion 2: the motivating plant, run well above its conservative
// threshold at mu = 0.5, still settles near the origin.
// ---------------------------------------------------------------------------

void criterion_2(Result& r) {
    const double mu = 0.5;
    const auto design = registry::make_standard("motivating", mu);
    const auto traj =
        composite::simulate_closed_loop(design, {0.9}, {0.4}, 40.0, mu / 100.0);
    double worst = 0.0;
    double worst_t = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.times[i] < 20.0) continue;
        const double v = norm(traj.states[i]);
        if (v > worst) {
            worst = v;
            worst_t = traj.times[i];
        }
    }
    r.clause(worst <= 0.05, "sup ||(x, z)(t)|| over t in [20, 40] = " + fmt(worst) +
                                " (at t = " + fmt(worst_t) + ") <= 0.05");
}

// ---------------------------------------------------------------------------
// Criterion 3: the DC motor holds its speed within 1% of the setpoint after
// the startup transient, at both timescale ratios.
// ---------------------------------------------------------------------------

void criterion_3(Result& r) {
    for (const double mu : {0.1, 0.02}) {
        const auto design = registry::make_standard("dcmotor", mu);
        const auto traj =
            composite::simulate_closed_loop(design, {0.0}, {0.0}, 5.0, mu / 100.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (traj.times[i] < 2.0) continue;
            worst = std::max(worst, std::abs(traj.states[i][0] - 1.0));
        }
        r.clause(worst <= 0.01, "mu = " + fmt(mu) + ": sup |x(t) - 1| for t >= 2 is " +
                                    fmt(worst) + " <= 0.01");
    }
}

// ---------------------------------------------------------------------------
// Criterion 4: the tracking loop stays bounded, lands inside its steady
// budget at mu = 0.2, and its steady error grows with the timescale ratio.
// ---------------------------------------------------------------------------

void criterion_4(Result& r) {
    const std::vector<double> mus{0.05, 0.1, 0.2};
    std::vector<double> steady;
    bool bounded = true;
    double sup_state = 0.0;
    for (const double mu : mus) {
        const auto design = registry::make_tracking(mu);
        const auto run =
            nonstandard::simulate_tracking(design, {0.5}, {0.0}, 20.0, mu / 100.0);
        for (const auto& s : run.trajectory.states) sup_state = std::max(sup_state, norm(s));
        bounded = bounded && sup_state <= 10.0;
        steady.push_back(run.steady_error);
    }
    r.clause(bounded, "states stay bounded (sup norm = " + fmt(sup_state) + " <= 10)");

    auto budget_design = registry::make_tracking(0.2);
    const BoundSet bounds = nonstandard::estimate_tracking_constants(budget_design, 21);
    const double budget = 0.5 * 0.2 * (bounds.d_e * bounds.chi_z / bounds.lambda_z) + 0.05;
    r.clause(steady[2] <= budget, "steady error at mu = 0.2 is " + fmt(steady[2]) +
                                      " within budget " + fmt(budget));

    r.clause(steady[0] < steady[1] && steady[1] < steady[2],
             "steady error increases with mu: " + fmt(steady[0]) + " < " + fmt(steady[1]) +
                 " < " + fmt(steady[2]));
}

// ---------------------------------------------------------------------------
// Criterion 5: the high-gain loop converges at both shipped gains, a higher
// gain tightens the steady scaled error, and an input clamp at 5 engages
// without destroying convergence.
// ---------------------------------------------------------------------------

void criterion_5(Result& r) {
    const auto s10 = registry::make_highgain(10.0);
    const auto s45 = registry::make_highgain(4.5);
    const auto run10 =
        highgain::simulate_highgain(s10.chain, s10.design, -1.0, {1.0, 0.0}, 10.0, 1e-3);
    const auto run45 =
        highgain::simulate_highgain(s45.chain, s45.design, -1.0, {1.0, 0.0}, 10.0, 1e-3);
    const double end10 = norm(run10.trajectory.states.back());
    const double end45 = norm(run45.trajectory.states.back());
    r.clause(end10 <= 1e-2, "k = 10 converges: final ||(x, z)|| = " + fmt(end10));
    r.clause(end45 <= 1e-2, "k = 4.5 converges: final ||(x, z)|| = " + fmt(end45));
    r.clause(run10.steady_error < run45.steady_error,
             "steady scaled error shrinks as k rises: " + fmt(run10.steady_error) +
                 " (k = 10) < " + fmt(run45.steady_error) + " (k = 4.5)");

    const auto sat =
        highgain::simulate_highgain(s10.chain, s10.design, -1.0, {1.0, 0.0}, 10.0, 1e-3, 5.0);
    double max_u = 0.0;
    for (const double u : sat.trajectory.inputs) max_u = std::max(max_u, std::abs(u));
    r.clause(max_u <= 5.0 + 1e-12 && std::abs(max_u - 5.0) <= 1e-9,
             "clamped input peaks exactly at the 5.0 limit (max |u| = " + fmt(max_u) + ")");
    const double end_sat = norm(sat.trajectory.states.back());
    r.clause(end_sat <= 1e-2, "saturated run still converges: final ||(x, z)|| = " + fmt(end_sat));
}

// ---------------------------------------------------------------------------
// Criterion 6: simulated fast errors stay inside the certified fast envelope
// at every recorded step, across both standard examples and a grid of
// timescale ratios; the slow envelope is checked wherever it is certified.
// A 1% slack absorbs integration and estimation error.
// ---------------------------------------------------------------------------

void criterion_6(Result& r) {
    for (const std::string id : {"motivating", "dcmotor"}) {
        const auto& info = registry::find(id);
        for (const double mu : {0.05, 0.1, 0.2, 0.5}) {
            auto design = registry::make_standard(id, mu);
            composite::estimate_constants(design, 21);
            const StateVector x0{info.initial_state[0]};
            const StateVector z0{info.initial_state[1]};
            const double dt = mu / 100.0;
            const auto traj =
                composite::simulate_closed_loop(design, x0, z0, info.default_t_end, dt);
            const auto zds = composite::manifold_series(design, traj);

            const double z0_err = std::abs(z0[0] - zds[0][0]);
            const auto fast = composite::fast_error_bound(design.bounds, z0_err);
            double worst_excess = -kInfinity;
            bool contained = true;
            for (std::size_t i = 0; i < traj.size(); ++i) {
                const double err = std::abs(traj.states[i][1] - zds[i][0]);
                const double cap = 1.01 * fast.at(traj.times[i]) + 1e-12;
                worst_excess = std::max(worst_excess, err - cap);
                contained = contained && err <= cap;
            }
            r.clause(contained, id + " mu = " + fmt(mu) +
                                    ": fast error inside envelope (worst margin " +
                                    fmt(-worst_excess) + ")");

            // Slow envelope, wherever the separation condition certifies one.
            try {
                const auto slow = composite::slow_error_bound(design.bounds, 0.0, z0_err);
                if (!slow.has_curve()) {
                    r.note(id + " mu = " + fmt(mu) + ": slow envelope withheld (" + slow.note +
                           ")");
                    continue;
                }
                const auto reduced =
                    composite::reduced_trajectory(design, x0, info.default_t_end, dt);
                const std::size_t count = std::min(traj.size(), reduced.size());
                bool slow_ok = true;
                double slow_excess = -kInfinity;
                for (std::size_t i = 0; i < count; ++i) {
                    const double err = std::abs(traj.states[i][0] - reduced.states[i][0]);
                    const double cap = 1.01 * slow.at(traj.times[i]) + 1e-12;
                    slow_excess = std::max(slow_excess, err - cap);
                    slow_ok = slow_ok && err <= cap;
                }
                r.clause(slow_ok, id + " mu = " + fmt(mu) +
                                      ": slow error inside envelope (worst margin " +
                                      fmt(-slow_excess) + ")");
            } catch (const NotApplicableError&) {
                r.note(id + " mu = " + fmt(mu) + ": slow envelope not certified; skipped");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 7: for random Hurwitz matrices the Lyapunov-equation metric
// certifies contraction at exactly the predicted rate; matrices with an
// unstable symmetric part are refused under the identity metric.
// ---------------------------------------------------------------------------

void criterion_7(Result& r) {
    std::mt19937_64 rng(0xacc3557ULL);
    std::uniform_real_distribution<double> entry(-2.0, 2.0);

    const auto random_matrix = [&](std::size_t n) {
        Matrix A(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) A(i, j) = entry(rng);
        return A;
    };

    int certified = 0;
    double worst_rate_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 2);
        Matrix A = random_matrix(n);
        while (!numerics::is_hurwitz(A)) A = random_matrix(n);

        const Matrix P = numerics::lyapunov_solve(A, Matrix::identity(n));
        const auto eig = numerics::sym_eig(P);
        const double p_max = *std::max_element(eig.values.begin(), eig.values.end());
        const double expected_rate = 1.0 / (2.0 * p_max);

        const numerics::VectorField field = [A](const StateVector& p) { return A.apply(p); };
        const BoxRegion region{StateVector(n, -1.0), StateVector(n, 1.0)};
        const auto report =
            contraction::check_region(field, region, contraction::Metric::from_m(P), 3);
        const double rate_err = std::abs(report.rate - expected_rate);
        worst_rate_err = std::max(worst_rate_err, rate_err);
        if (report.verdict == contraction::Verdict::contracting && rate_err <= 1e-6) ++certified;
    }
    r.clause(certified == 100, "100/100 Hurwitz systems certified under P from A^T P + P A = -I "
                               "(worst rate error " +
                                   fmt(worst_rate_err) + " <= 1e-6)");

    int refused = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(trial % 2);
        Matrix A = random_matrix(n);
        while (numerics::max_sym_eigenvalue(A) <= 0.05) A = random_matrix(n);

        const numerics::VectorField field = [A](const StateVector& p) { return A.apply(p); };
        const BoxRegion region{StateVector(n, -1.0), StateVector(n, 1.0)};
        const auto report = contraction::check_region(
            field, region, contraction::Metric::identity(n), 3);
        if (report.verdict == contraction::Verdict::not_contracting) ++refused;
    }
    r.clause(refused == 100,
             "100/100 systems with an unstable symmetric part refused under the identity metric");
}

// ---------------------------------------------------------------------------
// Criterion 8: a contracting scalar system under a constant disturbance
// settles inside the certified offset bound chi * d / lambda (5% slack).
// ---------------------------------------------------------------------------

void criterion_8(Result& r) {
    const numerics::VectorField nominal = [](const StateVector& p) {
        return StateVector{-p[0]};
    };
    const BoxRegion region{{-2.0}, {2.0}};
    const auto report =
        contraction::check_region(nominal, region, contraction::Metric::identity(1), 3);

    for (const double d : {0.1, 0.5}) {
        const double bound = contraction::robustness_bound(report.metric_chi, d, report.rate);
        const auto traj = numerics::rk4_integrate(
            [d](double, const StateVector& p) { return StateVector{-p[0] + d}; }, {1.0}, 0.0,
            20.0, 1e-3);
        double limsup = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (traj.times[i] < 15.0) continue;
            limsup = std::max(limsup, std::abs(traj.states[i][0]));
        }
        r.clause(limsup <= 1.05 * bound, "d = " + fmt(d) + ": settled offset " + fmt(limsup) +
                                             " <= 1.05 * bound (" + fmt(1.05 * bound) + ")");
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: numeric kernels hold their advertised accuracy — integrator
// order, eigensolver reconstruction, gain scaling round-trip, Newton root
// residual, and exact backstepping cancellation on the nominal chain.
// ---------------------------------------------------------------------------

void criterion_9(Result& r) {
    // Fourth-order convergence: halving dt divides the error by ~16.
    const numerics::TimeField decay = [](double, const StateVector& p) {
        return StateVector{-p[0]};
    };
    const double exact = std::exp(-5.0);
    const double err_coarse =
        std::abs(numerics::rk4_integrate(decay, {1.0}, 0.0, 5.0, 0.1).states.back()[0] - exact);
    const double err_fine =
        std::abs(numerics::rk4_integrate(decay, {1.0}, 0.0, 5.0, 0.05).states.back()[0] - exact);
    const double ratio = err_coarse / err_fine;
    r.clause(ratio >= 14.0 && ratio <= 18.0,
             "integrator error ratio at dt halving = " + fmt(ratio) + " in [14, 18]");

    // Eigensolver: Q Lambda Q^T reconstructs a random symmetric matrix.
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    Matrix S(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = i; j < 5; ++j) S(i, j) = S(j, i) = entry(rng);
    const auto eig = numerics::sym_eig(S);
    const Matrix recon =
        eig.vectors * Matrix::diagonal(eig.values) * eig.vectors.transpose();
    const double recon_err = (recon - S).max_abs();
    const double ortho_err =
        (eig.vectors.transpose() * eig.vectors - Matrix::identity(5)).max_abs();
    r.clause(recon_err <= 1e-10 && ortho_err <= 1e-10,
             "eigensolver reconstruction error " + fmt(recon_err) + ", orthonormality error " +
                 fmt(ortho_err) + " <= 1e-10");

    // Gain scaling is invertible to near machine precision.
    double worst_round = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const double x = entry(rng);
        StateVector xi_hat(4);
        for (auto& v : xi_hat) v = entry(rng);
        const auto scaled = highgain::scale_states(7.0, 4, x, xi_hat);
        const auto [x_back, hat_back] = highgain::unscale_states(7.0, 4, scaled.eta, scaled.xi);
        worst_round = std::max(worst_round, std::abs(x_back - x));
        for (std::size_t j = 0; j < 4; ++j)
            worst_round = std::max(worst_round, std::abs(hat_back[j] - xi_hat[j]));
    }
    r.clause(worst_round <= 1e-12,
             "scaling round-trip worst error " + fmt(worst_round) + " <= 1e-12");

    // Newton root residual meets the solver tolerance.
    const auto root = numerics::newton_root(
        [](const StateVector& v) { return StateVector{v[0] * v[0] * v[0] - 8.0}; }, {3.0});
    const double residual = std::abs(root[0] * root[0] * root[0] - 8.0);
    r.clause(residual <= numerics::kNewtonTol,
             "Newton residual " + fmt(residual) + " <= " + fmt(numerics::kNewtonTol));

    // Backstepping cancels the chain nonlinearities exactly: with the
    // unmatched terms removed the scaled residual vanishes.
    auto setup = registry::make_highgain(4.5);
    auto chain = setup.chain;
    chain.g3 = [](double, const StateVector&) { return StateVector{0.0, 0.0}; };
    double worst_residual = 0.0;
    for (const double eta : {-2.0, 0.0, 2.0})
        for (const double xi1 : {-1.0, 1.0})
            for (const double xi2 : {-1.0, 1.0}) {
                const auto res = highgain::residual_field(chain, setup.design, eta, {xi1, xi2});
                worst_residual = std::max(worst_residual, norm(res));
            }
    r.clause(worst_residual <= 1e-8,
             "backstepping residual on the nominal chain " + fmt(worst_residual) + " <= 1e-8");
}

// ---------------------------------------------------------------------------
// Criterion 10: definition files reproduce the native examples pointwise at
// 1000 random states, and every malformed input is rejected at the exact
// recorded line and column.
// ---------------------------------------------------------------------------

void criterion_10(Result& r) {
    std::mt19937_64 rng(0x10ad5ULL);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::uniform_real_distribution<double> ratio(0.0, 1.0);

    double worst = 0.0;
    long points = 0;
    const auto close = [&](double a, double b) {
        const double tol = 1e-15 * std::max({1.0, std::abs(a), std::abs(b)});
        worst = std::max(worst, std::abs(a - b));
        return std::abs(a - b) <= tol;
    };

    bool parity = true;
    for (const std::string id : {"motivating", "dcmotor", "nonstandard", "highgain"}) {
        const auto file = sysdsl::load_system_file(data_file(id + ".sps"));
        const auto compiled = sysdsl::compile(file);
        const auto native_sys = registry::make_system(id, file.mu);
        const auto laws = registry::native_laws(id, file.mu);

        for (int trial = 0; trial < 250; ++trial) {
            StateVector x(file.n), z(file.m);
            for (auto& v : x) v = coord(rng);
            for (auto& v : z) v = coord(rng);
            const double u = coord(rng);
            const double g_mu = ratio(rng);
            ++points;

            const auto fa = native_sys.f(x, z, u);
            const auto fb = compiled.system.f(x, z, u);
            for (std::size_t i = 0; i < fa.size(); ++i) parity = parity && close(fa[i], fb[i]);

            const auto ga = native_sys.g(x, z, g_mu, u);
            const auto gb = compiled.system.g(x, z, g_mu, u);
            for (std::size_t i = 0; i < ga.size(); ++i) parity = parity && close(ga[i], gb[i]);

            if (laws.u1 && compiled.u1) parity = parity && close(laws.u1(x), compiled.u1(x));
            if (laws.u2 && compiled.u2)
                parity = parity && close(laws.u2(x, z), compiled.u2(x, z));
            if (laws.z_ds && compiled.manifold) {
                const auto ma = laws.z_ds(x);
                const auto mb = compiled.manifold(x);
                for (std::size_t i = 0; i < ma.size(); ++i)
                    parity = parity && close(ma[i], mb[i]);
            }
        }
    }
    r.clause(parity, "definition files match native laws at " + std::to_string(points) +
                         " random states (worst |diff| = " + fmt(worst) + ")");

    struct Malformed {
        const char* name;
        int line;
        int col;
        const char* what;
    };
    const std::vector<Malformed> corpus = {
        {"m01.sps", 1, 8, "missing ']'"},
        {"m02.sps", 6, 2, "unknown section 'wibble'"},
        {"m03.sps", 1, 1, "key outside any section"},
        {"m04.sps", 2, 1, "expected 'key = value'"},
        {"m05.sps", 5, 5, "missing value after '='"},
        {"m06.sps", 4, 1, "duplicate key 'n'"},
        {"m07.sps", 3, 5, "malformed integer 'one'"},
        {"m08.sps", 5, 6, "mu must lie in [0, 1]"},
        {"m09.sps", 4, 1, "[system] must declare n and m before this section"},
        {"m10.sps", 8, 1, "unknown key 'h1' in [dynamics]"},
        {"m11.sps", 8, 1, "slow index out of range: f2 (n = 1)"},
        {"m12.sps", 8, 9, "unexpected character"},
        {"m13.sps", 8, 13, "expected ')'"},
        {"m14.sps", 8, 6, "unknown function 'foo'"},
        {"m15.sps", 18, 9, "symbol 'u' is not allowed in zds1"},
        {"m16.sps", 8, 11, "state index out of range: z2 (limit 1) in f1"},
        {"m17.sps", 12, 6, "expected 'lo, hi'"},
        {"m18.sps", 12, 6, "region bounds must satisfy lo <= hi"},
        {"m19.sps", 7, 1, "missing f1 in [dynamics]"},
        {"m20.sps", 18, 9, "metric must have 1 rows"},
    };
    int rejected = 0;
    std::string first_miss;
    for (const auto& bad : corpus) {
        try {
            (void)sysdsl::load_system_file(data_file(std::string("malformed/") + bad.name));
            if (first_miss.empty()) first_miss = std::string(bad.name) + " parsed cleanly";
        } catch (const ParseError& e) {
            const bool at_position = e.line() == bad.line && e.column() == bad.col;
            const bool right_reason =
                std::string(e.what()).find(bad.what) != std::string::npos;
            if (at_position && right_reason) {
                ++rejected;
            } else if (first_miss.empty()) {
                first_miss = std::string(bad.name) + " rejected at " +
                             std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                             " (\"" + e.what() + "\")";
            }
        }
    }
    r.clause(rejected == 20, "20/20 malformed inputs rejected at the recorded positions" +
                                 (first_miss.empty() ? std::string()
                                                     : "; first mismatch: " + first_miss));
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* label;
    void (*run)(Result&);
    double budget_seconds; ///< 0 = no wall-clock requirement
};

const std::vector<Criterion> kCriteria = {
    {1, "composite Lyapunov baseline: threshold value and maximizing weight", criterion_1, 1.0},
    {2, "motivating plant settles near the origin at mu = 0.5", criterion_2, 5.0},
    {3, "DC motor speed within 1% of setpoint for mu in {0.1, 0.02}", criterion_3, 5.0},
    {4, "tracking loop: bounded, inside steady budget, error grows with mu", criterion_4, 10.0},
    {5, "high-gain loop: convergence, gain ordering, saturated run", criterion_5, 10.0},
    {6, "simulated errors stay inside certified envelopes (1% slack)", criterion_6, 0.0},
    {7, "random linear systems: Lyapunov metric certifies, unstable refused", criterion_7, 10.0},
    {8, "constant-disturbance offset within the robustness bound (5% slack)", criterion_8, 2.0},
    {9, "numeric kernels hold their advertised accuracy", criterion_9, 0.0},
    {10, "definition files: native parity and exact diagnostics", criterion_10, 0.0},
};

} // namespace

int main(int argc, char** argv) {
    int selected = 0;
    if (argc > 1) {
        selected = std::atoi(argv[1]);
        if (selected < 1 || selected > 10) {
            std::cerr << "usage: acceptance [1..10]\n";
            return 2;
        }
    }

    bool all_pass = true;
    for (const auto& crit : kCriteria) {
        if (selected != 0 && crit.id != selected) continue;

        Result result;
        const auto start = std::chrono::steady_clock::now();
        try {
            crit.run(result);
        } catch (const std::exception& e) {
            result.clause(false, std::string("unexpected exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (crit.budget_seconds > 0.0) {
            result.clause(elapsed <= crit.budget_seconds,
                          "completed in " + fmt(elapsed) + "s (budget " +
                              fmt(crit.budget_seconds) + "s)");
        }

        std::cout << (result.pass ? "[PASS]" : "[FAIL]") << " criterion " << crit.id << ": "
                  << crit.label << " (" << fmt(elapsed) << "s)\n";
        for (const auto& line : result.clauses) std::cout << line << "\n";
        all_pass = all_pass && result.pass;
    }
    return all_pass ? 0 : 1;
}
