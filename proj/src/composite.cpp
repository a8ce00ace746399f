#include "contrakit/composite.hpp"

#include "contrakit/errors.hpp"
#include "contrakit/numerics.hpp"

#include <cmath>
#include <memory>
#include <utility>

namespace contrakit::composite {

namespace {

constexpr int kValidationGrid = 5;

[[nodiscard]] StateVector slow_part(const StateVector& joint, std::size_t n) {
    return StateVector(joint.begin(), joint.begin() + static_cast<std::ptrdiff_t>(n));
}

[[nodiscard]] StateVector fast_part(const StateVector& joint, std::size_t n) {
    return StateVector(joint.begin() + static_cast<std::ptrdiff_t>(n), joint.end());
}

[[nodiscard]] StateVector concat(const StateVector& a, const StateVector& b) {
    StateVector out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

void require_positive_rate(double lambda, const char* which) {
    // Gate at the verdict epsilon, not zero: a rate inside the semi-contracting
    // band is differencing noise and would only produce astronomically large
    // (meaningless) envelope constants.
    if (lambda < contraction::kRateEpsilon) {
        throw NotApplicableError(std::string(which) +
                                 " requires a strictly positive contraction rate (got " +
                                 std::to_string(lambda) + "); the envelope is not certified");
    }
}

} // namespace

// -----------------------------------------------------------------------------
// StandardDesign
// -----------------------------------------------------------------------------

double StandardDesign::input_at(const StateVector& x, const StateVector& z) const {
    return control.u1(x) + control.u2(x, z);
}

StateVector solve_manifold(const TwoTimescaleSystem& system,
                           const std::function<double(const StateVector&)>& u1,
                           const StateVector& x, const StateVector& seed) {
    const double u = u1(x);
    const auto residual = [&](const StateVector& z) { return system.g(x, z, 0.0, u); };
    try {
        return numerics::newton_root(residual, seed, kManifoldTolerance);
    } catch (const InputError& e) {
        throw InputError(std::string("manifold solve failed (the model may be nonstandard, "
                                     "with no isolated quasi-steady-state root): ") +
                         e.what());
    }
}

StateVector solve_manifold(const TwoTimescaleSystem& system,
                           const std::function<double(const StateVector&)>& u1,
                           const StateVector& x) {
    return solve_manifold(system, u1, x, system.fast_region.center());
}

StandardDesign make_standard_design(TwoTimescaleSystem system, ControlLaw control,
                                    contraction::Metric metric_x, contraction::Metric metric_z) {
    system.validate();
    if (!control.u1 || !control.u2) throw InputError("design requires both u1 and u2");
    if (system.m == 0) throw InputError("composite design requires at least one fast state");

    StandardDesign out;
    out.system = std::move(system);
    out.control = std::move(control);
    out.metric_x = std::move(metric_x);
    out.metric_z = std::move(metric_z);
    // The manifold closure owns copies of the system and control so the
    // design stays self-contained when moved or copied.
    auto sys_copy = std::make_shared<TwoTimescaleSystem>(out.system);
    auto ctl_copy = std::make_shared<ControlLaw>(out.control);
    auto seed = std::make_shared<StateVector>(out.system.fast_region.center());
    out.manifold = [sys_copy, ctl_copy, seed](const StateVector& x) {
        StateVector root = solve_manifold(*sys_copy, ctl_copy->u1, x, *seed);
        *seed = root;
        return root;
    };

    // Structural invariants on a coarse slow-region grid.
    for (const auto& x : grid_sample(out.system.slow_region, kValidationGrid)) {
        const StateVector zds = out.manifold(x);
        const StateVector res = out.system.g(x, zds, 0.0, out.control.u1(x));
        if (norm(res) > kDesignTolerance) {
            throw InputError("design invariant violated: manifold residual " +
                             std::to_string(norm(res)) + " exceeds tolerance");
        }
        const double u2_on_manifold = out.control.u2(x, zds);
        if (std::abs(u2_on_manifold) > kDesignTolerance) {
            throw InputError("design invariant violated: fast correction u2 does not vanish "
                             "on the manifold (|u2| = " +
                             std::to_string(std::abs(u2_on_manifold)) + ")");
        }
    }
    return out;
}

// -----------------------------------------------------------------------------
// Constant estimation
// -----------------------------------------------------------------------------

BoundSet estimate_constants(StandardDesign& design, int per_axis) {
    const TwoTimescaleSystem& sys = design.system;
    const double mu_d = sys.mu;

    BoundSet b;
    b.mu = mu_d;
    b.per_axis = per_axis;

    // Reduced slow system x' = f(x, z_ds(x), u1(x)).
    const numerics::VectorField reduced = [&](const StateVector& x) {
        const StateVector zds = design.manifold(x);
        return sys.f(x, zds, design.control.u1(x));
    };
    const auto slow_report = contraction::check_region(reduced, sys.slow_region, design.metric_x,
                                                       per_axis);
    b.lambda_x = slow_report.rate;
    b.chi_x = slow_report.metric_chi;

    // Fast subsystem in boundary-layer time with the slow state frozen,
    // evaluated at the design's timescale ratio.
    const auto fast_field = [&](const StateVector& z, const StateVector& x) {
        return sys.g(x, z, mu_d, design.input_at(x, z));
    };
    const auto fast_report = contraction::partial_contraction_check(
        fast_field, sys.fast_region, sys.slow_region, design.metric_z, per_axis);
    b.lambda_z = fast_report.rate;
    b.chi_z = fast_report.metric_chi;

    // Interconnection constants over the joint grid.
    const auto grid_x = grid_sample(sys.slow_region, per_axis);
    const auto grid_z = grid_sample(sys.fast_region, per_axis);

    double d1 = 0.0, l1 = 0.0, l2 = 0.0, lu = 0.0, d2 = 0.0, dq = 0.0;
    for (const auto& x : grid_x) {
        const Matrix manifold_jac = numerics::jacobian_fd(design.manifold, x);
        const StateVector zds = design.manifold(x);
        for (const auto& z : grid_z) {
            const double u = design.input_at(x, z);
            const StateVector fdot = sys.f(x, z, u);

            d1 = std::max(d1, norm(manifold_jac.apply(fdot)));

            if (mu_d > 0.0) {
                const StateVector g_mu = sys.g(x, z, mu_d, u);
                const StateVector g_0 = sys.g(x, z, 0.0, u);
                double diff = 0.0;
                for (std::size_t i = 0; i < g_mu.size(); ++i) {
                    diff += (g_mu[i] - g_0[i]) * (g_mu[i] - g_0[i]);
                }
                l1 = std::max(l1, std::sqrt(diff) / mu_d);
            }

            const numerics::VectorField f_of_z = [&](const StateVector& zz) {
                return sys.f(x, zz, u);
            };
            l2 = std::max(l2, numerics::induced_norm2(numerics::jacobian_fd(f_of_z, z)));

            const double hu = 1e-5 * std::max(1.0, std::abs(u));
            const StateVector f_hi = sys.f(x, z, u + hu);
            const StateVector f_lo = sys.f(x, z, u - hu);
            double du = 0.0;
            for (std::size_t i = 0; i < f_hi.size(); ++i) {
                const double gi = (f_hi[i] - f_lo[i]) / (2.0 * hu);
                du += gi * gi;
            }
            lu = std::max(lu, std::sqrt(du));

            StateVector offset(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) offset[i] = z[i] - zds[i];
            const double dist = norm(offset);
            if (dist > 1e-9) {
                d2 = std::max(d2, std::abs(design.control.u2(x, z)) / dist);
            }

            const numerics::VectorField drift_of_z = [&](const StateVector& zz) {
                return manifold_jac.apply(sys.f(x, zz, design.input_at(x, zz)));
            };
            dq = std::max(dq, numerics::induced_norm2(numerics::jacobian_fd(drift_of_z, z)));
        }
    }
    b.d1 = d1;
    b.L1 = l1;
    b.L2 = l2;
    b.L_u = lu;
    b.d2 = d2;
    b.d_q = dq;
    b.validate();
    design.bounds = b;
    return b;
}

// -----------------------------------------------------------------------------
// Envelopes
// -----------------------------------------------------------------------------

BoundCurve fast_error_bound(const BoundSet& bounds, double z0_err) {
    require_positive_rate(bounds.lambda_z, "fast_error_bound");
    if (z0_err < 0.0) throw InputError("fast_error_bound: z0_err must be >= 0");
    if (bounds.mu <= 0.0 || bounds.mu > 1.0) {
        throw InputError("fast_error_bound: timescale ratio mu must lie in (0, 1]");
    }
    const double chi_z = bounds.chi_z;
    const double lambda_z = bounds.lambda_z;
    const double mu = bounds.mu;
    const double offset = mu * chi_z * (bounds.d1 + bounds.L1) / lambda_z;

    BoundCurve curve;
    curve.limit = offset;
    curve.at = [chi_z, lambda_z, mu, z0_err, offset](double t) {
        return chi_z * std::exp(-lambda_z * t / mu) * z0_err + offset;
    };
    return curve;
}

BoundCurve slow_error_bound(const BoundSet& bounds, double x0_err, double z0_err) {
    require_positive_rate(bounds.lambda_x, "slow_error_bound (slow rate)");
    require_positive_rate(bounds.lambda_z, "slow_error_bound (fast rate)");
    if (x0_err < 0.0 || z0_err < 0.0) throw InputError("slow_error_bound: errors must be >= 0");
    if (bounds.mu <= 0.0 || bounds.mu > 1.0) {
        throw InputError("slow_error_bound: timescale ratio mu must lie in (0, 1]");
    }

    const double mu = bounds.mu;
    const double lambda_x = bounds.lambda_x;
    const double lambda_z = bounds.lambda_z;
    const double coupling = bounds.chi_x * bounds.chi_z * (bounds.L2 + bounds.L_u * bounds.d2);
    const double c2 = coupling * (bounds.d1 + bounds.L1) / (lambda_z * lambda_x);

    BoundCurve curve;
    curve.limit = mu * c2;

    const double separation = lambda_z - mu * lambda_x;
    if (separation <= 0.0) {
        curve.note = "transient envelope withheld: timescale separation degenerates "
                     "(lambda_z - mu * lambda_x <= 0); only the asymptotic limit is certified";
        return curve;
    }
    const double c1 = coupling * z0_err / separation;
    const double chi_x = bounds.chi_x;
    curve.at = [chi_x, lambda_x, lambda_z, mu, c1, c2, x0_err](double t) {
        const double slow_decay = std::exp(-lambda_x * t);
        const double fast_decay = std::exp(-lambda_z * t / mu);
        return chi_x * x0_err * slow_decay +
               mu * (c1 * (slow_decay - fast_decay) + c2 * (1.0 - slow_decay));
    };
    return curve;
}

BoundCurve disturbed_fast_bound(const BoundSet& bounds, double d_b, double z0_err) {
    require_positive_rate(bounds.lambda_z, "disturbed_fast_bound");
    if (d_b < 0.0) throw InputError("disturbed_fast_bound: disturbance magnitude must be >= 0");
    if (z0_err < 0.0) throw InputError("disturbed_fast_bound: z0_err must be >= 0");
    if (bounds.mu <= 0.0 || bounds.mu > 1.0) {
        throw InputError("disturbed_fast_bound: timescale ratio mu must lie in (0, 1]");
    }
    const double chi_z = bounds.chi_z;
    const double lambda_z = bounds.lambda_z;
    const double offset = bounds.mu * chi_z * (bounds.d1 + bounds.L1 + d_b) / lambda_z;

    BoundCurve curve;
    curve.limit = offset;
    curve.note = "conservative slow-time decay exp(-lambda_z t); valid for mu <= 1";
    curve.at = [chi_z, lambda_z, z0_err, offset](double t) {
        return chi_z * std::exp(-lambda_z * t) * z0_err + offset;
    };
    return curve;
}

double exponential_mu_threshold(double d_q, double lambda_z) {
    if (d_q < 0.0) throw InputError("exponential_mu_threshold: d_q must be >= 0");
    require_positive_rate(lambda_z, "exponential_mu_threshold");
    if (d_q == 0.0) return kInfinity;
    return std::min(1.0, lambda_z / d_q);
}

// -----------------------------------------------------------------------------
// Simulation
// -----------------------------------------------------------------------------

Trajectory simulate_closed_loop(const StandardDesign& design, const StateVector& x0,
                                const StateVector& z0, double t_end, double dt) {
    const TwoTimescaleSystem& sys = design.system;
    if (x0.size() != sys.n || z0.size() != sys.m) {
        throw InputError("simulate_closed_loop: initial state dimensions do not match the system");
    }
    if (sys.mu <= 0.0) {
        throw InputError("simulate_closed_loop requires mu > 0 (the fast dynamics divide by mu)");
    }
    if (!(dt > 0.0)) throw InputError("simulate_closed_loop: dt must be positive");
    if (dt > sys.mu / 50.0 * (1.0 + 1e-9)) {
        throw InputError("simulate_closed_loop: dt = " + std::to_string(dt) +
                         " is too coarse for the fast dynamics; require dt <= mu/50 = " +
                         std::to_string(sys.mu / 50.0));
    }
    if (!in_region(x0, sys.slow_region)) {
        throw InputError("simulate_closed_loop: initial slow state lies outside the slow box");
    }
    if (!in_region(z0, sys.fast_region)) {
        throw InputError("simulate_closed_loop: initial fast state lies outside the fast box");
    }
    if (!(t_end > 0.0)) throw InputError("simulate_closed_loop: t_end must be positive");

    const std::size_t n = sys.n;
    const double mu = sys.mu;
    const numerics::TimeField joint = [&](double, const StateVector& s) {
        const StateVector x = slow_part(s, n);
        const StateVector z = fast_part(s, n);
        const double u = design.input_at(x, z);
        const StateVector fdot = sys.f(x, z, u);
        const StateVector gdot = sys.g(x, z, mu, u);
        StateVector out(s.size());
        for (std::size_t i = 0; i < n; ++i) out[i] = fdot[i];
        for (std::size_t i = 0; i < z.size(); ++i) out[n + i] = gdot[i] / mu;
        return out;
    };

    Trajectory traj = numerics::rk4_integrate(joint, concat(x0, z0), 0.0, t_end, dt);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const StateVector x = slow_part(traj.states[k], n);
        const StateVector z = fast_part(traj.states[k], n);
        traj.inputs[k] = design.input_at(x, z);
    }
    return traj;
}

Trajectory reduced_trajectory(const StandardDesign& design, const StateVector& x0, double t_end,
                              double dt) {
    const TwoTimescaleSystem& sys = design.system;
    if (x0.size() != sys.n) throw InputError("reduced_trajectory: bad initial dimension");
    if (!(dt > 0.0) || !(t_end > 0.0)) {
        throw InputError("reduced_trajectory: dt and t_end must be positive");
    }
    auto seed = std::make_shared<StateVector>(design.manifold(x0));
    const numerics::TimeField reduced = [&, seed](double, const StateVector& x) {
        const StateVector zds = solve_manifold(sys, design.control.u1, x, *seed);
        *seed = zds;
        return sys.f(x, zds, design.control.u1(x));
    };
    Trajectory traj = numerics::rk4_integrate(reduced, x0, 0.0, t_end, dt);
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        traj.inputs[k] = design.control.u1(traj.states[k]);
    }
    return traj;
}

std::vector<StateVector> manifold_series(const StandardDesign& design, const Trajectory& traj) {
    const std::size_t n = design.system.n;
    std::vector<StateVector> series;
    series.reserve(traj.states.size());
    StateVector seed = design.system.fast_region.center();
    if (!traj.states.empty() && traj.states.front().size() > n) {
        seed = fast_part(traj.states.front(), n);
    }
    for (const auto& s : traj.states) {
        const StateVector x = slow_part(s, n);
        seed = solve_manifold(design.system, design.control.u1, x, seed);
        series.push_back(seed);
    }
    return series;
}

// -----------------------------------------------------------------------------
// Composite Lyapunov baseline
// -----------------------------------------------------------------------------

MuMaxResult mu_max_composite_lyapunov(double alpha1, double alpha2, double beta1, double beta2,
                                      double beta3) {
    if (alpha1 <= 0.0 || alpha2 <= 0.0) {
        throw InputError("mu_max_composite_lyapunov: subsystem decay rates must be positive");
    }
    if (beta1 < 0.0 || beta2 < 0.0 || beta3 < 0.0) {
        throw InputError("mu_max_composite_lyapunov: cross-term constants must be >= 0");
    }
    if (beta1 + beta2 <= 0.0 && beta3 <= 0.0) {
        throw InputError("mu_max_composite_lyapunov: at least one cross-term constant must be "
                         "positive (otherwise the ratio is unconstrained)");
    }

    const auto mu_of = [&](double d) {
        const double mix = (1.0 - d) * beta1 + d * beta2;
        const double denom = alpha1 * beta3 + mix * mix / (4.0 * d * (1.0 - d));
        return alpha1 * alpha2 / denom;
    };
    const auto [d_star, mu_max] = numerics::golden_section_max(mu_of, 1e-9, 1.0 - 1e-9, 1e-6);

    MuMaxResult result;
    result.d_star = d_star;
    result.mu_max = mu_max;
    result.note = "cross-term constants are treated with normalized (nonnegative) signs, so the "
                  "quadratic-form test is conservative";
    return result;
}

} // namespace contrakit::composite
