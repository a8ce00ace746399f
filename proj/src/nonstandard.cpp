#include "contrakit/nonstandard.hpp"

#include "contrakit/errors.hpp"
#include "contrakit/numerics.hpp"

#include <cmath>
#include <memory>
#include <utility>

namespace contrakit::nonstandard {

namespace {

[[nodiscard]] StateVector add(const StateVector& a, const StateVector& b) {
    StateVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

[[nodiscard]] StateVector sub(const StateVector& a, const StateVector& b) {
    StateVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

/// d z_de / d e, analytic when declared, central differences otherwise.
[[nodiscard]] Matrix manifold_error_jac(const NonstandardDesign& design, const StateVector& e,
                                        double t) {
    if (design.manifold_jac) return design.manifold_jac(e, t);
    const auto map = [&](const StateVector& ee) { return design.virtual_manifold(ee, t); };
    return numerics::jacobian_fd(map, e);
}

/// Slow-error derivative at a point of error space.
[[nodiscard]] StateVector slow_error_rate(const NonstandardDesign& design, const StateVector& e_z,
                                          const StateVector& e, double t) {
    const StateVector x = add(e, design.x_ref(t));
    const StateVector z = add(design.virtual_manifold(e, t), e_z);
    const double u = design.control(e_z, e, t);
    return sub(design.system.f(x, z, u), design.x_ref_dot(t));
}

void validate_design(const NonstandardDesign& design) {
    if (!design.x_ref || !design.x_ref_dot) {
        throw InputError("tracking design requires a reference and its derivative");
    }
    if (!design.virtual_manifold) {
        throw InputError("tracking design requires a virtual manifold");
    }
    if (!design.control) throw InputError("tracking design requires a control law");
    if (design.error_region.dim() != design.system.n) {
        throw InputError("tracking design: error box dimension must match the slow state");
    }
}

} // namespace

ErrorSystem build_error_system(const TwoTimescaleSystem& system,
                               std::function<StateVector(double)> x_ref,
                               std::function<StateVector(double)> x_ref_dot) {
    if (!x_ref || !x_ref_dot) {
        throw InputError("build_error_system requires a reference and its derivative");
    }
    ErrorSystem err;
    err.n = system.n;
    err.m = system.m;
    auto f = system.f;
    auto g = system.g;
    auto xr = std::move(x_ref);
    auto xr_dot = std::move(x_ref_dot);
    err.f = [f, xr, xr_dot](double t, const StateVector& e, const StateVector& z, double u) {
        const StateVector x = add(e, xr(t));
        return sub(f(x, z, u), xr_dot(t));
    };
    err.g = [g, xr](double t, const StateVector& e, const StateVector& z, double mu, double u) {
        const StateVector x = add(e, xr(t));
        return g(x, z, mu, u);
    };
    return err;
}

StateVector manifold_drift(const NonstandardDesign& design, const StateVector& e_z,
                           const StateVector& e, double t) {
    const Matrix jac = manifold_error_jac(design, e, t);
    StateVector drift = jac.apply(slow_error_rate(design, e_z, e, t));

    // Explicit time dependence of z_de (moving references).
    const double ht = 1e-5 * std::max(1.0, std::abs(t));
    const StateVector ahead = design.virtual_manifold(e, t + ht);
    const StateVector behind = design.virtual_manifold(e, t - ht);
    for (std::size_t i = 0; i < drift.size(); ++i) {
        drift[i] += (ahead[i] - behind[i]) / (2.0 * ht);
    }
    return drift;
}

FastErrorFields fast_error_dynamics(const NonstandardDesign& design) {
    validate_design(design);
    // Own a copy so the fields remain valid after the design goes away.
    const auto d = std::make_shared<NonstandardDesign>(design);

    FastErrorFields fields;
    fields.unperturbed = [d](const StateVector& e_z, const StateVector& e, double t) {
        const StateVector x = add(e, d->x_ref(t));
        const StateVector z = add(d->virtual_manifold(e, t), e_z);
        const double u = d->control(e_z, e, t);
        return d->system.g(x, z, d->system.mu, u);
    };
    fields.perturbed = [d, base = fields.unperturbed](const StateVector& e_z, const StateVector& e,
                                                      double t) {
        StateVector out = base(e_z, e, t);
        const StateVector drift = manifold_drift(*d, e_z, e, t);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] -= d->system.mu * drift[i];
        return out;
    };
    return fields;
}

BoxRegion fast_error_region(const NonstandardDesign& design, int per_axis) {
    validate_design(design);
    const std::size_t m = design.system.m;
    StateVector lo(m, kInfinity), hi(m, -kInfinity);
    for (const auto& e : grid_sample(design.error_region, per_axis)) {
        const StateVector zde = design.virtual_manifold(e, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            lo[i] = std::min(lo[i], zde[i]);
            hi[i] = std::max(hi[i], zde[i]);
        }
    }
    StateVector lower(m), upper(m);
    for (std::size_t i = 0; i < m; ++i) {
        lower[i] = design.system.fast_region.lower[i] - hi[i];
        upper[i] = design.system.fast_region.upper[i] - lo[i];
    }
    return BoxRegion{lower, upper};
}

BoundSet estimate_tracking_constants(NonstandardDesign& design, int per_axis) {
    validate_design(design);
    const std::size_t m = design.system.m;

    BoundSet b;
    b.mu = design.system.mu;
    b.per_axis = per_axis;

    // Reduced slow-error system (fast error at zero), frozen at t = 0.
    const numerics::VectorField reduced = [&](const StateVector& e) {
        return slow_error_rate(design, StateVector(m, 0.0), e, 0.0);
    };
    const auto slow_report = contraction::check_region(reduced, design.error_region,
                                                       design.metric_e, per_axis);
    b.lambda_x = slow_report.rate;
    b.chi_x = slow_report.metric_chi;

    // Unperturbed fast-error system with the slow error frozen, t = 0.
    const FastErrorFields fields = fast_error_dynamics(design);
    const BoxRegion ez_region = fast_error_region(design, per_axis);
    const auto fast_field = [&](const StateVector& e_z, const StateVector& e) {
        return fields.unperturbed(e_z, e, 0.0);
    };
    const auto fast_report = contraction::partial_contraction_check(
        fast_field, ez_region, design.error_region, design.metric_ez, per_axis);
    b.lambda_z = fast_report.rate;
    b.chi_z = fast_report.metric_chi;

    // Drift and interconnection constants over reachable states: sweep the
    // original (e, z) boxes and derive e_z = z - z_de(e) so the fields are
    // only evaluated where the plant actually lives (a rectangle in
    // (e, e_z) would stray outside the fast box and can hit singularities).
    double d_e = 0.0, l_e = 0.0;
    for (const auto& e : grid_sample(design.error_region, per_axis)) {
        const StateVector zde = design.virtual_manifold(e, 0.0);
        for (const auto& z : grid_sample(design.system.fast_region, per_axis)) {
            StateVector e_z(m);
            for (std::size_t i = 0; i < m; ++i) e_z[i] = z[i] - zde[i];

            d_e = std::max(d_e, norm(manifold_drift(design, e_z, e, 0.0)));

            const numerics::VectorField slow_of_ez = [&](const StateVector& ez) {
                return slow_error_rate(design, ez, e, 0.0);
            };
            l_e = std::max(
                l_e, numerics::induced_norm2(numerics::jacobian_fd(slow_of_ez, e_z)));
        }
    }
    b.d_e = d_e;
    b.L2 = l_e;
    b.validate();
    design.bounds = b;
    return b;
}

composite::BoundCurve tracking_fast_bound(const BoundSet& bounds, double e0) {
    if (bounds.lambda_z < contraction::kRateEpsilon) {
        throw NotApplicableError("tracking_fast_bound requires a strictly positive fast-error "
                                 "contraction rate (got " +
                                 std::to_string(bounds.lambda_z) + ")");
    }
    if (e0 < 0.0) throw InputError("tracking_fast_bound: initial error must be >= 0");
    if (bounds.mu <= 0.0 || bounds.mu > 1.0) {
        throw InputError("tracking_fast_bound: timescale ratio mu must lie in (0, 1]");
    }
    const double chi_z = bounds.chi_z;
    const double lambda_z = bounds.lambda_z;
    const double offset = bounds.mu * bounds.d_e * chi_z / lambda_z;

    composite::BoundCurve curve;
    curve.limit = offset;
    curve.note = "decay printed in slow time exp(-lambda_z t); conservative for mu <= 1 since "
                 "the boundary-layer rate is lambda_z / mu";
    curve.at = [chi_z, lambda_z, e0, offset](double t) {
        return chi_z * std::exp(-lambda_z * t) * e0 + offset;
    };
    return curve;
}

TrackingLimit tracking_slow_limit(const BoundSet& bounds) {
    if (bounds.lambda_x < contraction::kRateEpsilon ||
        bounds.lambda_z < contraction::kRateEpsilon) {
        throw NotApplicableError(
            "tracking_slow_limit requires strictly positive error contraction rates");
    }
    if (bounds.mu <= 0.0 || bounds.mu > 1.0) {
        throw InputError("tracking_slow_limit: timescale ratio mu must lie in (0, 1]");
    }
    TrackingLimit limit;
    limit.value = bounds.mu * bounds.L2 * bounds.d_e * bounds.chi_z * bounds.chi_x /
                  (bounds.lambda_x * bounds.lambda_z);
    limit.mapping_note =
        "slow tracking limit = mu * L_e * d_e * chi_ez * chi_e / (lambda_e * lambda_ez), where "
        "L_e bounds the slow error's sensitivity to the fast error (interconnection gain) and "
        "d_e bounds the virtual-manifold drift (the constant forcing of the fast error)";
    return limit;
}

TrackingRun simulate_tracking(const NonstandardDesign& design, const StateVector& x0,
                              const StateVector& z0, double t_end, double dt) {
    validate_design(design);
    const TwoTimescaleSystem& sys = design.system;
    if (x0.size() != sys.n || z0.size() != sys.m) {
        throw InputError("simulate_tracking: initial state dimensions do not match the system");
    }
    if (sys.mu <= 0.0) throw InputError("simulate_tracking requires mu > 0");
    if (!(dt > 0.0)) throw InputError("simulate_tracking: dt must be positive");
    if (dt > sys.mu / 50.0 * (1.0 + 1e-9)) {
        throw InputError("simulate_tracking: dt = " + std::to_string(dt) +
                         " is too coarse for the fast dynamics; require dt <= mu/50 = " +
                         std::to_string(sys.mu / 50.0));
    }
    if (!(t_end > 0.0)) throw InputError("simulate_tracking: t_end must be positive");

    const std::size_t n = sys.n;
    const double mu = sys.mu;
    const numerics::TimeField joint = [&](double t, const StateVector& s) {
        const StateVector x(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
        const StateVector z(s.begin() + static_cast<std::ptrdiff_t>(n), s.end());
        const StateVector e = sub(x, design.x_ref(t));
        const StateVector e_z = sub(z, design.virtual_manifold(e, t));
        const double u = design.control(e_z, e, t);
        const StateVector fdot = sys.f(x, z, u);
        const StateVector gdot = sys.g(x, z, mu, u);
        StateVector out(s.size());
        for (std::size_t i = 0; i < n; ++i) out[i] = fdot[i];
        for (std::size_t i = 0; i < z.size(); ++i) out[n + i] = gdot[i] / mu;
        return out;
    };

    StateVector s0 = x0;
    s0.insert(s0.end(), z0.begin(), z0.end());

    TrackingRun run;
    run.trajectory = numerics::rk4_integrate(joint, s0, 0.0, t_end, dt);
    for (std::size_t k = 0; k < run.trajectory.states.size(); ++k) {
        const auto& s = run.trajectory.states[k];
        const double t = run.trajectory.times[k];
        const StateVector x(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
        const StateVector z(s.begin() + static_cast<std::ptrdiff_t>(n), s.end());
        const StateVector e = sub(x, design.x_ref(t));
        const StateVector e_z = sub(z, design.virtual_manifold(e, t));
        run.trajectory.inputs[k] = design.control(e_z, e, t);
    }

    run.window_fraction = 0.1;
    run.window_start = t_end * (1.0 - run.window_fraction);
    double steady = 0.0;
    for (std::size_t k = 0; k < run.trajectory.times.size(); ++k) {
        if (run.trajectory.times[k] + 1e-12 < run.window_start) continue;
        const auto& s = run.trajectory.states[k];
        const double t = run.trajectory.times[k];
        const StateVector x(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
        steady = std::max(steady, norm(sub(x, design.x_ref(t))));
    }
    run.steady_error = steady;
    return run;
}

std::vector<std::pair<double, double>> tracking_error_series(const NonstandardDesign& design,
                                                             const Trajectory& traj) {
    const std::size_t n = design.system.n;
    std::vector<std::pair<double, double>> series;
    series.reserve(traj.states.size());
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const auto& s = traj.states[k];
        const double t = traj.times[k];
        const StateVector x(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n));
        const StateVector z(s.begin() + static_cast<std::ptrdiff_t>(n), s.end());
        const StateVector e = sub(x, design.x_ref(t));
        const StateVector e_z = sub(z, design.virtual_manifold(e, t));
        series.emplace_back(norm(e), norm(e_z));
    }
    return series;
}

} // namespace contrakit::nonstandard
