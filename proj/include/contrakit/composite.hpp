#pragma once

// =============================================================================
// contrakit - Composite Control for Standard Two-Timescale Systems
// =============================================================================
// A standard design pairs a slow control u1(x) with a fast correction
// u2(x, z) that vanishes on the design manifold z_ds(x). Given contraction
// rates and interconnection constants estimated over the operating boxes,
// this module evaluates closed-form transient envelopes for the fast error
// ||z - z_ds(x)|| and the slow error ||x - x_r||, the disturbance-robust
// variant, the timescale-ratio threshold for exponential convergence, and a
// baseline admissible-ratio estimate from a composite Lyapunov argument.
// =============================================================================

#include "contrakit/contraction.hpp"
#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"

#include <functional>
#include <string>
#include <utility>

namespace contrakit::composite {

/// Residual tolerance for design invariants checked at construction
/// (manifold roots, u2 vanishing on the manifold).
constexpr double kDesignTolerance = 1e-8;

/// Newton tolerance for manifold roots.
constexpr double kManifoldTolerance = 1e-10;

/// A composite design for a standard two-timescale system, with the metrics
/// used for rate estimation and the estimated constants.
struct StandardDesign {
    TwoTimescaleSystem system;
    ControlLaw control;
    std::function<StateVector(const StateVector& x)> manifold;
    contraction::Metric metric_x = contraction::Metric::identity(1);
    contraction::Metric metric_z = contraction::Metric::identity(1);
    BoundSet bounds;

    /// Closed-loop input u1(x) + u2(x, z).
    [[nodiscard]] double input_at(const StateVector& x, const StateVector& z) const;
};

/// An evaluable envelope t -> bound plus its t -> infinity limit. `at` may be
/// empty when only the limit is certified; `note` carries any caveat.
struct BoundCurve {
    std::function<double(double t)> at;
    double limit = 0.0;
    std::string note;

    [[nodiscard]] bool has_curve() const noexcept { return static_cast<bool>(at); }
};

/// Solves g(x, z, 0, u1(x)) = 0 for z by Newton iteration started from
/// `seed` (fall back to the fast-region center). Throws InputError when no
/// root is found, mentioning that the model may be nonstandard.
[[nodiscard]] StateVector solve_manifold(const TwoTimescaleSystem& system,
                                         const std::function<double(const StateVector&)>& u1,
                                         const StateVector& x, const StateVector& seed);
[[nodiscard]] StateVector solve_manifold(const TwoTimescaleSystem& system,
                                         const std::function<double(const StateVector&)>& u1,
                                         const StateVector& x);

/// Assembles a design and validates its structural invariants on a coarse
/// slow-region grid: the manifold satisfies g(x, z_ds(x), 0, u1(x)) = 0 to
/// kDesignTolerance and u2(x, z_ds(x)) vanishes to kDesignTolerance.
/// Does not estimate constants; call estimate_constants afterwards.
[[nodiscard]] StandardDesign make_standard_design(TwoTimescaleSystem system, ControlLaw control,
                                                  contraction::Metric metric_x,
                                                  contraction::Metric metric_z);

/// Estimates every constant the envelopes need by sampling per_axis points
/// per axis over the design's boxes, storing them in design.bounds:
///   lambda_x, chi_x  from the reduced slow system on the slow box,
///   lambda_z, chi_z  from the fast subsystem with x frozen (boundary-layer
///                    time, at the design's timescale ratio),
///   d1    sup || d z_ds/dx * f ||           (manifold drift),
///   L1    sup || g(mu) - g(0) || / mu       (fast model mu-sensitivity),
///   L2    sup induced norm of df/dz         (slow sensitivity to fast state),
///   L_u   sup || df/du ||                   (slow sensitivity to input),
///   d2    sup |u2| / ||z - z_ds||           (fast correction gain),
///   d_q   sup induced norm of d(dz_ds/dx f)/dz  (drift sensitivity).
/// Returns the stored BoundSet.
BoundSet estimate_constants(StandardDesign& design, int per_axis = 21);

/// Envelope for the fast (boundary-layer) error ||z - z_ds(x(t))||:
///   chi_z * exp(-lambda_z t / mu) * z0_err + mu chi_z (d1 + L1) / lambda_z.
/// Requires lambda_z > 0 and mu in (0, 1].
[[nodiscard]] BoundCurve fast_error_bound(const BoundSet& bounds, double z0_err);

/// Envelope for the slow error ||x - x_r(t)|| against the reduced solution:
///   chi_x x0_err e^{-lambda_x t}
///     + mu [ C1 (e^{-lambda_x t} - e^{-lambda_z t / mu}) + C2 (1 - e^{-lambda_x t}) ]
/// with C1 = chi_x chi_z (L2 + L_u d2) z0_err / (lambda_z - mu lambda_x) and
/// C2 = chi_x chi_z (L2 + L_u d2) (d1 + L1) / (lambda_z lambda_x); the limit
/// is mu * C2. Requires lambda_x > 0 and lambda_z > 0. When the timescale
/// separation degenerates (lambda_z - mu lambda_x <= 0) the curve is withheld
/// and `note` explains why; the limit is still returned.
[[nodiscard]] BoundCurve slow_error_bound(const BoundSet& bounds, double x0_err, double z0_err);

/// Fast-error envelope under an additional bounded disturbance of magnitude
/// d_b >= 0:
///   chi_z * exp(-lambda_z t) * z0_err + mu chi_z (d1 + L1 + d_b) / lambda_z.
/// (Slow-time decay in the exponent: a conservative envelope valid for
/// mu <= 1; at d_b = 0 its limit matches fast_error_bound.)
[[nodiscard]] BoundCurve disturbed_fast_bound(const BoundSet& bounds, double d_b, double z0_err);

/// Largest timescale ratio with certified exponential convergence of the
/// slow error: min(1, lambda_z / d_q). Returns +infinity when d_q = 0 (no
/// drift feedback; the ratio is uncapped by this criterion).
[[nodiscard]] double exponential_mu_threshold(double d_q, double lambda_z);

/// Integrates the closed loop (x, z) with u = u1 + u2 by fixed-step RK4.
/// Requires dt <= mu / 50 and the initial state inside the design boxes.
/// Inputs are recorded at every step.
[[nodiscard]] Trajectory simulate_closed_loop(const StandardDesign& design, const StateVector& x0,
                                              const StateVector& z0, double t_end, double dt);

/// Integrates the reduced slow model x_r' = f(x_r, z_ds(x_r), u1(x_r)) with
/// warm-started Newton manifold solves along the way.
[[nodiscard]] Trajectory reduced_trajectory(const StandardDesign& design, const StateVector& x0,
                                            double t_end, double dt);

/// Manifold values z_ds(x(t_k)) along a trajectory (warm-started solves).
[[nodiscard]] std::vector<StateVector> manifold_series(const StandardDesign& design,
                                                       const Trajectory& traj);

/// Result of the composite Lyapunov baseline estimate.
struct MuMaxResult {
    double mu_max = 0.0;
    double d_star = 0.0;
    std::string note;
};

/// Baseline admissible timescale ratio from a composite Lyapunov function
/// v = (1 - d) V_slow + d V_fast with interconnection constants
/// alpha1, alpha2 (subsystem decay) and beta1, beta2, beta3 (cross terms,
/// normalized nonnegative). Maximizes
///   mu(d) = alpha1 alpha2 / (alpha1 beta3 + ((1-d) beta1 + d beta2)^2 / (4 d (1-d)))
/// over d in (0, 1) by golden-section search to 1e-6.
[[nodiscard]] MuMaxResult mu_max_composite_lyapunov(double alpha1, double alpha2, double beta1,
                                                    double beta2, double beta3);

} // namespace contrakit::composite
