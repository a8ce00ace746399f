#pragma once

// =============================================================================
// contrakit - Tracking Control for Nonstandard Two-Timescale Systems
// =============================================================================
// Nonstandard models need not have an isolated quasi-steady-state root, so
// the composite recipe is rebuilt around tracking errors: the slow error
// e = x - x_r(t) and the fast error e_z = z - z_de(e, t) measured against a
// designer-chosen virtual manifold z_de. This module transforms the plant
// into error coordinates, certifies contraction of the error subsystems,
// evaluates the tracking envelopes, and simulates the closed loop.
// =============================================================================

#include "contrakit/composite.hpp"
#include "contrakit/contraction.hpp"
#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"

#include <functional>
#include <string>

namespace contrakit::nonstandard {

/// A tracking design in error coordinates.
struct NonstandardDesign {
    TwoTimescaleSystem system;

    /// Reference trajectory for the slow state and its time derivative.
    std::function<StateVector(double t)> x_ref;
    std::function<StateVector(double t)> x_ref_dot;

    /// Virtual manifold: desired fast state as a function of the slow
    /// tracking error (the reference enters through t).
    std::function<StateVector(const StateVector& e, double t)> virtual_manifold;

    /// Optional analytic Jacobian d z_de / d e; finite differences otherwise.
    std::function<Matrix(const StateVector& e, double t)> manifold_jac;

    /// Control u(e_z, e, t).
    std::function<double(const StateVector& e_z, const StateVector& e, double t)> control;

    contraction::Metric metric_e = contraction::Metric::identity(1);
    contraction::Metric metric_ez = contraction::Metric::identity(1);

    /// Box for the slow error over which constants are estimated.
    BoxRegion error_region{{0.0}, {0.0}};

    BoundSet bounds;
};

/// The plant rewritten in (e, z) with a moving reference. Time enters both
/// fields through x = e + x_r(t); the slow field also subtracts x_r'(t).
struct ErrorSystem {
    std::size_t n = 0;
    std::size_t m = 0;
    std::function<StateVector(double t, const StateVector& e, const StateVector& z, double u)> f;
    std::function<StateVector(double t, const StateVector& e, const StateVector& z, double mu,
                              double u)>
        g;
};

/// Boundary-layer-time fields for the fast error e_z with (e, t) frozen.
/// `perturbed` includes the virtual-manifold drift -mu * d z_de / dt that the
/// moving manifold injects; `unperturbed` drops it (the field whose
/// contraction is certified).
struct FastErrorFields {
    std::function<StateVector(const StateVector& e_z, const StateVector& e, double t)> perturbed;
    std::function<StateVector(const StateVector& e_z, const StateVector& e, double t)> unperturbed;
};

/// Result of a tracking simulation.
struct TrackingRun {
    Trajectory trajectory;          ///< states are the original (x, z)
    double steady_error = 0.0;      ///< max ||e|| over the final window
    double window_start = 0.0;      ///< start time of that window
    double window_fraction = 0.1;   ///< fraction of the horizon used
};

/// Asymptotic tracking limit with a prose note explaining which constant
/// plays which role in the formula.
struct TrackingLimit {
    double value = 0.0;
    std::string mapping_note;
};

/// Rewrites the plant around the reference: e = x - x_r(t).
[[nodiscard]] ErrorSystem build_error_system(const TwoTimescaleSystem& system,
                                             std::function<StateVector(double)> x_ref,
                                             std::function<StateVector(double)> x_ref_dot);

/// Fast-error fields for the design (see FastErrorFields).
[[nodiscard]] FastErrorFields fast_error_dynamics(const NonstandardDesign& design);

/// Virtual-manifold drift d z_de / dt at a point of the error space
/// (chain rule through e plus the explicit time dependence).
[[nodiscard]] StateVector manifold_drift(const NonstandardDesign& design, const StateVector& e_z,
                                         const StateVector& e, double t);

/// Box for the fast error implied by the design's fast box and the range of
/// the virtual manifold over the error box.
[[nodiscard]] BoxRegion fast_error_region(const NonstandardDesign& design, int per_axis = 9);

/// Estimates the tracking constants over the design boxes and stores them:
///   lambda_x, chi_x   reduced slow-error system on the error box,
///   lambda_z, chi_z   unperturbed fast-error system (error frozen),
///   d_e               sup || d z_de / dt ||   (virtual-manifold drift),
///   L2                sup induced norm of the slow-error field's sensitivity
///                     to the fast error (the interconnection gain L_e).
BoundSet estimate_tracking_constants(NonstandardDesign& design, int per_axis = 21);

/// Envelope for the fast tracking error ||e_z(t)||:
///   chi_z * exp(-lambda_z t) * e0 + mu d_e chi_z / lambda_z.
/// The printed decay uses slow time, which is conservative for mu <= 1 (the
/// boundary-layer rate is lambda_z / mu >= lambda_z).
[[nodiscard]] composite::BoundCurve tracking_fast_bound(const BoundSet& bounds, double e0);

/// Asymptotic slow tracking limit
///   mu * L_e * d_e * chi_z * chi_x / (lambda_x * lambda_z)
/// where L_e (stored as L2) bounds the slow error's sensitivity to the fast
/// error and d_e bounds the virtual-manifold drift.
[[nodiscard]] TrackingLimit tracking_slow_limit(const BoundSet& bounds);

/// Integrates the closed loop in original coordinates with
/// u = control(e_z, e, t). Requires dt <= mu / 50 and initial states inside
/// the design boxes. steady_error is max ||e|| over the final 10% of samples.
[[nodiscard]] TrackingRun simulate_tracking(const NonstandardDesign& design, const StateVector& x0,
                                            const StateVector& z0, double t_end, double dt);

/// Per-sample tracking errors (||e||, ||e_z||) along a trajectory in
/// original coordinates.
[[nodiscard]] std::vector<std::pair<double, double>> tracking_error_series(
    const NonstandardDesign& design, const Trajectory& traj);

} // namespace contrakit::nonstandard
