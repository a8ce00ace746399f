#pragma once

// =============================================================================
// contrakit - High-Gain Control for Strict-Feedback Chains
// =============================================================================
// For a single-input strict-feedback chain attached to a scalar slow state,
// a backstepping change of coordinates cancels the matched chain
// nonlinearities; gain scaling by powers of k then turns the closed loop
// into a two-timescale system with ratio mu = 1/k. This module builds the
// transform, the companion-form target dynamics, the control law, the
// gain condition that certifies exponential convergence, the steady-state
// error bound, and a simulator that reports both original and scaled states.
// =============================================================================

#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace contrakit::highgain {

/// A strict-feedback chain
///   x'   = slow(x, z)
///   z_j' = g1_j(z_1..z_j) + b_j z_{j+1} + g3_j(x, z)   (j < m)
///   z_m' = g1_m(z_1..z_m) + b_m u       + g3_m(x, z)
/// with declared growth near z = 0: |slow(0, z)| <= c1 ||z|| and
/// ||g3(0, z)|| <= c2 ||z|| (checked by sampling), plus slow(0,0) = 0 and
/// g3(0,0) = 0 so the origin is an equilibrium.
struct StrictFeedbackChain {
    std::size_t m = 0;
    std::vector<std::function<double(const StateVector& z)>> g1;
    std::vector<double> b;
    std::function<StateVector(double x, const StateVector& z)> g3;
    std::function<double(double x, const StateVector& z)> slow;
    double c1 = 0.0;
    double c2 = 0.0;
    BoxRegion region{{0.0}, {0.0}}; ///< analysis box in original coordinates (x, z)

    void validate() const;
};

/// Backstepping coordinates xi_hat_j = z_j - alpha_j(z_1..z_{j-1}) with
/// alpha_1 = 0 and each alpha_{j+1} chosen to cancel g1_j along the nominal
/// chain. `forward` and `inverse` are exact mutual inverses (the transform
/// is lower-triangular).
struct BacksteppingTransform {
    std::vector<std::function<double(const StateVector& z)>> alpha;
    std::function<StateVector(const StateVector& z)> forward;
    std::function<StateVector(const StateVector& xi_hat)> inverse;
    Matrix chain_matrix;  ///< superdiagonal b_1..b_{m-1}
    Matrix input_column;  ///< last basis vector (input enters the final row)
};

/// A tuned high-gain design: feedback coefficients a, shaping function rho
/// for the slow channel, companion target G, and the gain scaling
/// K = diag(k^{m-1}, ..., k, 1) with mu = 1/k.
struct HighGainDesign {
    double k = 0.0;
    double mu = 0.0;
    std::vector<double> a;
    std::function<double(double eta)> rho;
    Matrix companion;
    Matrix scaling;
    BacksteppingTransform transform;
};

/// Scaled coordinates eta = k^{m-1} x, xi = K xi_hat.
struct ScaledState {
    double eta = 0.0;
    StateVector xi;
};

/// Outcome of the gain condition sup ||d gbar3 / d xi|| < |lambda| / mu^2,
/// where lambda is the algebraically largest eigenvalue of the symmetric
/// part of the companion target (its magnitude is used) and gbar3 is the
/// residual the scaled closed loop leaves over the companion dynamics.
struct GainConditionCheck {
    bool ok = false;
    double threshold = 0.0;
    double jac_sup = 0.0;
    double margin = 0.0;
    StateVector worst; ///< original-coordinate sample achieving jac_sup
};

/// Residual magnitudes over the analysis box.
struct HighGainConstants {
    double c4 = 0.0;      ///< sup || gbar3 ||
    double c5 = 0.0;      ///< sup | rho'(eta) * scaled slow field |
    double jac_sup = 0.0; ///< sup || d gbar3 / d xi ||
};

/// Simulation output with both coordinate systems.
struct HighGainRun {
    Trajectory trajectory; ///< states are the original (x, z_1..z_m)
    std::vector<double> eta;
    std::vector<StateVector> xi;
    double steady_error = 0.0; ///< max || xi - (rho(eta), 0, ...) || over final window
    double window_start = 0.0;
};

/// Builds the backstepping transform for a validated chain.
[[nodiscard]] BacksteppingTransform backstepping_transform(const StrictFeedbackChain& chain);

/// Companion matrix with superdiagonal b_1..b_{m-1} and last row -a; throws
/// InputError when the result is not Hurwitz (with the failed test named).
[[nodiscard]] Matrix companion_matrix(const std::vector<double>& a, const std::vector<double>& b);

/// Assembles a design for gain k >= 1 (k = 1 means no timescale separation
/// and is admitted only so the gain condition can diagnose it).
[[nodiscard]] HighGainDesign make_high_gain_design(const StrictFeedbackChain& chain, double k,
                                                   std::vector<double> a,
                                                   std::function<double(double)> rho);

/// eta = k^{m-1} x, xi_j = k^{m-j} xi_hat_j. Round-trips with
/// unscale_states to relative accuracy ~1e-16 per coordinate.
[[nodiscard]] ScaledState scale_states(double k, std::size_t m, double x,
                                       const StateVector& xi_hat);
[[nodiscard]] std::pair<double, StateVector> unscale_states(double k, std::size_t m, double eta,
                                                            const StateVector& xi);

/// Full control: cancels the matched chain terms and applies companion
/// feedback u1 = k (-a . xi) + k a_1 rho(eta).
[[nodiscard]] double control_law(const StrictFeedbackChain& chain, const HighGainDesign& design,
                                 double x, const StateVector& z);

/// The residual gbar3(eta, xi): the difference between the actual scaled
/// chain derivative and the companion target (G xi + a_1 rho(eta) e_m) / mu.
[[nodiscard]] StateVector residual_field(const StrictFeedbackChain& chain,
                                         const HighGainDesign& design, double eta,
                                         const StateVector& xi);

/// |lambda_max(sym companion)| / mu^2 (see GainConditionCheck).
[[nodiscard]] double contraction_threshold(const HighGainDesign& design);

/// Checks the gain condition over the chain's analysis box.
[[nodiscard]] GainConditionCheck gain_condition_check(const StrictFeedbackChain& chain,
                                                      const HighGainDesign& design,
                                                      int per_axis = 9);

/// Residual magnitudes over the analysis box (shared scan with the check).
[[nodiscard]] HighGainConstants estimate_highgain_constants(const StrictFeedbackChain& chain,
                                                            const HighGainDesign& design,
                                                            int per_axis = 9);

/// Steady-state error bound (c4 + c5) / (threshold - jac_sup); throws
/// NotApplicableError when the gain condition fails.
[[nodiscard]] double steady_state_bound(const HighGainConstants& constants,
                                        const HighGainDesign& design);

/// Integrates the closed loop in original coordinates; requires dt <= mu/50.
/// A positive saturation clamps the input magnitude (states never clamp).
/// steady_error is measured in scaled coordinates against the slow manifold
/// xi = (rho(eta), 0, ..., 0) over the final 10% of samples.
[[nodiscard]] HighGainRun simulate_highgain(const StrictFeedbackChain& chain,
                                            const HighGainDesign& design, double x0,
                                            const StateVector& z0, double t_end, double dt,
                                            double saturation = 0.0);

} // namespace contrakit::highgain
