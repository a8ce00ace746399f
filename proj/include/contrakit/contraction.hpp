#pragma once

// =============================================================================
// contrakit - Contraction Certification
// =============================================================================
// Grid-based certification (or falsification) of contraction for a vector
// field over a box region in a user-chosen metric, plus the robustness bound
// chi*d/lambda, the vanishing-perturbation test, and partial contraction with
// a frozen argument. Verdicts are evidence over a sampled grid, not formal
// proofs; reports record the worst sample so results are reproducible.
// =============================================================================

#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"
#include "contrakit/numerics.hpp"

#include <functional>
#include <string>

namespace contrakit::contraction {

/// Verdict separation threshold: rates within [-kRateEpsilon, kRateEpsilon]
/// count as semi-contracting (boundary-flat directions).
constexpr double kRateEpsilon = 1e-9;

/// Minimum eigenvalue for the metric to count as uniformly positive definite.
constexpr double kMetricPdEpsilon = 1e-9;

/// Differential metric M = Theta^T Theta, constant or state-dependent.
/// State-dependent metrics supply dM/dt analytically through mdot_of (a map
/// of the state and its derivative); there is no automatic differentiation.
class Metric {
public:
    using ThetaFn = std::function<Matrix(const StateVector&)>;
    using MdotFn = std::function<Matrix(const StateVector&, const StateVector& deriv)>;

    /// Identity metric of the given dimension.
    [[nodiscard]] static Metric identity(std::size_t dim);

    /// Constant metric from its factor Theta (M = Theta^T Theta).
    [[nodiscard]] static Metric from_theta(Matrix theta);

    /// Constant metric from M directly; Theta is the symmetric square root.
    [[nodiscard]] static Metric from_m(const Matrix& m);

    /// State-dependent metric. mdot_of may be empty (treated as zero).
    [[nodiscard]] static Metric state_dependent(ThetaFn theta_of, MdotFn mdot_of);

    [[nodiscard]] bool constant() const noexcept { return constant_; }
    [[nodiscard]] Matrix theta_at(const StateVector& p) const;
    [[nodiscard]] Matrix m_at(const StateVector& p) const;
    [[nodiscard]] Matrix mdot_at(const StateVector& p, const StateVector& deriv) const;

    /// Condition number of Theta at a point.
    [[nodiscard]] double chi_at(const StateVector& p) const;

private:
    bool constant_ = true;
    Matrix theta_;       // constant case
    ThetaFn theta_of_;   // state-dependent case
    MdotFn mdot_of_;     // empty => zero matrix
};

enum class Verdict { contracting, semi_contracting, not_contracting };

[[nodiscard]] std::string to_string(Verdict v);

/// Result of a region scan. rate is the minimum over samples of the local
/// contraction rate; worst_eig is the maximum over samples of the largest
/// eigenvalue of the tested symmetric form (= -2 * rate at the worst point).
struct ContractionReport {
    Verdict verdict = Verdict::not_contracting;
    double rate = 0.0;
    StateVector worst_point;
    double worst_eig = 0.0;
    long samples = 0;
    double metric_chi = 1.0;
};

/// Metric-transformed Jacobian (theta_dot + theta * J) * theta^-1 whose
/// uniform negative definiteness certifies contraction. Throws InputError
/// with a condition estimate when theta is singular.
[[nodiscard]] Matrix generalized_jacobian(const Matrix& field_jac, const Matrix& theta,
                                          const Matrix& theta_dot);

/// Scans a grid (per_axis >= 3 points per axis) over `region`. At each point
/// computes the local rate
///     lambda_p = -1/2 * max eig of M^-1/2 (Mdot + M J + J^T M) M^-1/2
/// and reports the minimum. Verdict: contracting when rate >= kRateEpsilon,
/// semi-contracting when |rate| < kRateEpsilon, else not-contracting.
/// Ties on equal rates resolve to the lexicographically smallest grid index.
/// Throws InputError naming the sample point when the metric loses positive
/// definiteness there.
[[nodiscard]] ContractionReport check_region(const numerics::VectorField& field,
                                             const BoxRegion& region, const Metric& metric,
                                             int per_axis = 21);

/// Asymptotic offset bound chi * d / lambda for a contracting system under a
/// bounded additive disturbance of magnitude d. Throws NotApplicableError
/// when lambda <= 0 and InputError for chi < 1 or d < 0.
[[nodiscard]] double robustness_bound(double chi, double d, double lambda);

/// True iff the induced 2-norm of the disturbance Jacobian stays <= lambda
/// at every grid sample (the vanishing-perturbation condition under which
/// convergence to the unperturbed trajectory is preserved).
[[nodiscard]] bool vanishing_perturbation_check(
    const std::function<Matrix(const StateVector&)>& jac_of_disturbance,
    const BoxRegion& region, double lambda, int per_axis = 21);

/// Partial contraction: checks the auxiliary system obtained by freezing the
/// second argument at every grid point of frozen_region, sweeping the first
/// argument over target_region. The report's rate is the minimum over the
/// joint grid; worst_point is the target-space sample of that minimum.
[[nodiscard]] ContractionReport partial_contraction_check(
    const std::function<StateVector(const StateVector& target, const StateVector& frozen)>& field,
    const BoxRegion& target_region, const BoxRegion& frozen_region, const Metric& metric,
    int per_axis = 21);

} // namespace contrakit::contraction
