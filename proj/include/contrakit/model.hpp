#pragma once

// =============================================================================
// contrakit - Core Model Types
// =============================================================================
// Shared value types for two-timescale systems: states, box regions, vector
// fields, control laws, trajectories, and the constant set every convergence
// bound is built from. All types are immutable value records after
// construction and safe to share across threads.
// =============================================================================

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace contrakit {

/// Dense state vector. Entries are dimensionless unless a system declares
/// units. Use check_finite() to enforce the no-NaN/no-Inf invariant at
/// module boundaries.
using StateVector = std::vector<double>;

/// Throws InputError when v contains NaN or Inf; `what` names the offender.
void check_finite(const StateVector& v, const std::string& what);

/// Euclidean norm.
[[nodiscard]] double norm(const StateVector& v);

/// Axis-aligned box region (compact set). Zero-width axes are permitted.
struct BoxRegion {
    StateVector lower;
    StateVector upper;

    BoxRegion() = default;
    BoxRegion(StateVector lo, StateVector hi);

    [[nodiscard]] std::size_t dim() const noexcept { return lower.size(); }
    [[nodiscard]] StateVector center() const;

    /// Cartesian product of two boxes (slow x fast joint region).
    [[nodiscard]] static BoxRegion product(const BoxRegion& a, const BoxRegion& b);
};

/// True iff lower[i] <= p[i] <= upper[i] for every axis (boundary inclusive).
/// Throws InputError on dimension mismatch.
[[nodiscard]] bool in_region(const StateVector& p, const BoxRegion& r);

/// Uniform grid over a box with per_axis points per axis (per_axis >= 2 so
/// every corner is included). Points are emitted in lexicographic order by
/// axis index: the last axis varies fastest. Deterministic and order-stable.
[[nodiscard]] std::vector<StateVector> grid_sample(const BoxRegion& r, int per_axis);

/// Two-timescale system
///     x' = f(x, z, u)
///     mu z' = g(x, z, mu, u)
/// where g is stored before the division by mu so that g can be evaluated at
/// mu = 0 (used for slow-manifold roots). m may be 0 for a pure slow system.
struct TwoTimescaleSystem {
    std::size_t n = 0;  ///< slow dimension
    std::size_t m = 0;  ///< fast dimension
    std::function<StateVector(const StateVector& x, const StateVector& z, double u)> f;
    std::function<StateVector(const StateVector& x, const StateVector& z, double mu, double u)> g;
    double mu = 0.0;  ///< perturbation parameter in [0, 1]
    BoxRegion slow_region;
    BoxRegion fast_region;

    /// Validates dimensions, mu range, and field finiteness at region centers.
    void validate() const;
};

/// Two-part control law u = u1(x) + u2(x, z). The fast part must vanish on
/// the slow manifold and satisfy |u2(x,z)| <= d2 * ||z - z_ds(x)|| on the
/// design region (checked numerically by the composite module).
struct ControlLaw {
    std::function<double(const StateVector& x)> u1;
    std::function<double(const StateVector& x, const StateVector& z)> u2;
};

/// Fixed-step trajectory record. `states` holds the full stacked state per
/// step; `inputs` holds the scalar control applied at each step so that
/// bound checks can replay the fast-part decay.
struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<double> inputs;
    double step = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return times.size(); }
    void validate() const;
};

/// Constants feeding the closed-form convergence bounds.
///   lambda_x, lambda_z : contraction rates (1/s), fast rate in fast time
///   chi_x, chi_z       : metric condition numbers (>= 1)
///   L1, L2, L_u        : Lipschitz constants (mu-variation of g; f in z; f in u)
///   d1                 : sup of manifold drift ||dz_ds/dx * f||
///   d2                 : fast-part growth ratio bound
///   d_b                : external disturbance magnitude
///   d_e                : sup of virtual-manifold drift (tracking designs)
///   d_q                : sup ||dQ/dz|| for the exponential-convergence test
struct BoundSet {
    double lambda_x = 0.0;
    double lambda_z = 0.0;
    double chi_x = 1.0;
    double chi_z = 1.0;
    double L1 = 0.0;
    double L2 = 0.0;
    double L_u = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d_b = 0.0;
    double d_e = 0.0;
    double d_q = 0.0;
    double mu = 0.0;
    int per_axis = 0;  ///< grid density used to estimate the constants

    /// Rates positive where required, condition numbers >= 1, constants >= 0.
    void validate() const;
};

constexpr double kInfinity = std::numeric_limits<double>::infinity();

} // namespace contrakit
