#pragma once

// =============================================================================
// contrakit - Numerical Kernels
// =============================================================================
// Fixed-step RK4 integration, central-difference Jacobians, a cyclic Jacobi
// eigensolver for symmetric matrices, condition numbers, Newton root finding,
// a direct Lyapunov-equation solver, the Routh stability test, and scalar
// golden-section maximization. Everything here is a pure function of its
// inputs; results are deterministic.
// =============================================================================

#include "contrakit/matrix.hpp"
#include "contrakit/model.hpp"

#include <functional>

namespace contrakit::numerics {

/// Time-dependent vector field for integration.
using TimeField = std::function<StateVector(double t, const StateVector& x)>;

/// Autonomous vector field (maps a point to a derivative or any vector).
using VectorField = std::function<StateVector(const StateVector& x)>;

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Classical fixed-step 4th-order Runge-Kutta from t0 to t1.
/// The final recorded time lands within dt of t1 (the last step is shortened
/// to hit t1 exactly). Throws DivergenceError carrying the last valid time
/// when the state or the field stops being finite mid-run.
/// Trajectory.inputs is filled with zeros; closed-loop simulators overwrite it.
[[nodiscard]] Trajectory rk4_integrate(const TimeField& field, const StateVector& x0,
                                       double t0, double t1, double dt);

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

/// Default finite-difference step for a point p: 1e-5 * max(1, ||p||),
/// balancing truncation against rounding at double precision.
[[nodiscard]] double fd_step(const StateVector& p);

/// Central-difference Jacobian of `field` at p with step h (componentwise
/// error O(h^2)). Throws InputError naming the offending axis when an
/// evaluation is non-finite.
[[nodiscard]] Matrix jacobian_fd(const VectorField& field, const StateVector& p, double h);

/// Convenience overload using fd_step(p).
[[nodiscard]] Matrix jacobian_fd(const VectorField& field, const StateVector& p);

// ---------------------------------------------------------------------------
// Symmetric eigenproblem
// ---------------------------------------------------------------------------

/// Full spectrum of a symmetric matrix.
struct EigenResult {
    std::vector<double> values;  ///< ascending
    Matrix vectors;              ///< orthonormal columns, vectors.col(i) <-> values[i]
};

/// Cyclic Jacobi rotations until off-diagonal mass is negligible.
/// Requires S square and symmetric within 1e-10 relative (use
/// Matrix::symmetric_part() first if the input carries roundoff asymmetry);
/// guarantees reconstruction ||Q L Q^T - S|| <= 1e-10 ||S||.
[[nodiscard]] EigenResult sym_eig(const Matrix& S);

/// Largest eigenvalue of the symmetric part of A.
[[nodiscard]] double max_sym_eigenvalue(const Matrix& A);

/// Induced 2-norm (largest singular value) via sym_eig of A^T A.
[[nodiscard]] double induced_norm2(const Matrix& A);

/// Condition number sigma_max / sigma_min of a square nonsingular matrix.
/// Throws InputError with the sigma_min estimate when numerically singular
/// (sigma_min <= 1e-12 * sigma_max).
[[nodiscard]] double condition_number(const Matrix& T);

/// Symmetric square root of a symmetric positive-definite matrix.
[[nodiscard]] Matrix spd_sqrt(const Matrix& S);

/// Inverse symmetric square root of a symmetric positive-definite matrix.
[[nodiscard]] Matrix spd_inv_sqrt(const Matrix& S);

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

constexpr double kNewtonTol = 1e-10;
constexpr int kNewtonMaxIter = 50;

/// Damped-free Newton iteration on fun(v) = 0 with finite-difference
/// Jacobians. Postcondition: ||fun(result)|| <= tol. Throws InputError on a
/// singular Jacobian or when max_iter is exceeded (message carries the last
/// residual).
[[nodiscard]] StateVector newton_root(const VectorField& fun, const StateVector& v0,
                                      double tol = kNewtonTol, int max_iter = kNewtonMaxIter);

// ---------------------------------------------------------------------------
// Lyapunov equation
// ---------------------------------------------------------------------------

/// Solves A^T P + P A = -Q for symmetric positive-definite P, as a dense
/// linear system in the n(n+1)/2 distinct entries of P. Requires A Hurwitz
/// (checked via the eigenvalues of the characteristic polynomial through the
/// Routh test) and Q symmetric positive definite. Throws InputError otherwise.
[[nodiscard]] Matrix lyapunov_solve(const Matrix& A, const Matrix& Q);

// ---------------------------------------------------------------------------
// Polynomial stability
// ---------------------------------------------------------------------------

/// Routh criterion on p(s) = c0 s^n + c1 s^(n-1) + ... + cn with c0 > 0.
/// Returns true iff all roots have negative real parts. `why` (optional)
/// receives the failed row description on rejection, including marginal
/// (zero-row / zero-pivot) cases.
[[nodiscard]] bool routh_hurwitz(const std::vector<double>& coeffs, std::string* why = nullptr);

/// Characteristic polynomial coefficients (monic, descending powers) of a
/// square matrix via the Faddeev-LeVerrier recursion.
[[nodiscard]] std::vector<double> characteristic_polynomial(const Matrix& A);

/// True iff all eigenvalues of A have negative real parts.
[[nodiscard]] bool is_hurwitz(const Matrix& A, std::string* why = nullptr);

// ---------------------------------------------------------------------------
// Scalar optimization
// ---------------------------------------------------------------------------

/// Golden-section maximization of a unimodal function on [lo, hi] to the
/// given interval tolerance. Returns (argmax, max).
[[nodiscard]] std::pair<double, double> golden_section_max(
    const std::function<double(double)>& fn, double lo, double hi, double tol = 1e-6);

// ---------------------------------------------------------------------------
// Scalar powers (shared by the expression evaluator and native examples so
// both sides compute bit-identical values)
// ---------------------------------------------------------------------------

/// Integer power by repeated squaring; negative exponents via reciprocal.
[[nodiscard]] double ipow(double base, long long e);

/// Real-valued rational power through the odd root: for odd q,
/// x^(p/q) = (x^(1/q))^p = sign(x)^p * |x|^(p/q), which keeps fields like
/// x^(4/3) real (and nonnegative) on negative arguments where std::pow
/// would return NaN. Even q falls back to std::pow.
[[nodiscard]] double rpow(double x, long long p, long long q);

} // namespace contrakit::numerics
