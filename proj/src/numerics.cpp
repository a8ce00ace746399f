#include "contrakit/numerics.hpp"

#include "contrakit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace contrakit::numerics {

namespace {

/// Formats a double compactly for error messages.
std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

/// Roots of a monic polynomial (descending coefficients, coeffs[0] = 1) by
/// the Durand-Kerner iteration. Used only to name offending eigenvalues in
/// error messages; stability decisions go through the Routh test.
std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& coeffs) {
    const std::size_t deg = coeffs.size() - 1;
    std::vector<std::complex<double>> roots(deg);
    // Standard non-real starting points spread around a circle.
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> w(1.0, 0.0);
    for (std::size_t i = 0; i < deg; ++i) {
        w *= seed;
        roots[i] = w;
    }
    auto eval = [&](std::complex<double> s) {
        std::complex<double> acc(0.0, 0.0);
        for (double c : coeffs) acc = acc * s + c;
        return acc;
    };
    for (int iter = 0; iter < 200; ++iter) {
        double worst = 0.0;
        for (std::size_t i = 0; i < deg; ++i) {
            std::complex<double> denom(1.0, 0.0);
            for (std::size_t j = 0; j < deg; ++j) {
                if (j != i) denom *= roots[i] - roots[j];
            }
            if (std::abs(denom) < 1e-300) continue;
            const std::complex<double> delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            worst = std::max(worst, std::abs(delta));
        }
        if (worst < 1e-13) break;
    }
    return roots;
}

} // namespace

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

Trajectory rk4_integrate(const TimeField& field, const StateVector& x0,
                         double t0, double t1, double dt) {
    if (dt <= 0.0) throw InputError("rk4_integrate: dt must be positive");
    if (t1 <= t0) throw InputError("rk4_integrate: t1 must exceed t0");
    check_finite(x0, "rk4_integrate initial state");

    Trajectory traj;
    traj.step = dt;

    StateVector x = x0;
    double t = t0;
    traj.times.push_back(t);
    traj.states.push_back(x);

    auto eval = [&](double tt, const StateVector& xx, double last_ok) {
        StateVector d = field(tt, xx);
        for (double v : d) {
            if (!std::isfinite(v)) {
                throw DivergenceError(
                    "integration diverged: field non-finite at t=" + fmt(tt), last_ok);
            }
        }
        return d;
    };

    const std::size_t dim = x0.size();
    std::size_t k = 0;
    while (t < t1 - 1e-12) {
        const double h = std::min(dt, t1 - t);
        const StateVector k1 = eval(t, x, t);
        StateVector xtmp(dim);
        for (std::size_t i = 0; i < dim; ++i) xtmp[i] = x[i] + 0.5 * h * k1[i];
        const StateVector k2 = eval(t + 0.5 * h, xtmp, t);
        for (std::size_t i = 0; i < dim; ++i) xtmp[i] = x[i] + 0.5 * h * k2[i];
        const StateVector k3 = eval(t + 0.5 * h, xtmp, t);
        for (std::size_t i = 0; i < dim; ++i) xtmp[i] = x[i] + h * k3[i];
        const StateVector k4 = eval(t + h, xtmp, t);

        for (std::size_t i = 0; i < dim; ++i) {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        ++k;
        // Recompute time from the step count to keep the grid drift-free.
        t = (t + h >= t1 - 1e-12) ? t1 : t0 + static_cast<double>(k) * dt;
        for (double v : x) {
            if (!std::isfinite(v)) {
                throw DivergenceError("integration diverged: state non-finite at t=" + fmt(t),
                                      traj.times.back());
            }
        }
        traj.times.push_back(t);
        traj.states.push_back(x);
    }
    traj.inputs.assign(traj.times.size(), 0.0);
    return traj;
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

double fd_step(const StateVector& p) {
    return 1e-5 * std::max(1.0, norm(p));
}

Matrix jacobian_fd(const VectorField& field, const StateVector& p, double h) {
    if (h <= 0.0) throw InputError("jacobian_fd: step h must be positive");
    StateVector probe = p;
    const std::size_t n = p.size();
    Matrix jac;
    for (std::size_t j = 0; j < n; ++j) {
        probe[j] = p[j] + h;
        StateVector fp = field(probe);
        probe[j] = p[j] - h;
        StateVector fm = field(probe);
        probe[j] = p[j];
        for (double v : fp) {
            if (!std::isfinite(v)) {
                throw InputError("jacobian_fd: non-finite field value perturbing axis " +
                                 std::to_string(j) + " (+h)");
            }
        }
        for (double v : fm) {
            if (!std::isfinite(v)) {
                throw InputError("jacobian_fd: non-finite field value perturbing axis " +
                                 std::to_string(j) + " (-h)");
            }
        }
        if (j == 0) jac = Matrix(fp.size(), n);
        for (std::size_t r = 0; r < fp.size(); ++r) {
            jac(r, j) = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    return jac;
}

Matrix jacobian_fd(const VectorField& field, const StateVector& p) {
    return jacobian_fd(field, p, fd_step(p));
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem
// ---------------------------------------------------------------------------

EigenResult sym_eig(const Matrix& S) {
    if (!S.square()) throw InputError("sym_eig: matrix must be square");
    const double asym = S.asymmetry();
    if (asym > 1e-10) {
        throw InputError("sym_eig: matrix asymmetric (relative asymmetry " + fmt(asym) + ")");
    }

    const std::size_t n = S.rows();
    Matrix a = S.symmetric_part();  // scrub roundoff-level asymmetry
    Matrix v = Matrix::identity(n);

    auto offdiag = [&]() {
        double acc = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) acc += a(p, q) * a(p, q);
        return std::sqrt(2.0 * acc);
    };

    const double scale = std::max(a.frobenius_norm(), 1e-300);
    for (int sweep = 0; sweep < 100 && offdiag() > 1e-13 * scale; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a(p, q)) <= 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double apq = a(p, q);
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        const double arp = a(r, p);
                        const double arq = a(r, q);
                        a(r, p) = arp - s * (arq + tau * arp);
                        a(p, r) = a(r, p);
                        a(r, q) = arq + s * (arp - tau * arq);
                        a(q, r) = a(r, q);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    // Sort ascending, carrying eigenvector columns along.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    EigenResult res;
    res.values.resize(n);
    res.vectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        res.values[i] = a(order[i], order[i]);
        for (std::size_t r = 0; r < n; ++r) res.vectors(r, i) = v(r, order[i]);
    }
    return res;
}

double max_sym_eigenvalue(const Matrix& A) {
    const EigenResult e = sym_eig(A.symmetric_part());
    return e.values.back();
}

double induced_norm2(const Matrix& A) {
    const Matrix gram = (A.transpose() * A).symmetric_part();
    const EigenResult e = sym_eig(gram);
    return std::sqrt(std::max(0.0, e.values.back()));
}

double condition_number(const Matrix& T) {
    if (!T.square()) throw InputError("condition_number: matrix must be square");
    const Matrix gram = (T.transpose() * T).symmetric_part();
    const EigenResult e = sym_eig(gram);
    const double smax = std::sqrt(std::max(0.0, e.values.back()));
    const double smin = std::sqrt(std::max(0.0, e.values.front()));
    if (smin <= 1e-12 * smax) {
        throw InputError("condition_number: numerically singular (sigma_min ~ " +
                         fmt(smin) + ")");
    }
    return smax / smin;
}

Matrix spd_sqrt(const Matrix& S) {
    const EigenResult e = sym_eig(S);
    if (e.values.front() <= 0.0) {
        throw InputError("spd_sqrt: matrix not positive definite (min eigenvalue " +
                         fmt(e.values.front()) + ")");
    }
    const std::size_t n = S.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = std::sqrt(e.values[i]);
    return e.vectors * d * e.vectors.transpose();
}

Matrix spd_inv_sqrt(const Matrix& S) {
    const EigenResult e = sym_eig(S);
    if (e.values.front() <= 0.0) {
        throw InputError("spd_inv_sqrt: matrix not positive definite (min eigenvalue " +
                         fmt(e.values.front()) + ")");
    }
    const std::size_t n = S.rows();
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) d(i, i) = 1.0 / std::sqrt(e.values[i]);
    return e.vectors * d * e.vectors.transpose();
}

// ---------------------------------------------------------------------------
// Root finding
// ---------------------------------------------------------------------------

StateVector newton_root(const VectorField& fun, const StateVector& v0,
                        double tol, int max_iter) {
    if (tol <= 0.0) throw InputError("newton_root: tol must be positive");
    StateVector v = v0;
    StateVector r = fun(v);
    double res = norm(r);
    for (int iter = 0; iter < max_iter; ++iter) {
        if (res <= tol) return v;
        Matrix jac = jacobian_fd(fun, v);
        StateVector neg(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) neg[i] = -r[i];
        StateVector step;
        try {
            step = jac.solve(neg);
        } catch (const InputError&) {
            throw InputError("newton_root: singular Jacobian at iteration " +
                             std::to_string(iter));
        }
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += step[i];
        check_finite(v, "newton_root iterate");
        r = fun(v);
        res = norm(r);
    }
    if (res <= tol) return v;
    throw InputError("newton_root: no convergence after " + std::to_string(max_iter) +
                     " iterations (last residual " + fmt(res) + ")");
}

// ---------------------------------------------------------------------------
// Lyapunov equation
// ---------------------------------------------------------------------------

Matrix lyapunov_solve(const Matrix& A, const Matrix& Q) {
    if (!A.square() || !Q.square() || A.rows() != Q.rows()) {
        throw InputError("lyapunov_solve: A and Q must be square with equal sizes");
    }
    if (Q.asymmetry() > 1e-10) {
        throw InputError("lyapunov_solve: Q must be symmetric");
    }
    {
        const EigenResult eq = sym_eig(Q.symmetric_part());
        if (eq.values.front() <= 0.0) {
            throw InputError("lyapunov_solve: Q must be positive definite (min eigenvalue " +
                             fmt(eq.values.front()) + ")");
        }
    }
    std::string why;
    if (!is_hurwitz(A, &why)) {
        // Name the offending eigenvalue for the error message.
        const auto roots = polynomial_roots(characteristic_polynomial(A));
        double worst_re = -kInfinity;
        double worst_im = 0.0;
        for (const auto& r : roots) {
            if (r.real() > worst_re) {
                worst_re = r.real();
                worst_im = r.imag();
            }
        }
        throw InputError("lyapunov_solve: A is not Hurwitz (eigenvalue " + fmt(worst_re) +
                         (worst_im != 0.0 ? " +/- " + fmt(std::fabs(worst_im)) + "i" : "") +
                         "; " + why + ")");
    }

    // Unknowns: p_ij for i <= j, packed row-major over the upper triangle.
    const std::size_t n = A.rows();
    const std::size_t nn = n * (n + 1) / 2;
    auto pack = [n](std::size_t i, std::size_t j) {
        if (i > j) std::swap(i, j);
        return i * n - i * (i + 1) / 2 + j;
    };

    Matrix sys(nn, nn);
    std::vector<double> rhs(nn, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = r; c < n; ++c) {
            const std::size_t row = pack(r, c);
            // (A^T P)_rc = sum_k A(k,r) P(k,c); (P A)_rc = sum_k P(r,k) A(k,c)
            for (std::size_t k = 0; k < n; ++k) {
                sys(row, pack(k, c)) += A(k, r);
                sys(row, pack(r, k)) += A(k, c);
            }
            rhs[row] = -Q(r, c);
        }
    }
    const std::vector<double> sol = sys.solve(rhs);

    Matrix P(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            P(i, j) = sol[pack(i, j)];
            P(j, i) = P(i, j);
        }
    }
    return P;
}

// ---------------------------------------------------------------------------
// Polynomial stability
// ---------------------------------------------------------------------------

bool routh_hurwitz(const std::vector<double>& coeffs, std::string* why) {
    if (coeffs.size() < 2 || coeffs[0] <= 0.0) {
        if (why) *why = "Routh: leading coefficient must be positive";
        return false;
    }
    // All coefficients strictly positive is necessary; a zero coefficient is
    // the classic marginal (imaginary-axis) case and is rejected.
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (coeffs[i] <= 0.0) {
            if (why) {
                *why = "Routh: coefficient of s^" +
                       std::to_string(coeffs.size() - 1 - i) + " is " + fmt(coeffs[i]) +
                       " (must be positive)";
            }
            return false;
        }
    }

    const std::size_t deg = coeffs.size() - 1;
    const std::size_t width = (deg + 2) / 2;
    std::vector<std::vector<double>> table(deg + 1, std::vector<double>(width, 0.0));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        table[i % 2][i / 2] = coeffs[i];
    }
    for (std::size_t row = 2; row <= deg; ++row) {
        const auto& r1 = table[row - 2];
        const auto& r2 = table[row - 1];
        if (std::fabs(r2[0]) < 1e-300) {
            if (why) *why = "Routh: zero pivot in row " + std::to_string(row - 1) +
                            " (marginal or unstable)";
            return false;
        }
        for (std::size_t c = 0; c + 1 < width; ++c) {
            table[row][c] = (r2[0] * r1[c + 1] - r1[0] * r2[c + 1]) / r2[0];
        }
        bool all_zero = true;
        for (double vcell : table[row]) {
            if (vcell != 0.0) { all_zero = false; break; }
        }
        if (all_zero) {
            if (why) *why = "Routh: zero row at row " + std::to_string(row) +
                            " (imaginary-axis roots)";
            return false;
        }
    }
    for (std::size_t row = 0; row <= deg; ++row) {
        if (table[row][0] <= 0.0) {
            if (why) *why = "Routh: first-column sign change at row " + std::to_string(row);
            return false;
        }
    }
    return true;
}

std::vector<double> characteristic_polynomial(const Matrix& A) {
    if (!A.square()) throw InputError("characteristic_polynomial: matrix must be square");
    const std::size_t n = A.rows();
    // Faddeev-LeVerrier: p(s) = s^n + c[n-1] s^(n-1) + ... + c[0]
    std::vector<double> c(n + 1, 0.0);
    c[n] = 1.0;
    Matrix M(n, n);
    auto trace = [n](const Matrix& m) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += m(i, i);
        return acc;
    };
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix AM = A * M;
        for (std::size_t i = 0; i < n; ++i) AM(i, i) += c[n - k + 1];
        M = AM;
        c[n - k] = -trace(A * M) / static_cast<double>(k);
    }
    std::vector<double> desc(n + 1);
    for (std::size_t i = 0; i <= n; ++i) desc[i] = c[n - i];
    return desc;
}

bool is_hurwitz(const Matrix& A, std::string* why) {
    return routh_hurwitz(characteristic_polynomial(A), why);
}

// ---------------------------------------------------------------------------
// Scalar optimization
// ---------------------------------------------------------------------------

std::pair<double, double> golden_section_max(const std::function<double(double)>& fn,
                                             double lo, double hi, double tol) {
    if (hi <= lo) throw InputError("golden_section_max: empty interval");
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = fn(x1);
    double f2 = fn(x2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = fn(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = fn(x1);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, fn(xm)};
}

// ---------------------------------------------------------------------------
// Scalar powers
// ---------------------------------------------------------------------------

double ipow(double base, long long e) {
    if (e < 0) return 1.0 / ipow(base, -e);
    double result = 1.0;
    double acc = base;
    while (e > 0) {
        if (e & 1) result *= acc;
        e >>= 1;
        if (e > 0) acc *= acc;
    }
    return result;
}

double rpow(double x, long long p, long long q) {
    if (q == 0) return std::numeric_limits<double>::quiet_NaN();
    if (q < 0) {
        p = -p;
        q = -q;
    }
    const double expo = static_cast<double>(p) / static_cast<double>(q);
    if (q % 2 == 1) {
        // Odd root: x^(p/q) = (x^(1/q))^p is real for every x; the sign
        // survives only when the numerator is odd.
        const double mag = std::pow(std::fabs(x), expo);
        return (x < 0.0 && p % 2 != 0) ? -mag : mag;
    }
    return std::pow(x, expo);
}

} // namespace contrakit::numerics
