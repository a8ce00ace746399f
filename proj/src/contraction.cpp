#include "contrakit/contraction.hpp"

#include "contrakit/errors.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace contrakit::contraction {

namespace {

[[nodiscard]] std::string format_point(const StateVector& p) {
    std::string out = "(";
    for (std::size_t i = 0; i < p.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6g", p[i]);
        if (i > 0) out += ", ";
        out += buf;
    }
    out += ")";
    return out;
}

/// Local contraction rate at one sample: -1/2 * max eig of the congruence-
/// normalized form M^-1/2 (Mdot + M J + J^T M) M^-1/2.
[[nodiscard]] double local_rate(const numerics::VectorField& field, const StateVector& p,
                                const Metric& metric) {
    const Matrix jac = numerics::jacobian_fd(field, p);
    const Matrix m = metric.m_at(p);

    const auto m_eigs = numerics::sym_eig(m);
    if (m_eigs.values.front() < kMetricPdEpsilon) {
        throw InputError("metric is not positive definite at sample point " + format_point(p) +
                         " (minimum eigenvalue " + std::to_string(m_eigs.values.front()) + ")");
    }

    Matrix s = m * jac + jac.transpose() * m;
    if (!metric.constant()) {
        const StateVector deriv = field(p);
        s = metric.mdot_at(p, deriv) + s;
    }
    const Matrix m_inv_sqrt = numerics::spd_inv_sqrt(m);
    const Matrix w = (m_inv_sqrt * s * m_inv_sqrt).symmetric_part();
    return -0.5 * numerics::sym_eig(w).values.back();
}

struct ScanAccumulator {
    bool first = true;
    double min_rate = 0.0;
    StateVector worst_point;
    long samples = 0;
    double max_chi = 1.0;

    void visit(double rate, const StateVector& point, double chi) {
        ++samples;
        if (chi > max_chi) max_chi = chi;
        if (first || rate < min_rate) {
            first = false;
            min_rate = rate;
            worst_point = point;
        }
    }

    [[nodiscard]] ContractionReport report() const {
        ContractionReport rep;
        rep.rate = min_rate;
        rep.worst_point = worst_point;
        rep.worst_eig = -2.0 * min_rate;
        rep.samples = samples;
        rep.metric_chi = max_chi;
        if (min_rate >= kRateEpsilon) {
            rep.verdict = Verdict::contracting;
        } else if (min_rate > -kRateEpsilon) {
            rep.verdict = Verdict::semi_contracting;
        } else {
            rep.verdict = Verdict::not_contracting;
        }
        return rep;
    }
};

} // namespace

// -----------------------------------------------------------------------------
// Metric
// -----------------------------------------------------------------------------

Metric Metric::identity(std::size_t dim) {
    return from_theta(Matrix::identity(dim));
}

Metric Metric::from_theta(Matrix theta) {
    if (!theta.square()) throw InputError("metric factor Theta must be square");
    Metric m;
    m.constant_ = true;
    m.theta_ = std::move(theta);
    // Validate invertibility up front so failures name the construction site.
    (void)numerics::condition_number(m.theta_);
    return m;
}

Metric Metric::from_m(const Matrix& m) {
    return from_theta(numerics::spd_sqrt(m));
}

Metric Metric::state_dependent(ThetaFn theta_of, MdotFn mdot_of) {
    if (!theta_of) throw InputError("state-dependent metric requires a Theta map");
    Metric m;
    m.constant_ = false;
    m.theta_of_ = std::move(theta_of);
    m.mdot_of_ = std::move(mdot_of);
    return m;
}

Matrix Metric::theta_at(const StateVector& p) const {
    return constant_ ? theta_ : theta_of_(p);
}

Matrix Metric::m_at(const StateVector& p) const {
    const Matrix theta = theta_at(p);
    return theta.transpose() * theta;
}

Matrix Metric::mdot_at(const StateVector& p, const StateVector& deriv) const {
    if (constant_ || !mdot_of_) {
        const std::size_t d = constant_ ? theta_.rows() : theta_of_(p).rows();
        return Matrix(d, d);
    }
    return mdot_of_(p, deriv);
}

double Metric::chi_at(const StateVector& p) const {
    return numerics::condition_number(theta_at(p));
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::contracting: return "contracting";
        case Verdict::semi_contracting: return "semi-contracting";
        case Verdict::not_contracting: return "not-contracting";
    }
    return "unknown";
}

// -----------------------------------------------------------------------------
// Operations
// -----------------------------------------------------------------------------

Matrix generalized_jacobian(const Matrix& field_jac, const Matrix& theta,
                            const Matrix& theta_dot) {
    if (!theta.square() || !field_jac.square() || theta.rows() != field_jac.rows() ||
        theta_dot.rows() != theta.rows() || theta_dot.cols() != theta.cols()) {
        throw InputError("generalized_jacobian: dimension mismatch between Theta and Jacobian");
    }
    Matrix theta_inv(theta.rows(), theta.cols());
    try {
        theta_inv = theta.inverse();
    } catch (const InputError&) {
        // Re-raise with a quantitative diagnosis of how singular Theta is.
        const auto eigs = numerics::sym_eig(theta.transpose() * theta);
        const double smax = std::sqrt(std::max(0.0, eigs.values.back()));
        const double smin = std::sqrt(std::max(0.0, eigs.values.front()));
        const double cond = smin > 0.0 ? smax / smin : kInfinity;
        throw InputError("generalized_jacobian: Theta is singular (condition estimate " +
                         std::to_string(cond) + ")");
    }
    return (theta_dot + theta * field_jac) * theta_inv;
}

ContractionReport check_region(const numerics::VectorField& field, const BoxRegion& region,
                               const Metric& metric, int per_axis) {
    if (per_axis < 3) throw InputError("check_region requires per_axis >= 3");
    const auto grid = grid_sample(region, per_axis);

    ScanAccumulator acc;
    const bool const_metric = metric.constant();
    double const_chi = const_metric ? metric.chi_at(region.center()) : 1.0;
    for (const auto& p : grid) {
        const double chi = const_metric ? const_chi : metric.chi_at(p);
        acc.visit(local_rate(field, p, metric), p, chi);
    }
    return acc.report();
}

double robustness_bound(double chi, double d, double lambda) {
    if (chi < 1.0) throw InputError("robustness_bound: condition number chi must be >= 1");
    if (d < 0.0) throw InputError("robustness_bound: disturbance magnitude d must be >= 0");
    if (lambda < kRateEpsilon) {
        throw NotApplicableError(
            "robustness_bound requires a strictly positive contraction rate (got " +
            std::to_string(lambda) + ")");
    }
    return chi * d / lambda;
}

bool vanishing_perturbation_check(
    const std::function<Matrix(const StateVector&)>& jac_of_disturbance, const BoxRegion& region,
    double lambda, int per_axis) {
    if (lambda < kRateEpsilon) {
        throw NotApplicableError(
            "vanishing_perturbation_check requires a strictly positive contraction rate");
    }
    for (const auto& p : grid_sample(region, per_axis)) {
        if (numerics::induced_norm2(jac_of_disturbance(p)) > lambda) return false;
    }
    return true;
}

ContractionReport partial_contraction_check(
    const std::function<StateVector(const StateVector&, const StateVector&)>& field,
    const BoxRegion& target_region, const BoxRegion& frozen_region, const Metric& metric,
    int per_axis) {
    if (per_axis < 3) throw InputError("partial_contraction_check requires per_axis >= 3");

    const auto frozen_grid = grid_sample(frozen_region, per_axis);
    const auto target_grid = grid_sample(target_region, per_axis);

    ScanAccumulator acc;
    const bool const_metric = metric.constant();
    double const_chi = const_metric ? metric.chi_at(target_region.center()) : 1.0;
    for (const auto& frozen : frozen_grid) {
        const numerics::VectorField frozen_field = [&](const StateVector& target) {
            return field(target, frozen);
        };
        for (const auto& p : target_grid) {
            const double chi = const_metric ? const_chi : metric.chi_at(p);
            acc.visit(local_rate(frozen_field, p, metric), p, chi);
        }
    }
    return acc.report();
}

} // namespace contrakit::contraction
