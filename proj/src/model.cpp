#include "contrakit/model.hpp"

#include "contrakit/errors.hpp"

#include <cmath>

namespace contrakit {

void check_finite(const StateVector& v, const std::string& what) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw InputError(what + ": non-finite entry at index " + std::to_string(i));
        }
    }
}

double norm(const StateVector& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

BoxRegion::BoxRegion(StateVector lo, StateVector hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) {
        throw InputError("BoxRegion: lower and upper dimensions differ");
    }
    check_finite(lower, "BoxRegion lower");
    check_finite(upper, "BoxRegion upper");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (lower[i] > upper[i]) {
            throw InputError("BoxRegion: lower > upper on axis " + std::to_string(i));
        }
    }
}

StateVector BoxRegion::center() const {
    StateVector c(dim());
    for (std::size_t i = 0; i < dim(); ++i) c[i] = 0.5 * (lower[i] + upper[i]);
    return c;
}

BoxRegion BoxRegion::product(const BoxRegion& a, const BoxRegion& b) {
    StateVector lo = a.lower;
    StateVector hi = a.upper;
    lo.insert(lo.end(), b.lower.begin(), b.lower.end());
    hi.insert(hi.end(), b.upper.begin(), b.upper.end());
    return BoxRegion(std::move(lo), std::move(hi));
}

bool in_region(const StateVector& p, const BoxRegion& r) {
    if (p.size() != r.dim()) {
        throw InputError("in_region: point dimension " + std::to_string(p.size()) +
                         " does not match region dimension " + std::to_string(r.dim()));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < r.lower[i] || p[i] > r.upper[i]) return false;
    }
    return true;
}

std::vector<StateVector> grid_sample(const BoxRegion& r, int per_axis) {
    if (per_axis < 2) {
        throw InputError("grid_sample: per_axis must be >= 2 so corners are included");
    }
    const std::size_t d = r.dim();
    std::vector<StateVector> points;
    if (d == 0) return points;

    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= static_cast<std::size_t>(per_axis);
    points.reserve(total);

    std::vector<int> idx(d, 0);
    StateVector p(d);
    for (std::size_t count = 0; count < total; ++count) {
        for (std::size_t ax = 0; ax < d; ++ax) {
            const double t = static_cast<double>(idx[ax]) / (per_axis - 1);
            p[ax] = r.lower[ax] + t * (r.upper[ax] - r.lower[ax]);
        }
        points.push_back(p);
        // Advance the mixed-radix counter; last axis varies fastest.
        for (std::size_t ax = d; ax-- > 0;) {
            if (++idx[ax] < per_axis) break;
            idx[ax] = 0;
        }
    }
    return points;
}

void TwoTimescaleSystem::validate() const {
    if (n == 0) throw InputError("TwoTimescaleSystem: slow dimension must be >= 1");
    if (!f) throw InputError("TwoTimescaleSystem: slow field f is not set");
    if (m > 0 && !g) throw InputError("TwoTimescaleSystem: fast field g is not set");
    if (mu < 0.0 || mu > 1.0) {
        throw InputError("TwoTimescaleSystem: mu must lie in [0, 1]");
    }
    if (slow_region.dim() != n) {
        throw InputError("TwoTimescaleSystem: slow_region dimension does not match n");
    }
    if (fast_region.dim() != m) {
        throw InputError("TwoTimescaleSystem: fast_region dimension does not match m");
    }
    const StateVector xc = slow_region.center();
    const StateVector zc = fast_region.center();
    check_finite(f(xc, zc, 0.0), "TwoTimescaleSystem f at region center");
    if (m > 0) {
        check_finite(g(xc, zc, mu, 0.0), "TwoTimescaleSystem g at region center");
        check_finite(g(xc, zc, 0.0, 0.0), "TwoTimescaleSystem g at mu=0");
    }
}

void Trajectory::validate() const {
    if (times.size() != states.size() || times.size() != inputs.size()) {
        throw InputError("Trajectory: times/states/inputs lengths differ");
    }
    if (step <= 0.0) throw InputError("Trajectory: step must be positive");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            throw InputError("Trajectory: times must be strictly increasing");
        }
    }
}

void BoundSet::validate() const {
    if (chi_x < 1.0 || chi_z < 1.0) {
        throw InputError("BoundSet: condition numbers must be >= 1");
    }
    for (double c : {L1, L2, L_u, d1, d2, d_b, d_e, d_q}) {
        if (c < 0.0) throw InputError("BoundSet: constants must be nonnegative");
    }
}

} // namespace contrakit
