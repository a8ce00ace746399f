#include "contrakit/highgain.hpp"

#include "contrakit/errors.hpp"
#include "contrakit/numerics.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <utility>

namespace contrakit::highgain {

namespace {

/// Central-difference partial of a scalar function of z with respect to z_k.
[[nodiscard]] double fd_partial(const std::function<double(const StateVector&)>& fn,
                                const StateVector& z, std::size_t k) {
    const double h = numerics::fd_step(z);
    StateVector hi = z, lo = z;
    hi[k] += h;
    lo[k] -= h;
    return (fn(hi) - fn(lo)) / (2.0 * h);
}

/// Nominal chain derivative of z_k (no residual g3, ignoring the input):
/// valid for k <= m-2, which is all the backstepping recursion needs.
[[nodiscard]] double nominal_rate(const StrictFeedbackChain& chain, const StateVector& z,
                                  std::size_t k) {
    return chain.g1[k](z) + chain.b[k] * z[k + 1];
}

/// Full chain derivative including residual and input.
[[nodiscard]] StateVector chain_rate(const StrictFeedbackChain& chain, double x,
                                     const StateVector& z, double u) {
    const StateVector residual = chain.g3(x, z);
    StateVector out(chain.m);
    for (std::size_t j = 0; j < chain.m; ++j) {
        const double feed = (j + 1 < chain.m) ? z[j + 1] : u;
        out[j] = chain.g1[j](z) + chain.b[j] * feed + residual[j];
    }
    return out;
}

struct BoxScan {
    HighGainConstants constants;
    StateVector worst;
};

/// One pass over the analysis box collecting every residual magnitude.
[[nodiscard]] BoxScan scan_box(const StrictFeedbackChain& chain, const HighGainDesign& design,
                               int per_axis) {
    if (per_axis < 3) throw InputError("analysis box scan requires per_axis >= 3");
    if (chain.region.dim() != chain.m + 1) {
        throw InputError("chain analysis box must cover (x, z_1..z_m)");
    }
    BoxScan scan;
    scan.worst = chain.region.center();
    for (const auto& p : grid_sample(chain.region, per_axis)) {
        const double x = p[0];
        const StateVector z(p.begin() + 1, p.end());
        const StateVector xi_hat = design.transform.forward(z);
        const ScaledState s = scale_states(design.k, chain.m, x, xi_hat);

        const StateVector res = residual_field(chain, design, s.eta, s.xi);
        scan.constants.c4 = std::max(scan.constants.c4, norm(res));

        const double h = 1e-5 * std::max(1.0, std::abs(s.eta));
        const double rho_slope = (design.rho(s.eta + h) - design.rho(s.eta - h)) / (2.0 * h);
        const double scaled_slow =
            numerics::ipow(design.k, static_cast<long long>(chain.m) - 1) * chain.slow(x, z);
        scan.constants.c5 = std::max(scan.constants.c5, std::abs(rho_slope * scaled_slow));

        const numerics::VectorField res_of_xi = [&](const StateVector& xi) {
            return residual_field(chain, design, s.eta, xi);
        };
        const double jnorm = numerics::induced_norm2(numerics::jacobian_fd(res_of_xi, s.xi));
        if (jnorm > scan.constants.jac_sup) {
            scan.constants.jac_sup = jnorm;
            scan.worst = p;
        }
    }
    return scan;
}

} // namespace

// -----------------------------------------------------------------------------
// Chain validation
// -----------------------------------------------------------------------------

void StrictFeedbackChain::validate() const {
    if (m < 1) throw InputError("chain must have at least one fast state");
    if (g1.size() != m) throw InputError("chain needs exactly m matched nonlinearities g1");
    if (b.size() != m) throw InputError("chain needs exactly m gains b");
    for (std::size_t j = 0; j < m; ++j) {
        if (!g1[j]) throw InputError("chain nonlinearity g1_" + std::to_string(j + 1) +
                                     " is missing");
        if (!(b[j] > 0.0)) {
            throw InputError("chain gain b_" + std::to_string(j + 1) + " must be positive");
        }
    }
    if (!g3 || !slow) throw InputError("chain requires residual g3 and slow field");
    if (c1 < 0.0 || c2 < 0.0) throw InputError("growth constants c1, c2 must be >= 0");

    const StateVector origin(m, 0.0);
    if (std::abs(slow(0.0, origin)) > 1e-12) {
        throw InputError("chain invariant violated: slow(0, 0) must vanish");
    }
    if (norm(g3(0.0, origin)) > 1e-12) {
        throw InputError("chain invariant violated: g3(0, 0) must vanish");
    }

    // Sampled growth check near z = 0.
    const BoxRegion small(StateVector(m, -0.1), StateVector(m, 0.1));
    for (const auto& z : grid_sample(small, 5)) {
        const double r = norm(z);
        if (r < 1e-12) continue;
        const double slack = 1e-9 + 1e-6 * r;
        if (std::abs(slow(0.0, z)) > c1 * r + slack) {
            throw InputError("declared growth violated: |slow(0, z)| exceeds c1 ||z|| near 0");
        }
        if (norm(g3(0.0, z)) > c2 * r + slack) {
            throw InputError("declared growth violated: ||g3(0, z)|| exceeds c2 ||z|| near 0");
        }
    }
}

// -----------------------------------------------------------------------------
// Transform and design
// -----------------------------------------------------------------------------

BacksteppingTransform backstepping_transform(const StrictFeedbackChain& chain) {
    chain.validate();
    const std::size_t m = chain.m;
    const auto chain_copy = std::make_shared<StrictFeedbackChain>(chain);

    BacksteppingTransform t;
    t.alpha.resize(m);
    t.alpha[0] = [](const StateVector&) { return 0.0; };
    for (std::size_t idx = 1; idx < m; ++idx) {
        const auto prev = t.alpha[idx - 1];
        t.alpha[idx] = [chain_copy, prev, idx](const StateVector& z) {
            double total = -chain_copy->g1[idx - 1](z);
            for (std::size_t k = 0; k + 1 < idx; ++k) {
                total += fd_partial(prev, z, k) * nominal_rate(*chain_copy, z, k);
            }
            return total / chain_copy->b[idx - 1];
        };
    }

    auto alphas = t.alpha;
    t.forward = [alphas, m](const StateVector& z) {
        if (z.size() != m) throw InputError("backstepping forward: state dimension mismatch");
        StateVector xi_hat(m);
        for (std::size_t j = 0; j < m; ++j) xi_hat[j] = z[j] - alphas[j](z);
        return xi_hat;
    };
    t.inverse = [alphas, m](const StateVector& xi_hat) {
        if (xi_hat.size() != m) throw InputError("backstepping inverse: dimension mismatch");
        StateVector z(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) z[j] = xi_hat[j] + alphas[j](z);
        return z;
    };

    t.chain_matrix = Matrix(m, m);
    for (std::size_t j = 0; j + 1 < m; ++j) t.chain_matrix(j, j + 1) = chain.b[j];
    t.input_column = Matrix(m, 1);
    t.input_column(m - 1, 0) = 1.0;
    return t;
}

Matrix companion_matrix(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t m = a.size();
    if (m == 0) throw InputError("companion_matrix: feedback coefficients must be nonempty");
    if (b.size() + 1 != m) {
        throw InputError("companion_matrix: expected m-1 superdiagonal gains");
    }
    Matrix g(m, m);
    for (std::size_t j = 0; j + 1 < m; ++j) g(j, j + 1) = b[j];
    for (std::size_t j = 0; j < m; ++j) g(m - 1, j) = -a[j];

    const auto coeffs = numerics::characteristic_polynomial(g);
    std::string why;
    if (!numerics::routh_hurwitz(coeffs, &why)) {
        throw InputError("companion matrix is not Hurwitz: " + why);
    }
    return g;
}

HighGainDesign make_high_gain_design(const StrictFeedbackChain& chain, double k,
                                     std::vector<double> a, std::function<double(double)> rho) {
    chain.validate();
    if (!(k >= 1.0)) throw InputError("high-gain design requires k >= 1");
    if (a.size() != chain.m) {
        throw InputError("high-gain design needs one feedback coefficient per chain state");
    }
    if (!rho) throw InputError("high-gain design requires a shaping function rho");

    HighGainDesign d;
    d.k = k;
    d.mu = 1.0 / k;
    d.a = std::move(a);
    d.rho = std::move(rho);
    std::vector<double> superdiag(chain.b.begin(), chain.b.end() - 1);
    d.companion = companion_matrix(d.a, superdiag);
    d.scaling = Matrix(chain.m, chain.m);
    for (std::size_t j = 0; j < chain.m; ++j) {
        d.scaling(j, j) = numerics::ipow(k, static_cast<long long>(chain.m) - 1 -
                                                static_cast<long long>(j));
    }
    d.transform = backstepping_transform(chain);
    return d;
}

ScaledState scale_states(double k, std::size_t m, double x, const StateVector& xi_hat) {
    if (!(k > 0.0)) throw InputError("scale_states requires k > 0");
    if (xi_hat.size() != m) throw InputError("scale_states: dimension mismatch");
    ScaledState s;
    s.eta = numerics::ipow(k, static_cast<long long>(m) - 1) * x;
    s.xi.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        s.xi[j] = numerics::ipow(k, static_cast<long long>(m) - 1 - static_cast<long long>(j)) *
                  xi_hat[j];
    }
    return s;
}

std::pair<double, StateVector> unscale_states(double k, std::size_t m, double eta,
                                              const StateVector& xi) {
    if (!(k > 0.0)) throw InputError("unscale_states requires k > 0");
    if (xi.size() != m) throw InputError("unscale_states: dimension mismatch");
    const double x = eta / numerics::ipow(k, static_cast<long long>(m) - 1);
    StateVector xi_hat(m);
    for (std::size_t j = 0; j < m; ++j) {
        xi_hat[j] = xi[j] / numerics::ipow(k, static_cast<long long>(m) - 1 -
                                                  static_cast<long long>(j));
    }
    return {x, xi_hat};
}

// -----------------------------------------------------------------------------
// Control and residual
// -----------------------------------------------------------------------------

double control_law(const StrictFeedbackChain& chain, const HighGainDesign& design, double x,
                   const StateVector& z) {
    const std::size_t m = chain.m;
    const StateVector xi_hat = design.transform.forward(z);
    const ScaledState s = scale_states(design.k, m, x, xi_hat);

    double feedback = 0.0;
    for (std::size_t j = 0; j < m; ++j) feedback -= design.a[j] * s.xi[j];
    const double u1 = design.k * feedback + design.k * design.a[0] * design.rho(s.eta);

    // Cancel the matched terms of the final chain row along the nominal flow.
    double feedforward = 0.0;
    const auto& alpha_last = design.transform.alpha[m - 1];
    for (std::size_t k = 0; k + 1 < m; ++k) {
        feedforward += fd_partial(alpha_last, z, k) * nominal_rate(chain, z, k);
    }
    return (-chain.g1[m - 1](z) + feedforward + u1) / chain.b[m - 1];
}

StateVector residual_field(const StrictFeedbackChain& chain, const HighGainDesign& design,
                           double eta, const StateVector& xi) {
    const std::size_t m = chain.m;
    const auto [x, xi_hat] = unscale_states(design.k, m, eta, xi);
    const StateVector z = design.transform.inverse(xi_hat);
    const double u = control_law(chain, design, x, z);

    const StateVector z_rate = chain_rate(chain, x, z, u);
    const Matrix forward_jac = numerics::jacobian_fd(design.transform.forward, z);
    const StateVector xi_hat_rate = forward_jac.apply(z_rate);

    StateVector xi_rate(m);
    for (std::size_t j = 0; j < m; ++j) {
        xi_rate[j] = numerics::ipow(design.k, static_cast<long long>(m) - 1 -
                                                  static_cast<long long>(j)) *
                     xi_hat_rate[j];
    }

    StateVector target = design.companion.apply(xi);
    target[m - 1] += design.a[0] * design.rho(eta);

    StateVector residual(m);
    for (std::size_t j = 0; j < m; ++j) residual[j] = xi_rate[j] - target[j] / design.mu;
    return residual;
}

double contraction_threshold(const HighGainDesign& design) {
    const double lambda =
        numerics::sym_eig(design.companion.symmetric_part()).values.back();
    return std::abs(lambda) / (design.mu * design.mu);
}

GainConditionCheck gain_condition_check(const StrictFeedbackChain& chain,
                                        const HighGainDesign& design, int per_axis) {
    const BoxScan scan = scan_box(chain, design, per_axis);
    GainConditionCheck check;
    check.threshold = contraction_threshold(design);
    check.jac_sup = scan.constants.jac_sup;
    check.margin = check.threshold - check.jac_sup;
    check.ok = check.margin > 0.0;
    check.worst = scan.worst;
    return check;
}

HighGainConstants estimate_highgain_constants(const StrictFeedbackChain& chain,
                                              const HighGainDesign& design, int per_axis) {
    return scan_box(chain, design, per_axis).constants;
}

double steady_state_bound(const HighGainConstants& constants, const HighGainDesign& design) {
    const double denom = contraction_threshold(design) - constants.jac_sup;
    if (denom <= 0.0) {
        throw NotApplicableError(
            "steady_state_bound: gain condition fails (residual sensitivity " +
            std::to_string(constants.jac_sup) + " >= threshold " +
            std::to_string(contraction_threshold(design)) + "); raise the gain k");
    }
    return (constants.c4 + constants.c5) / denom;
}

// -----------------------------------------------------------------------------
// Simulation
// -----------------------------------------------------------------------------

HighGainRun simulate_highgain(const StrictFeedbackChain& chain, const HighGainDesign& design,
                              double x0, const StateVector& z0, double t_end, double dt,
                              double saturation) {
    chain.validate();
    if (z0.size() != chain.m) throw InputError("simulate_highgain: bad initial dimension");
    if (!(dt > 0.0)) throw InputError("simulate_highgain: dt must be positive");
    if (dt > design.mu / 50.0 * (1.0 + 1e-9)) {
        throw InputError("simulate_highgain: dt = " + std::to_string(dt) +
                         " is too coarse; require dt <= mu/50 = " +
                         std::to_string(design.mu / 50.0));
    }
    if (!(t_end > 0.0)) throw InputError("simulate_highgain: t_end must be positive");
    if (saturation < 0.0) throw InputError("simulate_highgain: saturation must be >= 0");

    const auto input_at = [&](double x, const StateVector& z) {
        double u = control_law(chain, design, x, z);
        if (saturation > 0.0) u = std::clamp(u, -saturation, saturation);
        return u;
    };

    const numerics::TimeField joint = [&](double, const StateVector& s) {
        const double x = s[0];
        const StateVector z(s.begin() + 1, s.end());
        const double u = input_at(x, z);
        const StateVector z_rate = chain_rate(chain, x, z, u);
        StateVector out(s.size());
        out[0] = chain.slow(x, z);
        for (std::size_t j = 0; j < chain.m; ++j) out[j + 1] = z_rate[j];
        return out;
    };

    StateVector s0(chain.m + 1);
    s0[0] = x0;
    for (std::size_t j = 0; j < chain.m; ++j) s0[j + 1] = z0[j];

    HighGainRun run;
    run.trajectory = numerics::rk4_integrate(joint, s0, 0.0, t_end, dt);

    const std::size_t steps = run.trajectory.states.size();
    run.eta.resize(steps);
    run.xi.resize(steps);
    run.window_start = t_end * 0.9;
    double steady = 0.0;
    for (std::size_t kstep = 0; kstep < steps; ++kstep) {
        const auto& s = run.trajectory.states[kstep];
        const double x = s[0];
        const StateVector z(s.begin() + 1, s.end());
        run.trajectory.inputs[kstep] = input_at(x, z);

        const StateVector xi_hat = design.transform.forward(z);
        const ScaledState scaled = scale_states(design.k, chain.m, x, xi_hat);
        run.eta[kstep] = scaled.eta;
        run.xi[kstep] = scaled.xi;

        if (run.trajectory.times[kstep] + 1e-12 >= run.window_start) {
            StateVector offset = scaled.xi;
            offset[0] -= design.rho(scaled.eta);
            steady = std::max(steady, norm(offset));
        }
    }
    run.steady_error = steady;
    return run;
}

} // namespace contrakit::highgain
