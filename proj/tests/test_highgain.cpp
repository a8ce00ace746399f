#include <catch2/catch_amalgamated.hpp>

#include "contrakit/errors.hpp"
#include "contrakit/highgain.hpp"
#include "contrakit/numerics.hpp"
#include "contrakit/registry.hpp"

#include <cmath>

using namespace contrakit;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

/// Two-state chain with a genuine matched nonlinearity, so the backstepping
/// recursion has something to cancel: z1' = z1^2 + 2 z2, z2' = u.
[[nodiscard]] highgain::StrictFeedbackChain quadratic_chain() {
    highgain::StrictFeedbackChain chain;
    chain.m = 2;
    chain.g1 = {[](const StateVector& z) { return z[0] * z[0]; },
                [](const StateVector&) { return 0.0; }};
    chain.b = {2.0, 1.0};
    chain.g3 = [](double, const StateVector&) { return StateVector{0.0, 0.0}; };
    chain.slow = [](double x, const StateVector&) { return -x; };
    chain.c1 = 0.0;
    chain.c2 = 0.0;
    chain.region = BoxRegion{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};
    return chain;
}

} // namespace

// -----------------------------------------------------------------------------
// Chain validation and backstepping
// -----------------------------------------------------------------------------

TEST_CASE("chains validate their declarations", "[highgain][chain]") {
    highgain::StrictFeedbackChain chain = quadratic_chain();
    CHECK_NOTHROW(chain.validate());

    highgain::StrictFeedbackChain bad_gain = quadratic_chain();
    bad_gain.b[0] = 0.0;
    CHECK_THROWS_AS(bad_gain.validate(), InputError);

    highgain::StrictFeedbackChain off_origin = quadratic_chain();
    off_origin.slow = [](double x, const StateVector&) { return 1.0 - x; };
    CHECK_THROWS_AS(off_origin.validate(), InputError);

    // Growth declarations are spot-checked near the origin.
    highgain::StrictFeedbackChain lying = quadratic_chain();
    lying.slow = [](double x, const StateVector& z) { return -x + z[0]; };
    lying.c1 = 0.0;  // claims |slow(0, z)| = 0 but it grows like ||z||
    CHECK_THROWS_AS(lying.validate(), InputError);
    lying.c1 = 1.0;
    CHECK_NOTHROW(lying.validate());
}

TEST_CASE("backstepping cancels the matched nonlinearity", "[highgain][backstepping]") {
    const highgain::BacksteppingTransform t =
        highgain::backstepping_transform(quadratic_chain());
    REQUIRE(t.alpha.size() == 2);

    // alpha_2(z) = -g1_1(z) / b_1 = -z1^2 / 2.
    CHECK(t.alpha[1]({0.6, 0.0}) == Approx(-0.18).margin(1e-12));

    const StateVector z{0.4, -0.3};
    const StateVector xi_hat = t.forward(z);
    CHECK(xi_hat[0] == Approx(0.4));
    CHECK(xi_hat[1] == Approx(-0.3 + 0.08).margin(1e-12));

    // Exact round trip through the lower-triangular transform.
    const StateVector back = t.inverse(xi_hat);
    CHECK(back[0] == Approx(z[0]).margin(1e-14));
    CHECK(back[1] == Approx(z[1]).margin(1e-14));

    CHECK(t.chain_matrix(0, 1) == Approx(2.0));
    CHECK(t.input_column(1, 0) == Approx(1.0));
}

TEST_CASE("transformed nominal dynamics follow the chain matrix",
          "[highgain][backstepping]") {
    // Along the nominal flow (no residual), xi_hat_1' must equal b_1 xi_hat_2
    // exactly: the matched z1^2 cancels.
    const highgain::StrictFeedbackChain chain = quadratic_chain();
    const highgain::BacksteppingTransform t = highgain::backstepping_transform(chain);
    for (double z1 : {-0.4, 0.0, 0.3}) {
        for (double z2 : {-0.2, 0.5}) {
            const StateVector z{z1, z2};
            const StateVector zdot{z1 * z1 + 2.0 * z2, 0.0};  // u = 0, g3 = 0
            const Matrix jac = numerics::jacobian_fd(t.forward, z);
            const StateVector xi_hat_dot = jac.apply(zdot);
            const StateVector xi_hat = t.forward(z);
            CHECK(xi_hat_dot[0] == Approx(2.0 * xi_hat[1]).margin(1e-8));
        }
    }
}

// -----------------------------------------------------------------------------
// Companion target and design assembly
// -----------------------------------------------------------------------------

TEST_CASE("companion matrix enforces the stability gate", "[highgain][design]") {
    const Matrix g = highgain::companion_matrix({2.0, 2.0}, {1.0});
    CHECK(g(0, 1) == Approx(1.0));
    CHECK(g(1, 0) == Approx(-2.0));
    CHECK(g(1, 1) == Approx(-2.0));
    CHECK(numerics::is_hurwitz(g));

    CHECK_THROWS_MATCHES(highgain::companion_matrix({-1.0, 2.0}, {1.0}), InputError,
                         Catch::Matchers::MessageMatches(ContainsSubstring("Hurwitz")));
    CHECK_THROWS_AS(highgain::companion_matrix({2.0, 2.0}, {1.0, 1.0}), InputError);
}

TEST_CASE("design assembly wires gain, scaling, and transform", "[highgain][design]") {
    const registry::HighGainSetup setup = registry::make_highgain(4.5);
    CHECK(setup.design.k == 4.5);
    CHECK(setup.design.mu == Approx(1.0 / 4.5));
    CHECK(setup.design.scaling(0, 0) == Approx(4.5));
    CHECK(setup.design.scaling(1, 1) == Approx(1.0));

    CHECK_THROWS_AS(highgain::make_high_gain_design(setup.chain, 0.5, {2.0, 2.0},
                                                    [](double) { return 0.0; }),
                    InputError);  // k >= 1
    CHECK_THROWS_AS(highgain::make_high_gain_design(setup.chain, 2.0, {2.0},
                                                    [](double) { return 0.0; }),
                    InputError);  // one coefficient per state
}

TEST_CASE("gain scaling round-trips to relative machine precision",
          "[highgain][design]") {
    const double k = 4.5;
    const std::size_t m = 3;
    const double x = 0.3;
    const StateVector xi_hat{0.1, -0.2, 0.5};
    const highgain::ScaledState s = highgain::scale_states(k, m, x, xi_hat);
    CHECK(s.eta == Approx(k * k * x).margin(1e-14));
    const auto [x_back, hat_back] = highgain::unscale_states(k, m, s.eta, s.xi);
    CHECK(x_back == Approx(x).epsilon(1e-12));
    for (std::size_t j = 0; j < m; ++j) {
        CHECK(hat_back[j] == Approx(xi_hat[j]).epsilon(1e-12));
    }
}

// -----------------------------------------------------------------------------
// Control law and residual
// -----------------------------------------------------------------------------

TEST_CASE("control law reduces to scaled companion feedback", "[highgain][control]") {
    // For the built-in chain (identity backstepping) the law is closed-form:
    // u = -2 k^2 z1 - 2 k z2 - 2 k^2 x^2 - 2 k^2 x.
    const double k = 4.5;
    const registry::HighGainSetup setup = registry::make_highgain(k);
    for (double x : {-0.4, 0.1, 0.5}) {
        for (double z1 : {-0.5, 0.2}) {
            for (double z2 : {-0.1, 0.3}) {
                const double expected =
                    -2.0 * k * k * z1 - 2.0 * k * z2 - 2.0 * k * k * x * x - 2.0 * k * k * x;
                CHECK(highgain::control_law(setup.chain, setup.design, x, {z1, z2}) ==
                      Approx(expected).margin(1e-9));
            }
        }
    }
}

TEST_CASE("residual field keeps only the unmatched coupling", "[highgain][control]") {
    // In scaled coordinates the built-in chain leaves exactly
    // (eta sin(xi_2), 0) over the companion target.
    const registry::HighGainSetup setup = registry::make_highgain(4.5);
    for (double eta : {-1.0, 0.4, 2.0}) {
        for (double xi2 : {-0.5, 0.0, 0.3}) {
            const StateVector xi{0.7, xi2};
            const StateVector res =
                highgain::residual_field(setup.chain, setup.design, eta, xi);
            REQUIRE(res.size() == 2);
            CHECK(res[0] == Approx(eta * std::sin(xi2)).margin(1e-7));
            CHECK(res[1] == Approx(0.0).margin(1e-7));
        }
    }
}

TEST_CASE("residual vanishes when the chain has no unmatched part",
          "[highgain][control]") {
    registry::HighGainSetup setup = registry::make_highgain(4.5);
    setup.chain.g3 = [](double, const StateVector&) { return StateVector{0.0, 0.0}; };
    for (double eta : {-0.9, 0.8}) {
        for (double xi2 : {-0.4, 0.2}) {
            const StateVector res =
                highgain::residual_field(setup.chain, setup.design, eta, {0.3, xi2});
            CHECK(norm(res) <= 1e-8);
        }
    }
}

// -----------------------------------------------------------------------------
// Gain condition and steady-state bound
// -----------------------------------------------------------------------------

TEST_CASE("contraction threshold scales with the square of the gain",
          "[highgain][condition]") {
    // Companion [[0,1],[-2,-2]]: largest symmetric-part eigenvalue magnitude
    // is (sqrt(5) - 2) / 2.
    const double unit = (std::sqrt(5.0) - 2.0) / 2.0;
    for (double k : {2.0, 4.5, 10.0}) {
        const registry::HighGainSetup setup = registry::make_highgain(k);
        CHECK(highgain::contraction_threshold(setup.design) ==
              Approx(unit * k * k).margin(1e-9));
    }
}

TEST_CASE("gain condition compares residual sensitivity to the threshold",
          "[highgain][condition]") {
    // For the built-in chain the residual jacobian norm is sup |eta cos xi_2|
    // = k/2 over the box, so the margin is (sqrt(5)-2)/2 k^2 - k/2.
    const double unit = (std::sqrt(5.0) - 2.0) / 2.0;

    const registry::HighGainSetup low = registry::make_highgain(2.0);
    const highgain::GainConditionCheck fail =
        highgain::gain_condition_check(low.chain, low.design, 9);
    CHECK_FALSE(fail.ok);
    CHECK(fail.jac_sup == Approx(1.0).margin(1e-6));
    CHECK(fail.margin == Approx(unit * 4.0 - 1.0).margin(1e-6));

    const registry::HighGainSetup high = registry::make_highgain(10.0);
    const highgain::GainConditionCheck pass =
        highgain::gain_condition_check(high.chain, high.design, 9);
    CHECK(pass.ok);
    CHECK(pass.jac_sup == Approx(5.0).margin(1e-5));
    CHECK(pass.margin == Approx(unit * 100.0 - 5.0).margin(1e-5));
    REQUIRE(pass.worst.size() == 3);  // original-coordinate sample
    CHECK(std::abs(pass.worst[0]) == Approx(0.5).margin(1e-12));  // |x| at the box edge
}

TEST_CASE("steady-state bound composes the residual magnitudes",
          "[highgain][condition]") {
    // c4 = (k/2) sin(0.5), c5 = 2k, threshold - jac_sup as above.
    const double unit = (std::sqrt(5.0) - 2.0) / 2.0;
    const double k = 4.5;
    const registry::HighGainSetup setup = registry::make_highgain(k);
    const highgain::HighGainConstants constants =
        highgain::estimate_highgain_constants(setup.chain, setup.design, 9);
    CHECK(constants.c4 == Approx(0.5 * k * std::sin(0.5)).margin(1e-5));
    CHECK(constants.c5 == Approx(2.0 * k).margin(1e-5));
    CHECK(constants.jac_sup == Approx(0.5 * k).margin(1e-5));

    const double bound = highgain::steady_state_bound(constants, setup.design);
    const double expected =
        (constants.c4 + constants.c5) / (unit * k * k - constants.jac_sup);
    CHECK(bound == Approx(expected).margin(1e-9));

    // Below the threshold no bound is certified.
    const registry::HighGainSetup low = registry::make_highgain(2.0);
    const highgain::HighGainConstants weak =
        highgain::estimate_highgain_constants(low.chain, low.design, 9);
    CHECK_THROWS_AS(highgain::steady_state_bound(weak, low.design), NotApplicableError);
}

// -----------------------------------------------------------------------------
// Simulation
// -----------------------------------------------------------------------------

TEST_CASE("high-gain simulation reports both coordinate systems",
          "[highgain][simulate]") {
    const registry::HighGainSetup setup = registry::make_highgain(4.5);
    const highgain::HighGainRun run = highgain::simulate_highgain(
        setup.chain, setup.design, -1.0, {1.0, 0.0}, 10.0, 1e-3);
    run.trajectory.validate();
    REQUIRE(run.eta.size() == run.trajectory.size());
    REQUIRE(run.xi.size() == run.trajectory.size());

    // Scaled channels must be consistent with the stored original states.
    const std::size_t last = run.trajectory.size() - 1;
    CHECK(run.eta[last] == Approx(4.5 * run.trajectory.states[last][0]).margin(1e-12));
    CHECK(run.xi[last][1] == Approx(run.trajectory.states[last][2]).margin(1e-12));

    // The loop settles near the origin from this start.
    CHECK(std::abs(run.trajectory.states[last][0]) < 1e-4);
    CHECK(run.steady_error < 1e-4);
    CHECK(run.window_start == Approx(9.0));
}

TEST_CASE("saturation clamps the applied input only", "[highgain][simulate]") {
    const registry::HighGainSetup setup = registry::make_highgain(10.0);
    const highgain::HighGainRun run = highgain::simulate_highgain(
        setup.chain, setup.design, -1.0, {1.0, 0.0}, 10.0, 1e-3, 5.0);
    double max_u = 0.0;
    for (double u : run.trajectory.inputs) max_u = std::max(max_u, std::abs(u));
    CHECK(max_u <= 5.0 + 1e-12);
    CHECK(max_u == Approx(5.0));  // the clamp engages during the transient
    // The unsaturated law wants far more than 5 at the initial state.
    CHECK(std::abs(highgain::control_law(setup.chain, setup.design, -1.0, {1.0, 0.0})) >
          5.0);
    // Still converges.
    CHECK(std::abs(run.trajectory.states.back()[0]) < 1e-3);
}

TEST_CASE("high-gain simulation guards its preconditions", "[highgain][simulate]") {
    const registry::HighGainSetup setup = registry::make_highgain(4.5);
    CHECK_THROWS_AS(highgain::simulate_highgain(setup.chain, setup.design, 0.0,
                                                {0.0, 0.0}, 1.0, 0.1),
                    InputError);  // dt > mu/50
    CHECK_THROWS_AS(highgain::simulate_highgain(setup.chain, setup.design, 0.0, {0.0},
                                                1.0, 1e-3),
                    InputError);  // wrong fast dimension
    CHECK_THROWS_AS(highgain::simulate_highgain(setup.chain, setup.design, 0.0,
                                                {0.0, 0.0}, 1.0, 1e-3, -1.0),
                    InputError);  // negative saturation
}
