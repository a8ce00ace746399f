#include <catch2/catch_amalgamated.hpp>

#include "contrakit/errors.hpp"
#include "contrakit/nonstandard.hpp"
#include "contrakit/registry.hpp"

#include <cmath>

using namespace contrakit;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

// -----------------------------------------------------------------------------
// Error coordinates
// -----------------------------------------------------------------------------

TEST_CASE("error system shifts the plant by the reference", "[nonstandard][error]") {
    const TwoTimescaleSystem sys = registry::make_system("nonstandard", 0.1);
    // Moving reference x_r(t) = t.
    const nonstandard::ErrorSystem err = nonstandard::build_error_system(
        sys, [](double t) { return StateVector{t}; },
        [](double) { return StateVector{1.0}; });

    const double t = 0.3;
    const StateVector e{0.2};
    const StateVector z{0.5};
    const double u = -0.7;
    // f_e = f(e + t, z, u) - 1  and  g is evaluated at the shifted slow state.
    CHECK(err.f(t, e, z, u)[0] == Approx(std::tan(0.5) - u - 1.0).margin(1e-15));
    CHECK(err.g(t, e, z, 0.1, u)[0] == Approx((0.2 + 0.3) + u).margin(1e-15));

    CHECK_THROWS_AS(nonstandard::build_error_system(sys, nullptr, nullptr), InputError);
}

TEST_CASE("manifold drift follows the chain rule", "[nonstandard][error]") {
    const nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    const StateVector e{0.2};
    const StateVector e_z{0.3};
    // z_de = atan(-2e): drift = dz_de/de * e' with e' = tan(z) + e + e_z.
    const double z = std::atan(-0.4) + 0.3;
    const double e_dot = std::tan(z) - (-0.2 - 0.3);
    const double expected = (-2.0 / (1.0 + 0.16)) * e_dot;
    const StateVector drift = nonstandard::manifold_drift(design, e_z, e, 0.0);
    CHECK(drift[0] == Approx(expected).margin(1e-9));
}

TEST_CASE("fast-error fields differ by the scaled drift", "[nonstandard][error]") {
    const nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    const nonstandard::FastErrorFields fields = nonstandard::fast_error_dynamics(design);
    const StateVector e{0.2};
    const StateVector e_z{0.3};

    // Unperturbed: g(x, z, u) with u = -e - e_z collapses to -e_z exactly.
    CHECK(fields.unperturbed(e_z, e, 0.0)[0] == Approx(-0.3).margin(1e-15));

    const StateVector drift = nonstandard::manifold_drift(design, e_z, e, 0.0);
    const double expected = fields.unperturbed(e_z, e, 0.0)[0] - 0.1 * drift[0];
    CHECK(fields.perturbed(e_z, e, 0.0)[0] == Approx(expected).margin(1e-12));
}

TEST_CASE("fast-error box combines the fast box and manifold range",
          "[nonstandard][error]") {
    const nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    const BoxRegion box = nonstandard::fast_error_region(design, 9);
    REQUIRE(box.dim() == 1);
    // e_z = z - atan(-2e): extremes at z = +-1.2, z_de = -+atan(1.6).
    CHECK(box.lower[0] == Approx(-1.2 - std::atan(1.6)).margin(1e-12));
    CHECK(box.upper[0] == Approx(1.2 + std::atan(1.6)).margin(1e-12));
}

TEST_CASE("incomplete designs are rejected", "[nonstandard][error]") {
    nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    design.control = nullptr;
    CHECK_THROWS_AS(nonstandard::fast_error_dynamics(design), InputError);

    nonstandard::NonstandardDesign no_manifold = registry::make_tracking(0.1);
    no_manifold.virtual_manifold = nullptr;
    CHECK_THROWS_AS(nonstandard::estimate_tracking_constants(no_manifold), InputError);
}

// -----------------------------------------------------------------------------
// Constant estimation against closed-form suprema
// -----------------------------------------------------------------------------

TEST_CASE("tracking constants match hand suprema", "[nonstandard][constants]") {
    nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    const BoundSet b = nonstandard::estimate_tracking_constants(design, 21);

    // Reduced slow error e' = -e and fast error e_z' = -e_z: rates exactly 1.
    CHECK(b.lambda_x == Approx(1.0).margin(1e-8));
    CHECK(b.lambda_z == Approx(1.0).margin(1e-8));
    CHECK(b.chi_x == Approx(1.0));
    CHECK(b.chi_z == Approx(1.0));

    // Drift supremum over the sampled (e, z) boxes: the grid maximizer is
    // e = 0.08, z = 1.2 (21-point grids over [-0.8, 0.8] and [-1.2, 1.2]):
    //   |dz_de/de| * |e'| = 2/(1 + 4 e^2) * (tan(z) + e + z - atan(-2e)).
    const double e_star = 0.08, z_star = 1.2;
    const double ez_star = z_star - std::atan(-2.0 * e_star);
    const double d_e_expected = 2.0 / (1.0 + 4.0 * e_star * e_star) *
                                (std::tan(z_star) + e_star + ez_star);
    CHECK(b.d_e == Approx(d_e_expected).margin(1e-6));

    // Interconnection gain: |d e'/d e_z| = sec^2(z) + 1, maximal at z = 1.2.
    const double l_e_expected = 2.0 + std::tan(1.2) * std::tan(1.2);
    CHECK(b.L2 == Approx(l_e_expected).margin(1e-6));
    CHECK(b.mu == 0.1);
}

// -----------------------------------------------------------------------------
// Tracking envelopes
// -----------------------------------------------------------------------------

TEST_CASE("fast tracking envelope evaluates its closed form",
          "[nonstandard][envelope]") {
    BoundSet b;
    b.lambda_z = 2.0;
    b.chi_z = 1.5;
    b.d_e = 0.8;
    b.mu = 0.1;
    b.lambda_x = 1.0;
    const composite::BoundCurve curve = nonstandard::tracking_fast_bound(b, 2.0);
    REQUIRE(curve.has_curve());
    CHECK_FALSE(curve.note.empty());  // documents the conservative slow-time decay

    const double offset = 0.1 * 0.8 * 1.5 / 2.0;
    CHECK(curve.limit == Approx(offset).margin(1e-15));
    CHECK(curve.at(0.0) == Approx(1.5 * 2.0 + offset).margin(1e-12));
    CHECK(curve.at(1.0) == Approx(1.5 * std::exp(-2.0) * 2.0 + offset).margin(1e-12));

    CHECK_THROWS_AS(nonstandard::tracking_fast_bound(b, -1.0), InputError);
    BoundSet flat = b;
    flat.lambda_z = 0.0;
    CHECK_THROWS_AS(nonstandard::tracking_fast_bound(flat, 1.0), NotApplicableError);
}

TEST_CASE("slow tracking limit composes the constants and explains them",
          "[nonstandard][envelope]") {
    BoundSet b;
    b.lambda_x = 2.0;
    b.lambda_z = 4.0;
    b.chi_x = 1.5;
    b.chi_z = 2.0;
    b.L2 = 3.0;   // interconnection gain L_e
    b.d_e = 0.8;
    b.mu = 0.1;
    const nonstandard::TrackingLimit limit = nonstandard::tracking_slow_limit(b);
    CHECK(limit.value == Approx(0.1 * 3.0 * 0.8 * 2.0 * 1.5 / (2.0 * 4.0)).margin(1e-15));
    CHECK_THAT(limit.mapping_note, ContainsSubstring("L_e"));
    CHECK_THAT(limit.mapping_note, ContainsSubstring("drift"));

    BoundSet flat = b;
    flat.lambda_x = 1e-20;  // differencing noise must not count as a rate
    CHECK_THROWS_AS(nonstandard::tracking_slow_limit(flat), NotApplicableError);
}

// -----------------------------------------------------------------------------
// Simulation
// -----------------------------------------------------------------------------

TEST_CASE("tracking simulation settles and logs the applied input",
          "[nonstandard][simulate]") {
    const nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    const nonstandard::TrackingRun run =
        nonstandard::simulate_tracking(design, {0.5}, {0.0}, 20.0, 1e-3);
    run.trajectory.validate();

    // The closed loop has an exact equilibrium at the origin; by t = 20 the
    // tracking error has collapsed to integration noise.
    CHECK(run.steady_error < 1e-6);
    CHECK(run.window_start == Approx(18.0));
    CHECK(run.window_fraction == Approx(0.1));

    // Logged inputs must equal the control recomputed from the states.
    for (std::size_t i = 0; i < run.trajectory.size(); i += 5000) {
        const double t = run.trajectory.times[i];
        const StateVector e{run.trajectory.states[i][0]};
        const StateVector e_z{run.trajectory.states[i][1] -
                              design.virtual_manifold(e, t)[0]};
        CHECK(run.trajectory.inputs[i] ==
              Approx(design.control(e_z, e, t)).margin(1e-12));
    }
}

TEST_CASE("tracking error series reports both error norms", "[nonstandard][simulate]") {
    const nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    const nonstandard::TrackingRun run =
        nonstandard::simulate_tracking(design, {0.5}, {0.0}, 2.0, 1e-3);
    const auto series = nonstandard::tracking_error_series(design, run.trajectory);
    REQUIRE(series.size() == run.trajectory.size());
    // At t = 0: e = x0 and e_z = z0 - atan(-2 x0).
    CHECK(series.front().first == Approx(0.5).margin(1e-15));
    CHECK(series.front().second == Approx(std::abs(0.0 - std::atan(-1.0))).margin(1e-15));
    // Errors decay along the run.
    CHECK(series.back().first < 0.05);
    CHECK(series.back().second < 0.05);
}

TEST_CASE("tracking simulation guards its preconditions", "[nonstandard][simulate]") {
    const nonstandard::NonstandardDesign design = registry::make_tracking(0.1);
    CHECK_THROWS_AS(nonstandard::simulate_tracking(design, {0.5}, {0.0}, 1.0, 0.01),
                    InputError);  // dt > mu/50
    CHECK_THROWS_AS(nonstandard::simulate_tracking(design, {0.5, 0.1}, {0.0}, 1.0, 1e-3),
                    InputError);  // dimension mismatch
    CHECK_THROWS_AS(nonstandard::simulate_tracking(design, {0.5}, {0.0}, -1.0, 1e-3),
                    InputError);  // bad horizon
}
