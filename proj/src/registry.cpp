#include "contrakit/registry.hpp"

#include "contrakit/errors.hpp"
#include "contrakit/numerics.hpp"

#include <cmath>

namespace contrakit::registry {

namespace {

// Native fields mirror the shipped .sps files expression-for-expression
// (same operator order, same power helpers) so evaluation is bit-identical.

// --- motivating: cubic coupling, composite control --------------------------

[[nodiscard]] TwoTimescaleSystem motivating_system(double mu) {
    TwoTimescaleSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.mu = mu;
    sys.slow_region = BoxRegion{{-1.0}, {1.0}};
    sys.fast_region = BoxRegion{{-1.3}, {1.0}};
    sys.f = [](const StateVector& x, const StateVector& z, double) {
        return StateVector{x[0] * numerics::ipow(z[0], 3)};
    };
    sys.g = [](const StateVector& x, const StateVector& z, double, double u) {
        (void)x;
        return StateVector{z[0] + u};
    };
    return sys;
}

[[nodiscard]] NativeLaws motivating_laws() {
    NativeLaws laws;
    laws.u1 = [](const StateVector& x) { return numerics::rpow(x[0], 4, 3); };
    laws.u2 = [](const StateVector& x, const StateVector& z) {
        return -3.0 * (z[0] + numerics::rpow(x[0], 4, 3));
    };
    laws.z_ds = [](const StateVector& x) {
        return StateVector{-numerics::rpow(x[0], 4, 3)};
    };
    return laws;
}

// --- dcmotor: speed loop with composite correction ---------------------------

constexpr double kMotorOmega = 25.0;

[[nodiscard]] TwoTimescaleSystem dcmotor_system(double mu) {
    TwoTimescaleSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.mu = mu;
    sys.slow_region = BoxRegion{{-0.5}, {2.0}};
    sys.fast_region = BoxRegion{{-1.0}, {4.0}};
    sys.f = [](const StateVector& x, const StateVector& z, double) {
        return StateVector{-6.39 * x[0] + 6.39 * numerics::ipow(z[0], 2)};
    };
    sys.g = [](const StateVector& x, const StateVector& z, double mu_val, double u) {
        return StateVector{(-z[0] - ((mu_val * kMotorOmega) * x[0]) * z[0]) +
                           (1.0 + mu_val * kMotorOmega) * u};
    };
    return sys;
}

[[nodiscard]] NativeLaws dcmotor_laws(double mu) {
    NativeLaws laws;
    laws.u1 = [](const StateVector&) { return 1.0; };
    laws.u2 = [mu](const StateVector& x, const StateVector& z) {
        return ((mu * kMotorOmega) / (1.0 + mu * kMotorOmega)) * ((x[0] * z[0]) - x[0]);
    };
    laws.z_ds = [](const StateVector&) { return StateVector{1.0}; };
    return laws;
}

// --- nonstandard: no quasi-steady-state root, tracking design ---------------

[[nodiscard]] TwoTimescaleSystem nonstandard_system(double mu) {
    TwoTimescaleSystem sys;
    sys.n = 1;
    sys.m = 1;
    sys.mu = mu;
    sys.slow_region = BoxRegion{{-0.8}, {0.8}};
    sys.fast_region = BoxRegion{{-1.2}, {1.2}};
    sys.f = [](const StateVector& x, const StateVector& z, double u) {
        (void)x;
        return StateVector{std::tan(z[0]) - u};
    };
    sys.g = [](const StateVector& x, const StateVector& z, double, double u) {
        (void)z;
        return StateVector{x[0] + u};
    };
    return sys;
}

[[nodiscard]] NativeLaws nonstandard_laws() {
    NativeLaws laws;
    laws.u1 = [](const StateVector& x) {
        return -x[0] + std::atan(-2.0 * x[0]);
    };
    laws.u2 = [](const StateVector& x, const StateVector& z) {
        (void)x;
        return -z[0];
    };
    return laws;
}

// --- highgain: strict-feedback chain -----------------------------------------

[[nodiscard]] TwoTimescaleSystem highgain_system(double mu) {
    TwoTimescaleSystem sys;
    sys.n = 1;
    sys.m = 2;
    sys.mu = mu;
    sys.slow_region = BoxRegion{{-0.5}, {0.5}};
    sys.fast_region = BoxRegion{{-0.5, -0.5}, {0.5, 0.5}};
    sys.f = [](const StateVector& x, const StateVector& z, double) {
        return StateVector{numerics::ipow(x[0], 2) + z[0] + x[0] * z[1]};
    };
    sys.g = [](const StateVector& x, const StateVector& z, double, double u) {
        return StateVector{z[1] + x[0] * std::sin(z[1]), u};
    };
    return sys;
}

[[nodiscard]] highgain::StrictFeedbackChain highgain_chain() {
    highgain::StrictFeedbackChain chain;
    chain.m = 2;
    chain.g1 = {[](const StateVector&) { return 0.0; },
                [](const StateVector&) { return 0.0; }};
    chain.b = {1.0, 1.0};
    chain.g3 = [](double x, const StateVector& z) {
        return StateVector{x * std::sin(z[1]), 0.0};
    };
    chain.slow = [](double x, const StateVector& z) {
        return numerics::ipow(x, 2) + z[0] + x * z[1];
    };
    chain.c1 = 1.0;
    chain.c2 = 0.0;
    chain.region = BoxRegion{{-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}};
    return chain;
}

[[nodiscard]] const std::vector<ExampleInfo>& table() {
    static const std::vector<ExampleInfo> entries = [] {
        std::vector<ExampleInfo> v;

        ExampleInfo motivating;
        motivating.id = "motivating";
        motivating.description =
            "Cubic-coupling plant with a composite control that tracks the slow manifold";
        motivating.kind = ExampleKind::standard;
        motivating.default_mu = 0.1;
        motivating.default_t_end = 40.0;
        motivating.initial_state = {0.9, 0.4};
        motivating.expected =
            "fast error stays inside its envelope across mu in [0.05, 0.5]; the reduced slow "
            "model flattens at the origin, so no transient slow envelope is certified";
        v.push_back(motivating);

        ExampleInfo dcmotor;
        dcmotor.id = "dcmotor";
        dcmotor.description =
            "DC motor speed loop with a composite correction toward unit speed";
        dcmotor.kind = ExampleKind::standard;
        dcmotor.default_mu = 0.1;
        dcmotor.default_t_end = 5.0;
        dcmotor.initial_state = {0.0, 0.0};
        dcmotor.expected =
            "fast rate 1 and slow rate about 6.4 in the identity metric; the transient slow "
            "envelope exists only while the timescales stay separated (mu below about 0.16)";
        v.push_back(dcmotor);

        ExampleInfo nonstd;
        nonstd.id = "nonstandard";
        nonstd.description =
            "Plant with no quasi-steady-state root; tracking design around a virtual manifold";
        nonstd.kind = ExampleKind::nonstandard;
        nonstd.default_mu = 0.1;
        nonstd.default_t_end = 20.0;
        nonstd.initial_state = {0.5, 0.0};
        nonstd.expected =
            "both error subsystems contract at rate 1; the steady tracking error scales with "
            "mu times the virtual-manifold drift";
        v.push_back(nonstd);

        ExampleInfo hg;
        hg.id = "highgain";
        hg.description =
            "Two-state strict-feedback chain under scaled companion feedback";
        hg.kind = ExampleKind::highgain;
        hg.default_k = 4.5;
        hg.default_t_end = 10.0;
        hg.initial_state = {-1.0, 1.0, 0.0};
        hg.expected =
            "the gain condition holds on the analysis box for k = 4.5 and k = 10 but fails "
            "at k = 2, where no steady-state bound is certified";
        v.push_back(hg);

        return v;
    }();
    return entries;
}

} // namespace

const std::vector<ExampleInfo>& examples() { return table(); }

bool exists(const std::string& id) {
    for (const auto& e : table()) {
        if (e.id == id) return true;
    }
    return false;
}

const ExampleInfo& find(const std::string& id) {
    for (const auto& e : table()) {
        if (e.id == id) return e;
    }
    std::string known;
    for (const auto& e : table()) {
        if (!known.empty()) known += ", ";
        known += e.id;
    }
    throw InputError("unknown example '" + id + "' (known: " + known + ")");
}

TwoTimescaleSystem make_system(const std::string& id, double mu) {
    if (id == "motivating") return motivating_system(mu);
    if (id == "dcmotor") return dcmotor_system(mu);
    if (id == "nonstandard") return nonstandard_system(mu);
    if (id == "highgain") return highgain_system(mu);
    (void)find(id); // throws with the known-id list
    throw InputError("unreachable");
}

NativeLaws native_laws(const std::string& id, double mu) {
    if (id == "motivating") return motivating_laws();
    if (id == "dcmotor") return dcmotor_laws(mu);
    if (id == "nonstandard") return nonstandard_laws();
    if (id == "highgain") return NativeLaws{}; // raw chain: no closed-form laws
    (void)find(id);
    throw InputError("unreachable");
}

composite::StandardDesign make_standard(const std::string& id, double mu) {
    if (id != "motivating" && id != "dcmotor") {
        throw InputError("example '" + id + "' is not a standard composite design");
    }
    TwoTimescaleSystem sys = make_system(id, mu);
    const NativeLaws laws = native_laws(id, mu);
    ControlLaw control;
    control.u1 = laws.u1;
    control.u2 = laws.u2;
    return composite::make_standard_design(std::move(sys), std::move(control),
                                           contraction::Metric::identity(1),
                                           contraction::Metric::identity(1));
}

nonstandard::NonstandardDesign make_tracking(double mu) {
    nonstandard::NonstandardDesign design;
    design.system = nonstandard_system(mu);
    design.x_ref = [](double) { return StateVector{0.0}; };
    design.x_ref_dot = [](double) { return StateVector{0.0}; };
    design.virtual_manifold = [](const StateVector& e, double) {
        return StateVector{std::atan(-2.0 * e[0])};
    };
    design.manifold_jac = [](const StateVector& e, double) {
        Matrix jac(1, 1);
        jac(0, 0) = -2.0 / (1.0 + 4.0 * e[0] * e[0]);
        return jac;
    };
    design.control = [](const StateVector& e_z, const StateVector& e, double) {
        return -e[0] - e_z[0];
    };
    design.metric_e = contraction::Metric::identity(1);
    design.metric_ez = contraction::Metric::identity(1);
    design.error_region = BoxRegion{{-0.8}, {0.8}};
    return design;
}

HighGainSetup make_highgain(double k) {
    HighGainSetup setup;
    setup.chain = highgain_chain();
    setup.design = highgain::make_high_gain_design(
        setup.chain, k, {2.0, 2.0}, [k](double eta) { return -eta * eta / k - eta; });
    return setup;
}

} // namespace contrakit::registry
