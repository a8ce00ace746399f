#pragma once

// =============================================================================
// contrakit - Built-In Example Systems
// =============================================================================
// Four ready-to-run systems covering the library's scope: a polynomial
// two-timescale plant with a composite control, a DC motor speed loop, a
// plant with no quasi-steady-state root driven by a tracking design, and a
// strict-feedback chain under high-gain feedback. Native closures mirror the
// .sps definition files shipped with the tests expression-for-expression so
// both paths produce bit-identical values.
// =============================================================================

#include "contrakit/composite.hpp"
#include "contrakit/highgain.hpp"
#include "contrakit/model.hpp"
#include "contrakit/nonstandard.hpp"

#include <string>
#include <vector>

namespace contrakit::registry {

enum class ExampleKind { standard, nonstandard, highgain };

struct ExampleInfo {
    std::string id;
    std::string description;
    ExampleKind kind = ExampleKind::standard;
    double default_mu = 0.0;    ///< standard / nonstandard examples
    double default_k = 0.0;     ///< highgain example
    double default_t_end = 0.0;
    StateVector initial_state;  ///< stacked (x, z)
    std::string expected;       ///< qualitative reference behavior
};

/// All registered examples in a stable order.
[[nodiscard]] const std::vector<ExampleInfo>& examples();

/// Lookup by id; throws InputError listing the known ids when absent.
[[nodiscard]] const ExampleInfo& find(const std::string& id);

[[nodiscard]] bool exists(const std::string& id);

/// Plant in open-loop form (u free). For the highgain example this is the
/// raw chain with mu = 1; the timescale ratio only appears after scaling.
[[nodiscard]] TwoTimescaleSystem make_system(const std::string& id, double mu);

/// Control laws and manifold as native closures (empty members when the
/// example does not define them).
struct NativeLaws {
    std::function<double(const StateVector& x)> u1;
    std::function<double(const StateVector& x, const StateVector& z)> u2;
    std::function<StateVector(const StateVector& x)> z_ds;
};
[[nodiscard]] NativeLaws native_laws(const std::string& id, double mu);

/// Composite design for the standard examples ("motivating", "dcmotor").
[[nodiscard]] composite::StandardDesign make_standard(const std::string& id, double mu);

/// Tracking design for the "nonstandard" example.
[[nodiscard]] nonstandard::NonstandardDesign make_tracking(double mu);

/// Chain and tuned design for the "highgain" example.
struct HighGainSetup {
    highgain::StrictFeedbackChain chain;
    highgain::HighGainDesign design;
};
[[nodiscard]] HighGainSetup make_highgain(double k);

} // namespace contrakit::registry
