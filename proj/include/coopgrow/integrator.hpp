#pragma once

#include <cstddef>
#include <vector>

#include "coopgrow/model.hpp"
#include "coopgrow/signal.hpp"

namespace coopgrow {

using InputSignal = PiecewiseConstantSignal<double>;
using EnvSignal = PiecewiseConstantSignal<EnvPoint>;

inline constexpr double kDefaultStep = 0.01;
/// Allowed misalignment between a breakpoint and the step grid, in days.
inline constexpr double kGridTolerance = 1e-9;

struct Trajectory {
    std::vector<double> times;
    std::vector<PlantState> states;
    std::vector<double> outputs;

    std::size_t size() const { return times.size(); }
    const PlantState& final_state() const { return states.back(); }
    double final_output() const { return outputs.back(); }
};

/// Number of dt steps spanning `span`; throws ConfigError if span is not a
/// whole number of steps (within kGridTolerance).
std::size_t steps_in(double span, double dt);

/// One classical RK4 step with inputs held constant, followed by projection
/// onto b >= kBiomassFloor, c >= 0, n >= 0.
PlantState rk4_step(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p,
                    double dt);

/// Same step with forward Euler. Used as a reference scheme in tests.
PlantState euler_step(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p,
                      double dt);

/// Fixed-step RK4 from t0 to t1, sampled at every step boundary (t0
/// included). Input and environment are evaluated at the start of each
/// step; their breakpoints inside (t0, t1) must lie on the step grid.
Trajectory integrate(const PlantParams& p, const PlantState& s0, const InputSignal& u_sig,
                     const EnvSignal& env_sig, double t0, double t1, double dt = kDefaultStep);

}  // namespace coopgrow
