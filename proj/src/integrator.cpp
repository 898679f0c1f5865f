#include "coopgrow/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "coopgrow/error.hpp"

namespace coopgrow {

namespace {

PlantState project(PlantState s)
{
    s.b = std::max(s.b, kBiomassFloor);
    s.c = std::max(s.c, 0.0);
    s.n = std::max(s.n, 0.0);
    return s;
}

PlantState advance(const PlantState& s, const StateDerivative& d, double h)
{
    return {s.b + h * d.db, s.c + h * d.dc, s.n + h * d.dn};
}

// Stage states may dip below the floor on a large step; clamp b only so the
// fluxes stay defined.
PlantState stage(const PlantState& s, const StateDerivative& d, double h)
{
    PlantState out = advance(s, d, h);
    out.b = std::max(out.b, kBiomassFloor);
    return out;
}

template <typename Signal>
void check_alignment(const Signal& sig, double t0, double t1, double dt, const char* name)
{
    for (double bp : sig.breakpoints()) {
        if (bp <= t0 || bp >= t1) {
            continue;
        }
        const double k = std::round((bp - t0) / dt);
        if (std::abs(t0 + k * dt - bp) > kGridTolerance) {
            std::ostringstream os;
            os << name << " breakpoint " << bp << " is not on the step grid (dt=" << dt << ")";
            throw ConfigError(os.str());
        }
    }
}

}  // namespace

std::size_t steps_in(double span, double dt)
{
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("integration step dt must be positive");
    }
    if (!(span > 0.0)) {
        throw ConfigError("integration interval must have t1 > t0");
    }
    const double k = std::round(span / dt);
    if (k < 1.0 || std::abs(k * dt - span) > kGridTolerance) {
        std::ostringstream os;
        os << "interval of " << span << " days is not a whole number of steps of " << dt;
        throw ConfigError(os.str());
    }
    return static_cast<std::size_t>(k);
}

PlantState rk4_step(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p,
                    double dt)
{
    const StateDerivative k1 = rhs(s, u, env, p);
    const StateDerivative k2 = rhs(stage(s, k1, 0.5 * dt), u, env, p);
    const StateDerivative k3 = rhs(stage(s, k2, 0.5 * dt), u, env, p);
    const StateDerivative k4 = rhs(stage(s, k3, dt), u, env, p);
    const StateDerivative sum{k1.db + 2.0 * k2.db + 2.0 * k3.db + k4.db,
                              k1.dc + 2.0 * k2.dc + 2.0 * k3.dc + k4.dc,
                              k1.dn + 2.0 * k2.dn + 2.0 * k3.dn + k4.dn};
    return project(advance(s, sum, dt / 6.0));
}

PlantState euler_step(const PlantState& s, double u, const EnvPoint& env, const PlantParams& p,
                      double dt)
{
    return project(advance(s, rhs(s, u, env, p), dt));
}

Trajectory integrate(const PlantParams& p, const PlantState& s0, const InputSignal& u_sig,
                     const EnvSignal& env_sig, double t0, double t1, double dt)
{
    const std::size_t n = steps_in(t1 - t0, dt);
    check_alignment(u_sig, t0, t1, dt, "input");
    check_alignment(env_sig, t0, t1, dt, "environment");
    if (s0.b < kBiomassFloor || s0.c < 0.0 || s0.n < 0.0) {
        throw ConfigError("initial state violates b >= floor, c >= 0, n >= 0");
    }

    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.states.reserve(n + 1);
    traj.outputs.reserve(n + 1);
    traj.times.push_back(t0);
    traj.states.push_back(s0);
    traj.outputs.push_back(output(s0, p));

    PlantState s = s0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) * dt;
        // Half-step offset makes the lookup robust to rounding at breakpoints.
        const double probe = t + 0.5 * dt;
        const double u = u_sig(probe);
        if (u < 0.0) {
            throw ConfigError("nitrogen input must be nonnegative");
        }
        s = rk4_step(s, u, env_sig(probe), p, dt);
        traj.times.push_back(t0 + static_cast<double>(i + 1) * dt);
        traj.states.push_back(s);
        traj.outputs.push_back(output(s, p));
    }
    return traj;
}

}  // namespace coopgrow
