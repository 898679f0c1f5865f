#include <cmath>
#include <random>

#include <doctest.h>

#include "coopgrow/error.hpp"
#include "coopgrow/field.hpp"
#include "coopgrow/integrator.hpp"

using namespace coopgrow;

namespace {

const PlantParams P = PlantParams::nominal();
const PlantState S0{0.005, 0.001, 0.0001};
const EnvSignal ENV = EnvSignal::constant({22, 500});

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("piecewise constant signal uses right-open intervals")
{
    const InputSignal sig({0, 1, 3}, {0.1, 0.2, 0.3});
    CHECK(sig(0.0) == 0.1);
    CHECK(sig(0.999) == 0.1);
    CHECK(sig(1.0) == 0.2);
    CHECK(sig(2.5) == 0.2);
    CHECK(sig(3.0) == 0.3);
    CHECK(sig(100.0) == 0.3);
    CHECK_THROWS_AS(sig(-0.1), std::out_of_range);
    CHECK_THROWS_AS(InputSignal({0, 0}, {1, 2}), ConfigError);
    CHECK_THROWS_AS(InputSignal({0, 1}, {1}), ConfigError);
}

TEST_CASE("step counting rejects bad grids")
{
    CHECK(steps_in(50, 0.01) == 5000);
    CHECK(steps_in(14, 0.05) == 280);
    CHECK_THROWS_AS(steps_in(1, 0.0), ConfigError);
    CHECK_THROWS_AS(steps_in(1, -0.1), ConfigError);
    CHECK_THROWS_AS(steps_in(1, 0.3), ConfigError);
}

TEST_CASE("pure litter loss decays monotonically")
{
    const Trajectory tr =
        integrate(P, {1, 0, 0}, InputSignal::constant(0.0), EnvSignal::constant({22, 0}), 0, 20, 0.01);
    REQUIRE(tr.size() == 2001);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        CHECK(tr.states[i].b < tr.states[i - 1].b);
        CHECK(tr.states[i].c == 0.0);
        CHECK(tr.states[i].n == 0.0);
    }
}

TEST_CASE("trajectory layout")
{
    const Trajectory tr = integrate(P, S0, InputSignal::constant(0.075), ENV, 2, 4, 0.01);
    REQUIRE(tr.size() == 201);
    CHECK(tr.times.front() == 2.0);
    CHECK(tr.times.back() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(tr.states.front() == S0);
    for (std::size_t i = 0; i < tr.size(); ++i) {
        CHECK(tr.outputs[i] == output(tr.states[i], P));
    }
}

TEST_CASE("input validation")
{
    CHECK_THROWS_AS(integrate(P, S0, InputSignal::constant(0.075), ENV, 0, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(integrate(P, S0, InputSignal::constant(0.075), ENV, 1, 1, 0.01), ConfigError);
    // breakpoint off the step grid
    CHECK_THROWS_AS(integrate(P, S0, InputSignal({0, 0.505}, {0.07, 0.08}), ENV, 0, 1, 0.01), ConfigError);
    CHECK_THROWS(integrate(P, S0, InputSignal::constant(-0.01), ENV, 0, 1, 0.01));
}

TEST_CASE("step refinement at the default step")
{
    const double a = integrate(P, S0, InputSignal::constant(0.075), ENV, 0, 50, 0.01).final_state().b;
    const double b = integrate(P, S0, InputSignal::constant(0.075), ENV, 0, 50, 0.005).final_state().b;
    CHECK(rel(a, b) < 1e-6);
}

TEST_CASE("RK4 agrees with fine explicit Euler")
{
    const Trajectory rk = integrate(P, S0, InputSignal::constant(0.075), ENV, 0, 50, 0.01);
    PlantState s = S0;
    const double h = 0.0001;
    for (std::size_t i = 0; i < steps_in(50, h); ++i) {
        s = euler_step(s, 0.075, ENV(0), P, h);
    }
    CHECK(rel(rk.final_state().b, s.b) < 1e-4);
    CHECK(rel(rk.final_state().c, s.c) < 1e-3);
    CHECK(rel(rk.final_state().n, s.n) < 1e-3);
}

TEST_CASE("states stay admissible")
{
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const PlantState s0{1e-6 + U(gen) * 0.01, U(gen) * 0.01, U(gen) * 0.001};
        const Trajectory tr = integrate(P, s0, InputSignal::constant(U(gen) * 0.2),
                                        EnvSignal::constant({5 + 30 * U(gen), 1000 * U(gen)}), 0, 30, 0.01);
        for (const auto& s : tr.states) {
            CHECK(s.b >= kBiomassFloor);
            CHECK(s.c >= 0.0);
            CHECK(s.n >= 0.0);
        }
    }
}

TEST_CASE("larger nitrogen input never lowers the output")
{
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (std::uint64_t draw = 0; draw < 50; ++draw) {
        const PlantParams p = sample_params(P, 0.2, draw, 0);
        // Random piecewise inputs on a 5-day grid, B below A pointwise.
        std::vector<double> times;
        std::vector<double> ua;
        std::vector<double> ub;
        for (int k = 0; k < 8; ++k) {
            times.push_back(5.0 * k);
            ua.push_back(0.2 * U(gen));
            ub.push_back(ua.back() * U(gen));
        }
        const EnvSignal env = EnvSignal::constant({10 + 20 * U(gen), 100 + 900 * U(gen)});
        const Trajectory a = integrate(p, S0, InputSignal(times, ua), env, 0, 40, 0.01);
        const Trajectory b = integrate(p, S0, InputSignal(times, ub), env, 0, 40, 0.01);
        const double ymax = *std::max_element(a.outputs.begin(), a.outputs.end());
        const double tol = 1e-9 * ymax;
        std::size_t breaks = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            breaks += a.outputs[i] >= b.outputs[i] - tol ? 0 : 1;
        }
        INFO("draw " << draw);
        CHECK(breaks == 0);
    }
}

TEST_CASE("integration is bitwise deterministic")
{
    const InputSignal u({0, 10, 20}, {0.07, 0.08, 0.075});
    const Trajectory a = integrate(P, S0, u, ENV, 0, 30, 0.01);
    const Trajectory b = integrate(P, S0, u, ENV, 0, 30, 0.01);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.states[i] == b.states[i]);
        CHECK(a.times[i] == b.times[i]);
    }
}
