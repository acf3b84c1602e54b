#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mrf/system.hpp"
#include "mrf/trajectory.hpp"

using namespace mrf;

namespace {

// x' = -x, control has no effect; closed-form solution e^{-t}.
ControlSystem decay_system() {
    ControlSystem s;
    s.name = "decay";
    s.state_dim = 1;
    s.control_samples = {{0.0}};
    s.dynamics = [](const Vec& x, const Vec&) { return Vec{-x[0]}; };
    s.running_cost = [](const Vec&, const Vec&) { return 0.0; };
    s.target_distance = [](const Vec& x) { return std::abs(x[0]); };
    return s;
}

IntegrationParams params_1d(double dt, double horizon, double tol = 1e-9) {
    IntegrationParams p;
    p.dt = dt;
    p.horizon = horizon;
    p.target_tol = tol;
    p.box = {{-10.0}, {10.0}};
    return p;
}

}  // namespace

TEST_CASE("rk4 reproduces exponential decay") {
    const auto sys = decay_system();
    const auto traj =
        integrate_trajectory(sys, {1.0}, ControlSchedule::constant({0.0}), params_1d(1e-3, 1.0));
    REQUIRE(traj.terminal_flag == TerminalFlag::horizon_exhausted);
    REQUIRE(traj.final_state()[0] == Catch::Approx(std::exp(-1.0)).margin(1e-6));
}

TEST_CASE("halving dt cuts the rk4 error by at least 8x") {
    const auto sys = decay_system();
    const double exact = std::exp(-1.0);
    auto err = [&](double dt) {
        const auto t = integrate_trajectory(sys, {1.0}, ControlSchedule::constant({0.0}),
                                            params_1d(dt, 1.0));
        return std::abs(t.final_state()[0] - exact);
    };
    const double e1 = err(0.1);
    const double e2 = err(0.05);
    REQUIRE(e1 / e2 >= 8.0);
}

TEST_CASE("starting inside the target band is a precondition error") {
    const auto sys = make_int1d_mintime();
    IntegrationParams p = params_1d(1e-3, 1.0, 1e-3);
    REQUIRE_THROWS_AS(integrate_trajectory(sys, {0.05}, ControlSchedule::constant({-1.0}), p),
                      PreconditionError);
}

TEST_CASE("constant control transit hits the band at the linear time") {
    const auto sys = make_int1d_mintime();
    IntegrationParams p = params_1d(1e-3, 2.0, 1e-9);
    const auto traj = integrate_trajectory(sys, {0.5}, ControlSchedule::constant({-1.0}), p);
    REQUIRE(traj.terminal_flag == TerminalFlag::reached_target);
    REQUIRE(traj.duration() == Catch::Approx(0.4).margin(2e-3));
    REQUIRE(traj.final_cost() == Catch::Approx(0.4).margin(2e-3));
}

TEST_CASE("accumulated cost is nondecreasing") {
    const auto sys = make_scalar_lq();
    ControlSchedule sched;
    sched.breaks = {0.0, 0.3, 0.7, 1.1};
    sched.values = {{1.5}, {-0.4}, {0.9}, {-1.2}};
    IntegrationParams p = params_1d(1e-3, 2.0, 1e-9);
    const auto traj = integrate_trajectory(sys, {0.5}, sched, p);
    for (std::size_t k = 1; k < traj.size(); ++k)
        REQUIRE(traj.accumulated_cost[k] >= traj.accumulated_cost[k - 1]);
}

TEST_CASE("dynamics blow-up reports the last valid time") {
    ControlSystem s;
    s.name = "cubic";
    s.state_dim = 1;
    s.control_samples = {{0.0}};
    s.dynamics = [](const Vec& x, const Vec&) { return Vec{x[0] * x[0] * x[0]}; };
    s.running_cost = [](const Vec&, const Vec&) { return 1.0; };
    s.target_distance = [](const Vec& x) { return std::abs(x[0]); };
    IntegrationParams p;
    p.dt = 1e-3;
    p.horizon = 5.0;
    p.target_tol = 1e-12;
    p.box = {{-1e300}, {1e300}};
    try {
        integrate_trajectory(s, {2.0}, ControlSchedule::constant({0.0}), p);
        FAIL("expected divergence");
    } catch (const IntegrationDivergedError& e) {
        REQUIRE(e.last_valid_time >= 0.0);
        REQUIRE(e.last_valid_time <= 0.2);
    }
}
