#ifndef MRF_TRAJECTORY_HPP
#define MRF_TRAJECTORY_HPP

#include <functional>
#include <string>
#include <vector>

#include "mrf/common.hpp"
#include "mrf/grid.hpp"
#include "mrf/system.hpp"

namespace mrf {

enum class TerminalFlag { reached_target, horizon_exhausted, left_domain };

inline const char* to_string(TerminalFlag f) {
    switch (f) {
        case TerminalFlag::reached_target: return "reached-target";
        case TerminalFlag::horizon_exhausted: return "horizon-exhausted";
        case TerminalFlag::left_domain: return "left-domain";
    }
    return "?";
}

// Sampled trajectory with a piecewise-constant control signal. controls[k]
// is held on [times[k], times[k+1]); the last entry repeats the final held
// control so all columns have equal length. accumulated_cost[k] carries the
// running integral of l up to times[k]. Conceptually the path freezes after
// target entry; integration simply stops there.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> controls;
    std::vector<double> accumulated_cost;
    TerminalFlag terminal_flag = TerminalFlag::horizon_exhausted;

    std::size_t size() const { return times.size(); }
    const Vec& final_state() const { return states.back(); }
    double final_cost() const { return accumulated_cost.back(); }
    double duration() const { return times.back(); }
};

// Piecewise-constant open-loop schedule: value(t) = values[i] on
// [breaks[i], breaks[i+1]), last value held beyond the final break.
struct ControlSchedule {
    std::vector<double> breaks;  // breaks[0] == 0
    std::vector<Vec> values;

    static ControlSchedule constant(Vec u) { return {{0.0}, {std::move(u)}}; }

    const Vec& value_at(double t) const {
        std::size_t i = 1;
        while (i < breaks.size() && breaks[i] <= t) ++i;
        return values[i - 1];
    }
};

// One classical RK4 step of x' = f(x,u) with u held constant.
inline Vec rk4_step(const ControlSystem& sys, const Vec& x, const Vec& u, double dt) {
    const Vec k1 = sys.dynamics(x, u);
    Vec x2(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] + 0.5 * dt * k1[i];
    const Vec k2 = sys.dynamics(x2, u);
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] + 0.5 * dt * k2[i];
    const Vec k3 = sys.dynamics(x2, u);
    for (std::size_t i = 0; i < x.size(); ++i) x2[i] = x[i] + dt * k3[i];
    const Vec k4 = sys.dynamics(x2, u);
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

struct IntegrationParams {
    double dt = 1e-3;
    double horizon = 20.0;
    double target_tol = 1e-3;
    Box box;  // trajectory stops with left-domain when exiting
};

// Fixed-step RK4 with simultaneous trapezoidal accumulation of the running
// cost. Stops at the first sample inside the target band, at the horizon, or
// when the state leaves the box. The control is re-evaluated every dt from
// the supplied callback (open-loop schedules wrap it below).
inline Trajectory integrate_feedback(const ControlSystem& sys, const Vec& z,
                                     const std::function<Vec(double, const Vec&)>& control_at,
                                     const IntegrationParams& p) {
    if (p.dt <= 0.0 || p.dt >= p.horizon)
        throw PreconditionError("integrate: need 0 < dt < horizon");
    if (sys.target_distance(z) <= p.target_tol)
        throw PreconditionError("integrate: start already inside target band");
    if (!p.box.contains(z)) throw PreconditionError("integrate: start outside box");

    Trajectory traj;
    traj.terminal_flag = TerminalFlag::horizon_exhausted;
    double t = 0.0;
    Vec x = z;
    Vec u = control_at(t, x);
    double cost = 0.0;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(u);
    traj.accumulated_cost.push_back(cost);

    const auto steps = static_cast<std::size_t>(std::ceil(p.horizon / p.dt - 1e-12));
    for (std::size_t k = 0; k < steps; ++k) {
        const double step = std::min(p.dt, p.horizon - t);
        u = control_at(t, x);
        const double l0 = sys.running_cost(x, u);
        Vec xn = rk4_step(sys, x, u, step);
        if (!all_finite(xn))
            throw IntegrationDivergedError("integrate: state became non-finite", t);
        const double l1 = sys.running_cost(xn, u);
        cost += 0.5 * step * (l0 + l1);
        t += step;
        x = std::move(xn);
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.controls.push_back(u);
        traj.accumulated_cost.push_back(cost);
        if (sys.target_distance(x) <= p.target_tol) {
            traj.terminal_flag = TerminalFlag::reached_target;
            break;
        }
        if (!p.box.contains(x)) {
            traj.terminal_flag = TerminalFlag::left_domain;
            break;
        }
        if (t >= p.horizon - 1e-15) break;
    }
    return traj;
}

inline Trajectory integrate_trajectory(const ControlSystem& sys, const Vec& z,
                                       const ControlSchedule& schedule, const IntegrationParams& p) {
    return integrate_feedback(
        sys, z, [&schedule](double t, const Vec&) { return schedule.value_at(t); }, p);
}

}  // namespace mrf

#endif
