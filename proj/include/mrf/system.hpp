#ifndef MRF_SYSTEM_HPP
#define MRF_SYSTEM_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mrf/common.hpp"

namespace mrf {

// Control system with a finite control sample set standing in for the compact
// control set, a nonnegative running cost, and the distance to the target set.
// All callables must be pure; systems are safe to share across workers.
struct ControlSystem {
    std::string name;
    std::size_t state_dim = 0;
    std::vector<Vec> control_samples;
    std::function<Vec(const Vec&, const Vec&)> dynamics;        // f(x,u)
    std::function<double(const Vec&, const Vec&)> running_cost; // l(x,u) >= 0
    std::function<double(const Vec&)> target_distance;          // d(x) >= 0, 0 on target
    std::optional<double> lipschitz_hint;

    void validate() const {
        if (state_dim == 0) throw PreconditionError(name + ": state_dim must be positive");
        if (control_samples.empty()) throw PreconditionError(name + ": control sample set is empty");
        if (!dynamics || !running_cost || !target_distance)
            throw PreconditionError(name + ": missing dynamics/cost/distance");
    }
};

namespace detail {

inline std::vector<Vec> linspace_controls(double lo, double hi, std::size_t n) {
    std::vector<Vec> u;
    u.reserve(n);
    if (n == 1) {
        u.push_back({0.5 * (lo + hi)});
        return u;
    }
    for (std::size_t i = 0; i < n; ++i)
        u.push_back({lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1)});
    return u;
}

inline double ball_distance(const Vec& x, double radius) {
    return std::max(norm2(x) - radius, 0.0);
}

}  // namespace detail

struct CatalogParams {
    std::size_t control_count = 3;
    double target_radius = 0.1;
    Vec drift = {0.5, 0.0};  // zermelo only
};

// x' = u, u in [-1,1], l = 1, target {|x| <= r}.
inline ControlSystem make_int1d_mintime(const CatalogParams& p = {}) {
    ControlSystem s;
    s.name = "int1d_mintime";
    s.state_dim = 1;
    s.control_samples = detail::linspace_controls(-1.0, 1.0, p.control_count);
    s.dynamics = [](const Vec&, const Vec& u) { return Vec{u[0]}; };
    s.running_cost = [](const Vec&, const Vec&) { return 1.0; };
    const double r = p.target_radius;
    s.target_distance = [r](const Vec& x) { return std::max(std::abs(x[0]) - r, 0.0); };
    s.lipschitz_hint = 1.0;
    return s;
}

// x'' = u: state (x,v), u in [-1,1], l = 1, target ball of radius r in phase space.
inline ControlSystem make_double_integrator_mintime(const CatalogParams& p = {}) {
    ControlSystem s;
    s.name = "double_integrator_mintime";
    s.state_dim = 2;
    s.control_samples = detail::linspace_controls(-1.0, 1.0, p.control_count);
    s.dynamics = [](const Vec& x, const Vec& u) { return Vec{x[1], u[0]}; };
    s.running_cost = [](const Vec&, const Vec&) { return 1.0; };
    const double r = p.target_radius;
    s.target_distance = [r](const Vec& x) { return detail::ball_distance(x, r); };
    s.lipschitz_hint = 1.0;
    return s;
}

// Planar kinematics with constant drift: x' = (cos th, sin th) + c, control is
// the heading angle, l = 1, target ball of radius r at the origin.
inline ControlSystem make_zermelo(const CatalogParams& p = {}) {
    ControlSystem s;
    s.name = "zermelo";
    s.state_dim = 2;
    const std::size_t n = std::max<std::size_t>(p.control_count, 4);
    s.control_samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        s.control_samples.push_back({2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n)});
    Vec drift = p.drift;
    drift.resize(2, 0.0);
    s.dynamics = [drift](const Vec&, const Vec& u) {
        return Vec{std::cos(u[0]) + drift[0], std::sin(u[0]) + drift[1]};
    };
    s.running_cost = [](const Vec&, const Vec&) { return 1.0; };
    const double r = p.target_radius;
    s.target_distance = [r](const Vec& x) { return detail::ball_distance(x, r); };
    s.lipschitz_hint = 0.0;
    return s;
}

// x' = u, l = x^2 + u^2, target {|x| <= r}.
inline ControlSystem make_scalar_lq(const CatalogParams& p = {}) {
    ControlSystem s;
    s.name = "scalar_lq";
    s.state_dim = 1;
    s.control_samples = detail::linspace_controls(-2.0, 2.0, std::max<std::size_t>(p.control_count, 9));
    s.dynamics = [](const Vec&, const Vec& u) { return Vec{u[0]}; };
    s.running_cost = [](const Vec& x, const Vec& u) { return x[0] * x[0] + u[0] * u[0]; };
    const double r = p.target_radius;
    s.target_distance = [r](const Vec& x) { return std::max(std::abs(x[0]) - r, 0.0); };
    s.lipschitz_hint = 0.0;
    return s;
}

inline ControlSystem make_system(const std::string& name, const CatalogParams& p = {}) {
    if (name == "int1d_mintime") return make_int1d_mintime(p);
    if (name == "double_integrator_mintime") return make_double_integrator_mintime(p);
    if (name == "zermelo") return make_zermelo(p);
    if (name == "scalar_lq") return make_scalar_lq(p);
    throw ConfigError("unknown system name: " + name);
}

}  // namespace mrf

#endif
