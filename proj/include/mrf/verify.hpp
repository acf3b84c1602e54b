#ifndef MRF_VERIFY_HPP
#define MRF_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mrf/brackets.hpp"
#include "mrf/common.hpp"
#include "mrf/comparators.hpp"
#include "mrf/grid.hpp"
#include "mrf/hjb.hpp"
#include "mrf/monotone.hpp"
#include "mrf/system.hpp"

namespace mrf {

// ---- structural checks -----------------------------------------------------

struct LevelCheck {
    double alpha = 0.0;
    std::size_t boundary_hits = 0;  // sublevel nodes on the outermost shell
    bool contained = false;
};

struct StructureReport {
    bool positive_definite = false;
    std::size_t posdef_violations = 0;
    double min_off_target = kInf;

    bool zero_on_target = false;
    double max_on_target = 0.0;

    bool proper_levels = false;   // every tested sublevel stays off the boundary shell
    bool proper_growth = false;   // suffix-min of W keeps growing at the box scale
    std::vector<LevelCheck> levels;
    double growth_ratio = 0.0;
    double growth_threshold = 0.0;

    bool pass() const { return positive_definite && zero_on_target && proper_levels && proper_growth; }
};

// Positive definiteness, vanishing on the target band, and a desk-scale
// properness surrogate: tested sublevels must stay strictly inside the box,
// and the lower envelope r -> min{W : d >= r} must still be growing on the
// top quarter of the distance range (a saturating field flattens there).
// Properness on an unbounded domain is not grid-decidable; both sub-checks
// are surrogates and reported as such.
inline StructureReport check_structure(const GridField& W, const DistanceFn& dist,
                                       double target_tol, double band_tol = 1e-9,
                                       std::vector<double> levels = {},
                                       double growth_threshold = 0.25) {
    StructureReport rep;
    const std::size_t n = W.node_count();

    rep.positive_definite = true;
    rep.zero_on_target = true;
    std::vector<std::pair<double, double>> dw;
    dw.reserve(n);
    double boundary_min = kInf;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = W.value_at(i);
        if (!std::isfinite(v) && !W.masked(i))
            throw PreconditionError("check_structure: non-finite value at unmasked node");
        const double d = dist(W.node_coords(i));
        dw.emplace_back(d, v);
        if (d > target_tol) {
            rep.min_off_target = std::min(rep.min_off_target, v);
            if (!(v > 0.0)) {
                rep.positive_definite = false;
                ++rep.posdef_violations;
            }
        }
        if (W.masked(i)) {
            rep.max_on_target = std::max(rep.max_on_target, std::abs(v));
            if (std::abs(v) > band_tol) rep.zero_on_target = false;
        }
        if (W.on_boundary(i)) boundary_min = std::min(boundary_min, v);
    }

    if (levels.empty()) {
        for (int q = 1; q <= 9; ++q) levels.push_back(0.1 * q * boundary_min);
    }
    rep.proper_levels = true;
    for (double a : levels) {
        LevelCheck lc;
        lc.alpha = a;
        for (std::size_t i = 0; i < n; ++i)
            if (W.on_boundary(i) && W.value_at(i) <= a) ++lc.boundary_hits;
        lc.contained = lc.boundary_hits == 0;
        if (!lc.contained) rep.proper_levels = false;
        rep.levels.push_back(lc);
    }

    // growth surrogate on the suffix minimum m(r) = min{W(x) : d(x) >= r}
    std::sort(dw.begin(), dw.end());
    std::vector<double> suffix(n);
    double run = kInf;
    for (std::size_t i = n; i-- > 0;) {
        run = std::min(run, dw[i].second);
        suffix[i] = run;
    }
    const double r_max = dw.back().first;
    auto m_at = [&](double r) {
        auto it = std::lower_bound(dw.begin(), dw.end(), std::make_pair(r, -kInf));
        if (it == dw.end()) return suffix.back();
        return suffix[static_cast<std::size_t>(it - dw.begin())];
    };
    rep.growth_threshold = growth_threshold;
    if (r_max > target_tol) {
        const double r75 = 0.75 * r_max;
        const double top_slope = (m_at(r_max) - m_at(r75)) / (r_max - r75);
        const double avg_slope = m_at(r_max) / r_max;
        rep.growth_ratio = avg_slope > 0.0 ? top_slope / avg_slope : 0.0;
        rep.proper_growth = rep.growth_ratio >= growth_threshold;
    }
    return rep;
}

// ---- decrease condition -----------------------------------------------------

struct DecreaseReport {
    bool pass = false;
    double tol = 0.0;
    double worst_residual = -kInf;
    Vec worst_node;
    std::size_t violations = 0;
    std::size_t evaluated = 0;
    std::size_t skipped = 0;
    std::vector<double> residuals;  // per evaluated node, for histograms
    std::string warning;
};

// Discrete decrease condition at every evaluable node:
//   R(x) = min_u { [I[W](x + tau f) - W(x)]/tau + p0(W(x)) l(x,u) } + gamma(W(x))
// PASS iff R <= tol everywhere evaluated. A constant gamma is accepted but
// flagged (it checks the plain rather than the weak form of the condition).
inline DecreaseReport check_decrease(const GridField& W, const ControlSystem& sys,
                                     const ComparatorPair& comp, double tau, double tol) {
    DecreaseReport rep;
    rep.tol = tol;
    if (!comp.gamma.strictly_increasing())
        rep.warning = "gamma is not strictly increasing; checking the non-weak form";

    const auto res = one_step_residual(
        W, sys,
        [&](const Vec& x, const Vec& u) {
            const double w = W.interpolate(x);
            return comp.p0(w) * sys.running_cost(x, u) + comp.gamma(w);
        },
        tau);
    rep.evaluated = res.evaluated_count;
    rep.skipped = res.skipped_count;
    rep.residuals.reserve(res.evaluated_count);
    for (std::size_t i = 0; i < W.node_count(); ++i) {
        if (!res.evaluated[i]) continue;
        const double r = res.values.value_at(i);
        rep.residuals.push_back(r);
        if (r > tol) ++rep.violations;
    }
    rep.worst_residual = res.worst;
    if (res.evaluated_count > 0) rep.worst_node = W.node_coords(res.worst_node);
    rep.pass = rep.violations == 0 && rep.evaluated > 0;
    return rep;
}

// ---- integrability condition -------------------------------------------------

namespace detail {

// Improper integral of f over (0, upper] by trapezoid on log-spaced nodes,
// with the lower endpoint pushed toward zero across refinement levels.
// Convergence = the last two levels agree to quad_tol.
struct ImproperIntegral {
    double value = 0.0;
    bool converged = false;
    std::vector<double> partials;
};

inline double trapezoid_log(const std::function<double(double)>& f, double lo, double hi,
                            std::size_t points) {
    const double ratio = std::log(hi / lo);
    double acc = 0.0;
    double x_prev = lo;
    double f_prev = f(lo);
    for (std::size_t i = 1; i < points; ++i) {
        const double x = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(points - 1));
        const double fx = f(x);
        acc += 0.5 * (x - x_prev) * (f_prev + fx);
        x_prev = x;
        f_prev = fx;
    }
    return acc;
}

// points per refinement level; ~1300 per decade keeps the trapezoid error of
// integrands like s^{-1/2} below 5e-7 ((rho-1)^2/8 with rho the node ratio)
inline std::size_t quadrature_points(std::size_t level) { return 4000 * (level + 1); }

inline ImproperIntegral improper_integral(const std::function<double(double)>& f, double upper,
                                          std::size_t levels, double quad_tol) {
    ImproperIntegral out;
    for (std::size_t k = 0; k < levels; ++k) {
        const double lo = upper * std::pow(10.0, -3.0 * static_cast<double>(k + 1));
        out.partials.push_back(trapezoid_log(f, lo, upper, quadrature_points(k)));
    }
    out.value = out.partials.back();
    const std::size_t m = out.partials.size();
    out.converged = m >= 2 && std::abs(out.partials[m - 1] - out.partials[m - 2]) <= quad_tol;
    return out;
}

}  // namespace detail

struct IcReport {
    bool pass = false;
    bool converged = false;
    bool growth_ok = false;
    double P_vmax = 0.0;
    double v_max = 0.0;
    std::vector<double> partials;  // one per refinement level
    MonotoneTable P;               // defined when converged
};

// P(v) = integral of 1/p0 over (0, v]. Divergence (partial integrals that keep
// growing across refinement levels) is an IC-fail verdict, not an error.
inline IcReport check_integrability(const Comparator& p0, double v_max,
                                    std::size_t refinement_levels, double quadrature_tol = 1e-6,
                                    double growth_threshold_frac = 0.5) {
    if (!(v_max > 0.0)) throw PreconditionError("check_integrability: v_max must be positive");
    if (refinement_levels < 2) throw PreconditionError("check_integrability: need >= 2 levels");
    IcReport rep;
    rep.v_max = v_max;
    auto integrand = [&p0](double s) {
        const double p = p0(s);
        if (!(p > 0.0)) return 1e300;
        return 1.0 / p;
    };
    const auto ii = detail::improper_integral(integrand, v_max, refinement_levels, quadrature_tol);
    rep.partials = ii.partials;
    rep.converged = ii.converged;
    rep.P_vmax = ii.value;
    rep.growth_ok = ii.value >= growth_threshold_frac * v_max;
    rep.pass = rep.converged && rep.growth_ok;
    if (!rep.converged) return rep;

    // cumulative table on the finest level grid, anchored at the origin
    const double lo = v_max * std::pow(10.0, -3.0 * static_cast<double>(refinement_levels));
    const std::size_t pts = detail::quadrature_points(refinement_levels - 1);
    std::vector<double> xs, ys;
    xs.reserve(pts + 1);
    ys.reserve(pts + 1);
    xs.push_back(0.0);
    ys.push_back(0.0);
    const double ratio = std::log(v_max / lo);
    double acc = 0.0;
    double x_prev = lo, f_prev = integrand(lo);
    xs.push_back(lo);
    ys.push_back(0.0);  // the (0, lo] remainder is below quadrature_tol by convergence
    for (std::size_t i = 1; i < pts; ++i) {
        const double x = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(pts - 1));
        const double fx = integrand(x);
        acc += 0.5 * (x - x_prev) * (f_prev + fx);
        x_prev = x;
        f_prev = fx;
        xs.push_back(x);
        ys.push_back(acc);
    }
    rep.P = MonotoneTable(std::move(xs), std::move(ys));
    return rep;
}

// ---- minimum-time bound (weak Petrov form) ----------------------------------

struct PetrovBound {
    double bound = kInf;
    bool infinite = true;
};

// Upper bound for the minimum time from z when the distance field itself
// certifies the decrease condition with l = 1: integral of 1/(p0 + gamma)
// over (0, d(z)].
inline PetrovBound petrov_min_time_bound(const ComparatorPair& comp, double dist_z,
                                         std::size_t refinement_levels = 6,
                                         double quad_tol = 1e-6) {
    if (!(dist_z > 0.0)) throw PreconditionError("petrov bound: need d(z) > 0");
    PetrovBound out;
    auto integrand = [&comp](double r) {
        const double g = comp.p0(r) + comp.gamma(r);
        if (!(g > 0.0)) return 1e300;
        return 1.0 / g;
    };
    const auto ii = detail::improper_integral(integrand, dist_z, refinement_levels, quad_tol);
    if (!ii.converged) return out;  // bound-infinite verdict
    out.bound = ii.value;
    out.infinite = false;
    return out;
}

}  // namespace mrf

#endif
