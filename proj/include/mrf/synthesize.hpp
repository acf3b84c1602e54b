#ifndef MRF_SYNTHESIZE_HPP
#define MRF_SYNTHESIZE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mrf/brackets.hpp"
#include "mrf/common.hpp"
#include "mrf/comparators.hpp"
#include "mrf/grid.hpp"
#include "mrf/kl.hpp"
#include "mrf/monotone.hpp"
#include "mrf/system.hpp"
#include "mrf/trajectory.hpp"

namespace mrf {

// ---- greedy one-step control selection --------------------------------------

// Control sample minimizing the one-step surrogate
//   [I[W](x + tau f(x,u)) - W(x)]/tau + p0(W(x)) l(x,u),
// ties broken by lowest sample index. Controls whose stencil exits the box
// are not eligible; if none is, the position is reported as stuck.
inline std::size_t greedy_control_index(const Vec& x, const GridField& W, const ControlSystem& sys,
                                        const ComparatorPair& comp, double tau) {
    const double wx = W.interpolate(x);
    const double p0w = comp.p0(wx);
    double best = kInf;
    std::size_t best_idx = sys.control_samples.size();
    Vec y(x.size());
    for (std::size_t c = 0; c < sys.control_samples.size(); ++c) {
        const Vec& u = sys.control_samples[c];
        const Vec fx = sys.dynamics(x, u);
        for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + tau * fx[k];
        if (!W.inside(y)) continue;
        const double v = (W.interpolate(y) - wx) / tau + p0w * sys.running_cost(x, u);
        if (v < best) {
            best = v;
            best_idx = c;
        }
    }
    if (best_idx == sys.control_samples.size())
        throw StuckError("greedy control: every stencil exits the box", x);
    return best_idx;
}

inline const Vec& greedy_control(const Vec& x, const GridField& W, const ControlSystem& sys,
                                 const ComparatorPair& comp, double tau) {
    return sys.control_samples[greedy_control_index(x, W, sys, comp, tau)];
}

// ---- per-segment bounds ------------------------------------------------------

// Uniform bound on the duration of halving segment N from level-set geometry:
//   3 d_plus(R) / (2^N gamma(d_minus(R)/2^N)).
inline double segment_time_bound(std::size_t N, double R, const BracketPair& brackets,
                                 const Comparator& gamma) {
    if (N < 1) throw PreconditionError("segment_time_bound: levels start at 1");
    if (!(R > 0.0)) throw PreconditionError("segment_time_bound: need R > 0");
    const double scale = std::pow(2.0, static_cast<double>(N));
    const double g = gamma(brackets.d_minus(R) / scale);
    if (!(g > 0.0)) throw PreconditionError("segment_time_bound: gamma not positive at argument");
    return 3.0 * brackets.d_plus(R) / (scale * g);
}

// Certified global cost bound 4 P(W(z)/2).
inline double cost_bound(double Wz, const MonotoneTable& P) {
    if (Wz < 0.0) throw PreconditionError("cost_bound: need W(z) >= 0");
    const double arg = 0.5 * Wz;
    if (arg > P.x_max() * (1.0 + 1e-12)) throw RangeError("cost_bound: W(z)/2 beyond P table range");
    return 4.0 * P(arg);
}

// ---- level-halving synthesis -------------------------------------------------

struct SegmentCertificate {
    std::size_t index = 0;  // N, 1-based
    Vec start;              // z_{N-1}
    Vec end;                // z_N
    double t_begin = 0.0;
    double duration = 0.0;  // t_N
    double cost = 0.0;
    double level_before = 0.0;
    double level_after = 0.0;
    double min_level_seen = 0.0;
    double max_level_seen = 0.0;
    double time_bound = 0.0;      // segment_time_bound(N, d(z))
    double cost_bound_rhs = 0.0;  // 4 (W(z_N) - W(z_{N+1})) / p0(W(z_N))
    bool rel1 = false;            // levels stayed in [1/2, 3/2] of level_before and halved exactly
    bool rel2 = false;            // segment cost within the p0-weighted level drop
    bool rel3 = false;            // duration within the uniform time bound
};

enum class SynthesisStatus { reached_target, max_levels, stalled, left_domain };

inline const char* to_string(SynthesisStatus s) {
    switch (s) {
        case SynthesisStatus::reached_target: return "reached-target";
        case SynthesisStatus::max_levels: return "max-levels";
        case SynthesisStatus::stalled: return "stalled";
        case SynthesisStatus::left_domain: return "left-domain";
    }
    return "?";
}

struct SynthesisParams {
    double dt = 1e-3;
    double tau = 0.0;  // greedy stencil step; 0 = min grid spacing
    double halving_tol_rel = 1e-6;
    std::size_t max_levels = 40;
    double target_tol = 1e-3;
    double safety_factor = 5.0;
    double quad_tol = 1e-6;
};

struct SynthesisResult {
    Trajectory trajectory;
    std::vector<SegmentCertificate> segments;
    SynthesisStatus status = SynthesisStatus::stalled;
    double W_start = 0.0;
    double dist_start = 0.0;
    double cost_bound_value = 0.0;
    bool cost_within_bound = false;
    bool all_segment_checks = false;
    std::string note;
};

// Sample-and-hold greedy descent on a verified field W, closing a certified
// segment whenever W crosses half its segment-start level. Level targets are
// anchored at W(z)/2^N so the certificate levels form an exact geometric
// sequence up to the event-detection tolerance; crossings are located by
// bisection on the held-control substep. A segment that runs longer than
// safety_factor times its uniform time bound aborts the synthesis: the
// decrease certificate did not transfer to the sampled closed loop at this dt.
inline SynthesisResult synthesize_level_halving(const ControlSystem& sys, const GridField& W,
                                                const ComparatorPair& comp,
                                                const BracketPair& brackets,
                                                const MonotoneTable& P, const Vec& z,
                                                const SynthesisParams& params) {
    SynthesisResult out;
    const double dz = sys.target_distance(z);
    if (dz <= params.target_tol)
        throw PreconditionError("synthesize: start already inside target band");
    if (!W.inside(z)) throw PreconditionError("synthesize: start outside field box");

    double tau = params.tau;
    if (tau == 0.0) tau = *std::min_element(W.spacing().begin(), W.spacing().end());

    const double W0 = W.interpolate(z);
    if (!(W0 > 0.0)) throw PreconditionError("synthesize: W(z) must be positive");
    const double halving_tol = params.halving_tol_rel * W0;
    out.W_start = W0;
    out.dist_start = dz;
    out.cost_bound_value = cost_bound(W0, P);

    Trajectory& traj = out.trajectory;
    double t = 0.0;
    Vec x = z;
    double cost = 0.0;
    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.controls.push_back(sys.control_samples[0]);
    traj.accumulated_cost.push_back(cost);

    std::size_t N = 1;
    double level_before = W0;
    double level_target = 0.5 * W0;
    double seg_cost_start = 0.0;
    SegmentCertificate seg;
    auto open_segment = [&]() {
        seg = SegmentCertificate{};
        seg.index = N;
        seg.start = x;
        seg.t_begin = t;
        seg.level_before = level_before;
        seg.min_level_seen = level_before;
        seg.max_level_seen = level_before;
        seg.time_bound = segment_time_bound(N, dz, brackets, comp.gamma);
        seg_cost_start = cost;
    };
    open_segment();

    const std::size_t hard_step_cap = 100000000;
    out.status = SynthesisStatus::max_levels;
    for (std::size_t step = 0; step < hard_step_cap; ++step) {
        std::size_t uidx;
        try {
            uidx = greedy_control_index(x, W, sys, comp, tau);
        } catch (const StuckError&) {
            out.status = SynthesisStatus::left_domain;
            out.note = "greedy control stuck at segment " + std::to_string(N);
            break;
        }
        const Vec& u = sys.control_samples[uidx];
        const double l0 = sys.running_cost(x, u);
        Vec xn = rk4_step(sys, x, u, params.dt);
        if (!all_finite(xn)) throw IntegrationDivergedError("synthesize: non-finite state", t);

        double step_len = params.dt;
        bool crossed = false;
        if (W.inside(xn) && W.interpolate(xn) <= level_target) {
            // earliest crossing of the level within the held-control substep
            crossed = true;
            double lo = 0.0, hi = params.dt;
            Vec xs = xn;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const Vec xm = rk4_step(sys, x, u, mid);
                if (W.inside(xm) && W.interpolate(xm) <= level_target) {
                    hi = mid;
                    xs = xm;
                } else {
                    lo = mid;
                }
                if (std::abs(W.interpolate(xs) - level_target) <= halving_tol) break;
            }
            step_len = hi;
            xn = xs;
        } else if (!W.inside(xn)) {
            out.status = SynthesisStatus::left_domain;
            out.note = "trajectory left the field box in segment " + std::to_string(N);
            break;
        }

        const double l1 = sys.running_cost(xn, u);
        cost += 0.5 * step_len * (l0 + l1);
        t += step_len;
        x = std::move(xn);
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.controls.push_back(u);
        traj.accumulated_cost.push_back(cost);

        const double wx = W.interpolate(x);
        seg.min_level_seen = std::min(seg.min_level_seen, wx);
        seg.max_level_seen = std::max(seg.max_level_seen, wx);

        if (crossed) {
            seg.end = x;
            seg.duration = t - seg.t_begin;
            seg.cost = cost - seg_cost_start;
            seg.level_after = wx;
            const double p0_after = comp.p0(seg.level_after);
            seg.cost_bound_rhs = p0_after > 0.0 ? 2.0 * seg.level_after / p0_after : kInf;
            const double slack = 2.0 * halving_tol;
            seg.rel1 = seg.min_level_seen >= 0.5 * seg.level_before - slack &&
                       seg.max_level_seen <= 1.5 * seg.level_before + slack &&
                       std::abs(seg.level_after - 0.5 * seg.level_before) <= slack;
            seg.rel2 = p0_after > 0.0 &&
                       seg.cost <= 2.0 * (seg.level_before - seg.level_after) / p0_after +
                                       params.quad_tol;
            seg.rel3 = seg.duration <= seg.time_bound;
            out.segments.push_back(seg);

            if (sys.target_distance(x) <= params.target_tol) {
                out.status = SynthesisStatus::reached_target;
                break;
            }
            if (N >= params.max_levels) {
                out.status = SynthesisStatus::max_levels;
                break;
            }
            ++N;
            level_before = wx;
            level_target = W0 / std::pow(2.0, static_cast<double>(N));
            open_segment();
            continue;
        }

        if (sys.target_distance(x) <= params.target_tol) {
            out.status = SynthesisStatus::reached_target;
            break;
        }
        if (t - seg.t_begin > params.safety_factor * seg.time_bound) {
            out.status = SynthesisStatus::stalled;
            out.note = "segment " + std::to_string(N) + " exceeded " +
                       fmt_g6(params.safety_factor) + " x time bound " + fmt_g6(seg.time_bound);
            break;
        }
    }

    out.cost_within_bound = cost <= out.cost_bound_value + params.quad_tol;
    out.all_segment_checks = !out.segments.empty();
    for (const auto& s : out.segments)
        out.all_segment_checks = out.all_segment_checks && s.rel1 && s.rel2 && s.rel3;
    return out;
}

// ---- explicit descent rate ----------------------------------------------------

struct DescentRate {
    KLFunction beta;
    MonotoneTable level_cap;            // Gamma(R) = d_minus^{-1}(1.5 d_plus(R))
    std::vector<double> R_knots;        // rows of the N / T tables
    std::vector<double> r_knots;        // columns
    std::vector<int> N_table;           // N(R, r), row-major
    std::vector<double> T_table;        // cumulative time bound T(R, r), row-major
    double R_max = 0.0;
    double r_min = 0.0;
    double t_max = 0.0;                 // rectangle: [r_min, R_max] x [0, t_max]
    double majorization_worst_gap = 0.0;
    std::function<double(double, double)> step_envelope;  // the step function b
};

struct DescentRateOptions {
    std::size_t n_r = 49;
    std::size_t n_t = 49;
    std::size_t subsample = 8;
    std::size_t verify_samples = 10000;
};

namespace detail {

inline int halving_count(double R, double r, const BracketPair& br) {
    const double arg = 3.0 * br.d_plus(R) / br.d_minus(r);
    if (!(arg > 1.0)) return 0;
    return static_cast<int>(std::ceil(std::log2(arg) - 1e-12));
}

}  // namespace detail

// Smallest number of halvings guaranteed to push the distance below r when
// starting no further than R.
inline int halving_count(double R, double r, const BracketPair& brackets) {
    if (!(R > 0.0) || !(r > 0.0)) throw PreconditionError("halving_count: need R, r > 0");
    return detail::halving_count(R, r, brackets);
}

// Cumulative uniform time bound: sum of segment_time_bound over the halvings
// needed to reach r from R.
inline double cumulative_time_bound(double R, double r, const BracketPair& brackets,
                                    const Comparator& gamma) {
    const int N = halving_count(R, r, brackets);
    double acc = 0.0;
    for (int j = 1; j <= N; ++j)
        acc += segment_time_bound(static_cast<std::size_t>(j), R, brackets, gamma);
    return acc;
}

// Builds the explicit class-KL descent rate: the step envelope
//   b(R, t) = Gamma(R) for t < t_1(R),   R/(j+1) for t in [t_j, t_{j+1}),
// with t_j = cumulative_time_bound(R, R/(j+1)), majorized by a knot-table KL
// function whose node values dominate b on every adjacent cell. Verified on a
// quasi-random sample of the working rectangle; refined once on failure.
inline DescentRate build_descent_rate(const BracketPair& brackets, const Comparator& gamma,
                                      double R_max, double r_min,
                                      const DescentRateOptions& opts = {}) {
    if (!(r_min > 0.0) || !(R_max > r_min))
        throw PreconditionError("build_descent_rate: need 0 < r_min < R_max");

    auto Gamma = [brackets](double R) { return brackets.d_minus.inverse(1.5 * brackets.d_plus(R)); };

    // step envelope evaluator; per call grows the prefix sums of the
    // per-segment bounds for its R and walks the staircase (t_j nondecreasing).
    // Captures by value: the evaluator outlives this call in the result.
    auto b = [brackets, gamma, Gamma](double R, double t) {
        if (!(R > 0.0)) return 0.0;
        std::vector<double> prefix = {0.0};  // prefix[N] = sum of first N segment bounds
        auto cum = [&](int N) {
            while (static_cast<int>(prefix.size()) <= N)
                prefix.push_back(prefix.back() +
                                 segment_time_bound(prefix.size(), R, brackets, gamma));
            return prefix[static_cast<std::size_t>(N)];
        };
        double level = Gamma(R);
        for (int j = 1; j < 100000; ++j) {
            const int N = detail::halving_count(R, R / static_cast<double>(j + 1), brackets);
            if (cum(N) > t) break;
            level = R / static_cast<double>(j + 1);
        }
        return level;
    };

    const double t_max = cumulative_time_bound(R_max, r_min, brackets, gamma);

    auto assemble = [&](std::size_t n_r, std::size_t n_t, std::size_t subsample) {
        auto knots_r = geomspace(r_min, R_max, n_r);
        auto knots_t = linspace(0.0, t_max, n_t);
        const double tail_rate = std::log(2.0) / (1.0 + 0.1 * t_max);
        return majorize_step_function(b, knots_r, knots_t, tail_rate, subsample);
    };

    DescentRate out;
    out.beta = assemble(opts.n_r, opts.n_t, opts.subsample);
    out.majorization_worst_gap =
        majorization_gap(out.beta, b, r_min, R_max, 0.0, t_max, opts.verify_samples);
    if (out.majorization_worst_gap > 0.0) {
        out.beta = assemble(2 * opts.n_r, 2 * opts.n_t, 2 * opts.subsample);
        out.majorization_worst_gap =
            majorization_gap(out.beta, b, r_min, R_max, 0.0, t_max, opts.verify_samples);
        if (out.majorization_worst_gap > 0.0)
            throw ConstructionError("build_descent_rate: majorization failed after refinement, gap " +
                                    fmt_g6(out.majorization_worst_gap));
    }

    out.R_max = R_max;
    out.r_min = r_min;
    out.t_max = t_max;
    out.R_knots = geomspace(r_min, R_max, 17);
    out.r_knots = out.R_knots;
    out.level_cap = MonotoneTable::from_function(Gamma, out.R_knots);
    out.N_table.reserve(out.R_knots.size() * out.r_knots.size());
    out.T_table.reserve(out.R_knots.size() * out.r_knots.size());
    for (double R : out.R_knots)
        for (double r : out.r_knots) {
            out.N_table.push_back(detail::halving_count(R, r, brackets));
            out.T_table.push_back(cumulative_time_bound(R, r, brackets, gamma));
        }
    out.step_envelope = b;
    return out;
}

// ---- super-optimality along a stored trajectory --------------------------------

struct SuperoptReport {
    double residual = -kInf;  // sup_T { int_0^T [p0(W) l + gamma(W)] + W(x(T)) } - W(z)
    double sup_time = 0.0;
    bool truncated = false;   // trajectory left the field box; prefix evaluated
};

inline SuperoptReport check_superoptimality(const Trajectory& traj, const GridField& W,
                                            const ComparatorPair& comp, const ControlSystem& sys) {
    if (traj.size() == 0) throw PreconditionError("superoptimality: empty trajectory");
    if (!W.inside(traj.states.front()))
        throw PreconditionError("superoptimality: start outside field box");
    const double W0 = W.interpolate(traj.states.front());
    if (!(W0 > 0.0)) throw PreconditionError("superoptimality: W at start must be positive");

    SuperoptReport rep;
    auto integrand = [&](const Vec& x, const Vec& u) {
        const double w = W.interpolate(x);
        return comp.p0(w) * sys.running_cost(x, u) + comp.gamma(w);
    };
    double cum = 0.0;
    rep.residual = 0.0;  // T = 0 term
    rep.sup_time = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k) {
        if (!W.inside(traj.states[k])) {
            rep.truncated = true;
            break;
        }
        const Vec& u = traj.controls[k - 1];
        const double g_left = integrand(traj.states[k - 1], u);
        const double g_here = integrand(traj.states[k], u);
        cum += 0.5 * (traj.times[k] - traj.times[k - 1]) * (g_left + g_here);
        const double val = cum + W.interpolate(traj.states[k]) - W0;
        if (val > rep.residual) {
            rep.residual = val;
            rep.sup_time = traj.times[k];
        }
    }
    return rep;
}

}  // namespace mrf

#endif
