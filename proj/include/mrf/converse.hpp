#ifndef MRF_CONVERSE_HPP
#define MRF_CONVERSE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mrf/brackets.hpp"
#include "mrf/common.hpp"
#include "mrf/kl.hpp"
#include "mrf/monotone.hpp"
#include "mrf/rng.hpp"
#include "mrf/system.hpp"
#include "mrf/trajectory.hpp"

namespace mrf {

// ---- bilateral radius sequence -----------------------------------------------

// r_0 = 1, r_i = min{ beta^{-1}(r_{i-1}, 0), d_plus^{-1}(d_minus(r_{i-1})/4) },
// extended to negative indices by inverting the same recursion. Strictly
// decreasing; consecutive ratios contract the bracket gap by at least 4.
struct BilateralSequence {
    int i_min = 0;
    int i_max = 0;
    std::vector<double> r;  // r[i - i_min]

    double at(int i) const {
        if (i < i_min || i > i_max) throw RangeError("bilateral sequence: index out of range");
        return r[static_cast<std::size_t>(i - i_min)];
    }

    // i(rho) = i  iff  rho in (r_i, r_{i-1}]
    int strip_index(double rho) const {
        if (!(rho > at(i_max)) || rho > at(i_min))
            throw RangeError("strip_index: radius outside table range");
        int lo = i_min, hi = i_max;  // at(lo) >= rho > at(hi)
        while (hi - lo > 1) {
            const int mid = lo + (hi - lo) / 2;
            if (rho > at(mid))
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }
};

inline BilateralSequence build_bilateral_sequence(const KLFunction& beta,
                                                  const BracketPair& brackets, int i_min,
                                                  int i_max) {
    if (i_min > 0 || i_max < 1) throw PreconditionError("bilateral sequence: need i_min <= 0 < 1 <= i_max");
    auto forward = [&](double s) {
        return std::min(beta.inverse_r(s, 0.0), brackets.d_plus.inverse(brackets.d_minus(s) / 4.0));
    };
    std::map<int, double> rr;
    rr[0] = 1.0;
    for (int i = 1; i <= i_max; ++i) rr[i] = forward(rr[i - 1]);
    for (int i = -1; i >= i_min; --i) {
        // solve forward(s) = r_{i+1} for s; forward is increasing with forward(s) < s
        const double target = rr[i + 1];
        double lo = target, hi = std::max(2.0 * target, 1.0);
        int guard = 0;
        while (forward(hi) < target) {
            lo = hi;
            hi *= 2.0;
            if (++guard > 600 || hi > 1e290)
                throw RangeError("bilateral sequence: bisection failed to bracket the inverse at index " +
                                 std::to_string(i));
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (forward(mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        rr[i] = 0.5 * (lo + hi);
    }
    BilateralSequence seq;
    seq.i_min = i_min;
    seq.i_max = i_max;
    for (int i = i_min; i <= i_max; ++i) seq.r.push_back(rr[i]);
    for (std::size_t k = 1; k < seq.r.size(); ++k)
        if (!(seq.r[k] < seq.r[k - 1]))
            throw ConstructionError("bilateral sequence: not strictly decreasing");
    return seq;
}

// ---- ell_1 from the descent rate ----------------------------------------------

// ell_1(R) = R exp(-tau(R)) with tau the inverse of t -> beta(1, t) extended
// to negative times by beta(1,0) - t. Strictly increasing, vanishing at 0.
struct Ell1 {
    std::function<double(double)> tau;
    std::function<double(double)> value;
    MonotoneTable table;
};

inline Ell1 build_ell1(const KLFunction& beta_bar, double ladder_max = 0.0,
                       std::size_t ladder_size = 257) {
    // beta(1, .) must be strictly decreasing along knots
    const auto& kt = beta_bar.knots_t();
    for (std::size_t k = 1; k < kt.size(); ++k)
        if (!(beta_bar.value(1.0, kt[k]) < beta_bar.value(1.0, kt[k - 1])))
            throw PreconditionError("build_ell1: beta(1,.) not strictly decreasing at knots");

    const double anchor = beta_bar.value(1.0, 0.0);
    // captured by value: the returned closures outlive this call
    auto tau = [beta = beta_bar, anchor](double R) {
        if (!(R > 0.0)) throw PreconditionError("tau: need R > 0");
        if (R >= anchor) return anchor - R;  // linear extension for t < 0
        return beta.inverse_t(R, 1.0);
    };
    auto value = [tau](double R) { return R <= 0.0 ? 0.0 : R * std::exp(-tau(R)); };

    if (ladder_max <= 0.0) ladder_max = 2.0 * anchor;
    std::vector<double> xs = geomspace(1e-9 * ladder_max, ladder_max, ladder_size);
    xs.insert(xs.begin(), 0.0);
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = value(xs[i]);
    Ell1 out{tau, value, MonotoneTable(xs, ys)};
    if (!out.table.strictly_increasing())
        throw ConstructionError("build_ell1: table not strictly increasing");
    return out;
}

// ---- kappa: confinement constant ----------------------------------------------

struct KappaOptions {
    std::size_t samples = 4000;
    std::uint64_t seed = 1;
    Box sample_box;  // empty = auto enclosing box around the annulus
};

// kappa(b,c) = ell_1(b) / max{|f(x,u)| : b <= d(x) <= c}. The annulus is
// rejection-sampled; with an explicit sample box the annulus must intersect it.
inline double kappa(double b, double c, const ControlSystem& sys,
                    const std::function<double(double)>& ell1, const KappaOptions& opts = {}) {
    if (!(b > 0.0) || !(c > b)) throw PreconditionError("kappa: need 0 < b < c");
    Box box = opts.sample_box;
    if (box.lo.empty()) {
        // enclosing box: the catalog targets sit at the origin with scale << c
        box.lo.assign(sys.state_dim, -(c + 1.0));
        box.hi.assign(sys.state_dim, c + 1.0);
    }
    Rng rng(Rng::derive(opts.seed, "kappa", 0));
    double m_bar = 0.0;
    std::size_t accepted = 0;
    const std::size_t max_draws = 2000 * opts.samples;
    Vec x(sys.state_dim);
    for (std::size_t draw = 0; draw < max_draws && accepted < opts.samples; ++draw) {
        for (std::size_t k = 0; k < sys.state_dim; ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
        const double d = sys.target_distance(x);
        if (d < b || d > c) continue;
        ++accepted;
        for (const Vec& u : sys.control_samples) m_bar = std::max(m_bar, norm2(sys.dynamics(x, u)));
    }
    if (accepted == 0) throw GeometryError("kappa: annulus [" + fmt_g6(b) + "," + fmt_g6(c) +
                                           "] produced no samples in the box");
    if (!(m_bar > 0.0)) throw GeometryError("kappa: dynamics vanish on the sampled annulus");
    return ell1(b) / m_bar;
}

// ---- uniform strip-crossing times ----------------------------------------------

using FeedbackController = std::function<Vec(const Vec&)>;

struct UniformTimes {
    int i_lo = 0;
    int i_hi = 0;
    std::vector<double> T;  // T[i - i_lo]
    BilateralSequence strips;

    double at(int i) const {
        if (i < i_lo || i > i_hi) throw RangeError("uniform times: strip index out of range");
        return T[static_cast<std::size_t>(i - i_lo)];
    }

    // cumulative sum T_{i,N} = sum_{j=0..N} T_{i+j}; N = -1 gives 0
    double cumulative(int i, int N) const {
        double acc = 0.0;
        for (int j = 0; j <= N; ++j) acc += at(i + j);
        return acc;
    }

    // T(R) = cumulative(i(R), max(-1, 1 - i(R))); zero for R <= r_1
    double time_of(double R) const {
        const int i = strips.strip_index(R);
        const int N = std::max(-1, 1 - i);
        return cumulative(i, N);
    }
};

struct UniformTimeOptions {
    std::size_t samples_per_strip = 5;
    double safety_factor = 1.5;
    double dt = 1e-3;
    double hard_cap = 500.0;  // simulation time cap per start
    std::uint64_t seed = 1;
};

// Monte-Carlo surrogate for the finite-cover construction: for each strip,
// simulate the controller from sampled starts and record the time to reach
// the midpoint of the next strip down; T_i = safety_factor x (max observed).
// Strips are sampled inside the box, so T_i reflects the reachable part.
inline UniformTimes estimate_uniform_times(const ControlSystem& sys,
                                           const FeedbackController& controller,
                                           const BilateralSequence& seq, const Box& box, int i_lo,
                                           int i_hi, const UniformTimeOptions& opts = {}) {
    if (i_lo - 1 < seq.i_min || i_hi + 1 > seq.i_max)
        throw PreconditionError("estimate_uniform_times: strip range not covered by the sequence");
    UniformTimes out;
    out.i_lo = i_lo;
    out.i_hi = i_hi;
    out.strips = seq;

    for (int i = i_lo; i <= i_hi; ++i) {
        const double r_hi = seq.at(i - 1);
        const double r_lo = seq.at(i);
        const double mid_next = 0.5 * (seq.at(i) + seq.at(i + 1));
        double worst = 0.0;
        bool any = false;
        for (std::size_t s = 0; s < opts.samples_per_strip; ++s) {
            Rng rng(Rng::derive(opts.seed, "strip", static_cast<std::uint64_t>(i - i_lo) * 1000 + s));
            Vec x(sys.state_dim);
            bool found = false;
            for (std::size_t draw = 0; draw < 20000; ++draw) {
                for (std::size_t k = 0; k < sys.state_dim; ++k)
                    x[k] = rng.uniform(box.lo[k], box.hi[k]);
                const double d = sys.target_distance(x);
                if (d >= r_lo && d <= r_hi) {
                    found = true;
                    break;
                }
            }
            if (!found) continue;  // strip (partially) outside the box
            any = true;

            double t = 0.0;
            Vec state = x;
            bool crossed = false;
            while (t < opts.hard_cap) {
                if (sys.target_distance(state) <= mid_next) {
                    crossed = true;
                    break;
                }
                state = rk4_step(sys, state, controller(state), opts.dt);
                if (!all_finite(state))
                    throw IntegrationDivergedError("estimate_uniform_times: controller diverged", t);
                t += opts.dt;
            }
            if (!crossed)
                throw GeometryError("estimate_uniform_times: controller failed to advance from strip " +
                                    std::to_string(i) + " start (" + fmt_g6(x[0]) + ", ...)");
            worst = std::max(worst, t);
        }
        if (!any)
            throw GeometryError("estimate_uniform_times: strip " + std::to_string(i) +
                                " does not intersect the box");
        out.T.push_back(std::max(opts.safety_factor * worst, opts.dt));
    }
    return out;
}

// ---- Phi and Psi ----------------------------------------------------------------

// Geometric-series constant in the cumulative per-strip cost: (1/2) sum 4^{-j}.
inline constexpr double kStripCostConstant = 2.0 / 3.0;

struct PhiPsi {
    MonotoneTable phi;                    // knots at r_i, value C d_plus(r_{i-2})
    std::function<double(double)> psi;    // Psi(R) = beta(R+1, 0) + 2
    double majorization_worst_gap = 0.0;  // step - phi, sampled; <= 0 when verified
};

inline PhiPsi build_phi_psi(const BilateralSequence& seq, const BracketPair& brackets,
                            const KLFunction& beta_bar, std::size_t verify_samples = 4000) {
    if (seq.i_max - seq.i_min < 3) throw PreconditionError("build_phi_psi: sequence too short");
    std::vector<double> xs, ys;
    for (int i = seq.i_max; i >= seq.i_min + 2; --i) {
        xs.push_back(seq.at(i));
        ys.push_back(kStripCostConstant * brackets.d_plus(seq.at(i - 2)));
    }
    PhiPsi out;
    out.phi = MonotoneTable(xs, ys);

    // verify that phi dominates the step R -> C d_plus(r_{i(R)-2}) on the
    // covered range (r_{i_max}, r_{i_min+1}]
    double worst = -kInf;
    const double lo = seq.at(seq.i_max) * (1.0 + 1e-9);
    const double hi = seq.at(seq.i_min + 1);
    for (std::size_t s = 0; s < verify_samples; ++s) {
        const double R = lo * std::pow(hi / lo, halton(s, 2));
        const int i = seq.strip_index(R);
        if (i - 2 < seq.i_min) continue;
        const double step = kStripCostConstant * brackets.d_plus(seq.at(i - 2));
        worst = std::max(worst, step - out.phi(R));
    }
    out.majorization_worst_gap = worst;
    if (worst > 1e-12) throw ConstructionError("build_phi_psi: phi fails to majorize the step function");

    KLFunction beta_copy = beta_bar;
    out.psi = [beta_copy](double R) { return beta_copy.value(R + 1.0, 0.0) + 2.0; };
    return out;
}

// ---- recursive ell sequence -------------------------------------------------------

struct EllSequence {
    std::vector<double> ladder;
    std::vector<std::vector<double>> levels;  // levels[j-1] = ell_j on ladder, j = 1..j_max
    MonotoneTable final_table;                // ell_{j_max}
    std::vector<double> L;                    // L_j per recursion step
    std::vector<double> kappa_j;
    std::vector<double> plateau;              // bump heights

    const std::vector<double>& ell_j(std::size_t j) const { return levels.at(j - 1); }
};

struct EllOptions {
    std::size_t ladder_density = 33;  // points per unit bump structure
    KappaOptions kappa_opts;
};

// ell_{j+1} = (1 + rho_j) ell_j with a trapezoid bump rho_j supported on
// [beta(j,0), beta(j,0)+3], plateau (L_j + Phi(j))/kappa_j on the middle
// third, L_j = ell_j(beta(j,0)) T(j) + beta(1,0). Below beta(j,0) the bump
// vanishes, so ell_{j+1} = ell_j there exactly (the stability anchor). The
// recursion is evaluated pointwise on a ladder containing every bump
// breakpoint.
inline EllSequence build_ell_sequence(std::size_t j_max, const KLFunction& beta_bar,
                                      const MonotoneTable& phi,
                                      const std::function<double(double)>& time_of_R,
                                      const ControlSystem& sys, const Ell1& ell1,
                                      const EllOptions& opts = {}) {
    if (j_max < 2) throw PreconditionError("build_ell_sequence: need j_max >= 2");

    std::vector<double> anchors(j_max + 1);
    for (std::size_t j = 1; j <= j_max; ++j)
        anchors[j] = beta_bar.value(static_cast<double>(j), 0.0);

    const double top = anchors[j_max] + 3.0;
    std::vector<double> ladder = linspace(0.0, top, opts.ladder_density * (j_max + 3));
    for (std::size_t j = 1; j <= j_max; ++j)
        for (double off : {0.0, 1.0, 1.5, 2.0, 3.0}) ladder.push_back(anchors[j] + off);
    std::sort(ladder.begin(), ladder.end());
    ladder.erase(std::unique(ladder.begin(), ladder.end()), ladder.end());
    while (ladder.back() > top) ladder.pop_back();

    EllSequence out;
    out.ladder = ladder;
    std::vector<double> cur(ladder.size());
    for (std::size_t k = 0; k < ladder.size(); ++k) cur[k] = ell1.value(ladder[k]);
    out.levels.push_back(cur);

    // the anchors are ladder points, so this lookup is exact there
    auto eval_on_ladder = [&out](const std::vector<double>& vals, double x) {
        const auto& xs = out.ladder;
        auto it = std::lower_bound(xs.begin(), xs.end(), x);
        if (it == xs.end()) return vals.back();
        const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
        if (xs[hi] == x || hi == 0) return vals[hi];
        const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
        return (1.0 - w) * vals[hi - 1] + w * vals[hi];
    };

    const double beta10 = beta_bar.value(1.0, 0.0);
    for (std::size_t j = 1; j < j_max; ++j) {
        const double a = anchors[j];
        const double ell_at_anchor = eval_on_ladder(cur, a);
        const double Lj = ell_at_anchor * time_of_R(static_cast<double>(j)) + beta10;
        KappaOptions ko = opts.kappa_opts;
        ko.seed = Rng::derive(opts.kappa_opts.seed, "ell-kappa", j);
        const double kj = kappa(a + 1.0, a + 2.0, sys, ell1.value, ko);
        const double height = (Lj + phi(static_cast<double>(j))) / kj;
        out.L.push_back(Lj);
        out.kappa_j.push_back(kj);
        out.plateau.push_back(height);

        auto rho = [a, height](double R) {
            if (R <= a || R >= a + 3.0) return 0.0;
            if (R < a + 1.0) return height * (R - a);
            if (R <= a + 2.0) return height;
            return height * (a + 3.0 - R);
        };
        // a large plateau can make the raw product dip on the descending ramp;
        // the running max restores monotonicity without touching the anchor
        // region (exact equality below a) and still dominates ell_j
        std::vector<double> nxt(cur.size());
        double run = 0.0;
        for (std::size_t k = 0; k < cur.size(); ++k) {
            run = std::max(run, (1.0 + rho(out.ladder[k])) * cur[k]);
            nxt[k] = run;
        }
        cur = std::move(nxt);
        out.levels.push_back(cur);
    }

    out.final_table = MonotoneTable(out.ladder, cur);
    return out;
}

// ---- augmented cost functional ------------------------------------------------------

struct JParams {
    double dt = 1e-3;
    double horizon = 100.0;
    double target_tol = 1e-3;
    Box box;
    double cap = 1e6;  // accumulated-integral cap standing in for divergence
};

struct JResult {
    double value = 0.0;
    bool infinite = false;   // cap exceeded without reaching the band
    bool truncated = false;  // horizon exhausted below the cap, band not reached
    TerminalFlag flag = TerminalFlag::horizon_exhausted;
};

// J(z,u) = integral of [ell(d(x)) + l(x,u)] until target entry; the +infinity
// marker fires when the accumulated integral passes the cap, and a horizon
// exhaustion below the cap is reported as a truncated finite value.
inline JResult evaluate_J(const ControlSystem& sys, const std::function<double(double)>& ell,
                          const Vec& z, const std::function<Vec(double, const Vec&)>& control_at,
                          const JParams& p) {
    if (sys.target_distance(z) <= p.target_tol)
        throw PreconditionError("evaluate_J: start already inside target band");
    JResult out;
    double t = 0.0;
    Vec x = z;
    auto integrand = [&](const Vec& xx, const Vec& uu) {
        return ell(sys.target_distance(xx)) + sys.running_cost(xx, uu);
    };
    while (t < p.horizon) {
        const Vec u = control_at(t, x);
        const double g0 = integrand(x, u);
        Vec xn = rk4_step(sys, x, u, p.dt);
        if (!all_finite(xn)) {
            out.infinite = true;
            return out;
        }
        if (!p.box.contains(xn)) {
            out.flag = TerminalFlag::left_domain;
            out.infinite = true;  // left the domain before reaching the band
            return out;
        }
        out.value += 0.5 * p.dt * (g0 + integrand(xn, u));
        t += p.dt;
        x = std::move(xn);
        if (out.value > p.cap) {
            out.infinite = true;
            return out;
        }
        if (sys.target_distance(x) <= p.target_tol) {
            out.flag = TerminalFlag::reached_target;
            return out;
        }
    }
    out.truncated = true;
    return out;
}

}  // namespace mrf

#endif
