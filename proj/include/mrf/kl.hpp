#ifndef MRF_KL_HPP
#define MRF_KL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mrf/common.hpp"
#include "mrf/rng.hpp"

namespace mrf {

// Two-argument comparison function built from a knot table: strictly
// increasing and unbounded in r, strictly decreasing in t, exponential decay
// beyond the last t-knot. Values between knots are bilinear; beyond the last
// r-knot the r-slope of the final segment continues.
class KLFunction {
  public:
    KLFunction() = default;

    KLFunction(std::vector<double> knots_r, std::vector<double> knots_t,
               std::vector<double> node_values, double tail_rate)
        : knots_r_(std::move(knots_r)),
          knots_t_(std::move(knots_t)),
          values_(std::move(node_values)),
          tail_rate_(tail_rate) {
        if (knots_r_.size() < 2 || knots_t_.size() < 2)
            throw PreconditionError("kl: need >= 2 knots per axis");
        if (values_.size() != knots_r_.size() * knots_t_.size())
            throw PreconditionError("kl: node value count mismatch");
        if (!(tail_rate_ > 0.0)) throw PreconditionError("kl: tail rate must be positive");
        for (std::size_t i = 1; i < knots_r_.size(); ++i)
            if (!(knots_r_[i] > knots_r_[i - 1])) throw PreconditionError("kl: r-knots not increasing");
        for (std::size_t k = 1; k < knots_t_.size(); ++k)
            if (!(knots_t_[k] > knots_t_[k - 1])) throw PreconditionError("kl: t-knots not increasing");
    }

    static KLFunction from_function(const std::function<double(double, double)>& f,
                                    std::vector<double> knots_r, std::vector<double> knots_t,
                                    double tail_rate) {
        std::vector<double> vals(knots_r.size() * knots_t.size());
        for (std::size_t i = 0; i < knots_r.size(); ++i)
            for (std::size_t k = 0; k < knots_t.size(); ++k)
                vals[i * knots_t.size() + k] = f(knots_r[i], knots_t[k]);
        return KLFunction(std::move(knots_r), std::move(knots_t), std::move(vals), tail_rate);
    }

    const std::vector<double>& knots_r() const { return knots_r_; }
    const std::vector<double>& knots_t() const { return knots_t_; }
    const std::vector<double>& node_values() const { return values_; }
    double tail_rate() const { return tail_rate_; }
    double node(std::size_t i, std::size_t k) const { return values_[i * knots_t_.size() + k]; }

    double value(double r, double t) const {
        if (r <= knots_r_.front() && knots_r_.front() <= 0.0 && r <= 0.0) return 0.0;
        if (t > knots_t_.back())
            return value(r, knots_t_.back()) * std::exp(-tail_rate_ * (t - knots_t_.back()));
        if (t < knots_t_.front()) t = knots_t_.front();
        const std::size_t kt = segment(knots_t_, t);
        const double wt = (t - knots_t_[kt]) / (knots_t_[kt + 1] - knots_t_[kt]);
        return eval_r(r, kt, wt);
    }

    // Inverse in r at fixed t (strictly increasing in r); extends past the
    // last knot along the terminal slope, so any y >= 0 is reachable.
    double inverse_r(double y, double t) const {
        if (y <= value(knots_r_.front(), t)) return knots_r_.front();
        double lo = knots_r_.front(), hi = knots_r_.back();
        if (y >= value(hi, t)) {
            // extend until bracketed by the linear tail
            double step = std::max(1.0, hi - lo);
            while (value(hi, t) < y) {
                lo = hi;
                hi += step;
                step *= 2.0;
                if (hi > 1e300) throw RangeError("kl inverse_r: target value unreachable");
            }
        }
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (value(mid, t) < y)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Inverse in t at fixed r (strictly decreasing in t). Values below the
    // tail are inverted analytically through the exponential decay.
    double inverse_t(double y, double r) const {
        if (!(y > 0.0)) throw RangeError("kl inverse_t: need y > 0");
        const double v0 = value(r, knots_t_.front());
        if (y >= v0) return knots_t_.front();
        const double vend = value(r, knots_t_.back());
        if (y <= vend) {
            if (vend <= 0.0) throw RangeError("kl inverse_t: value not reachable");
            return knots_t_.back() + std::log(vend / y) / tail_rate_;
        }
        double lo = knots_t_.front(), hi = knots_t_.back();
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            if (value(r, mid) > y)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    // Axiom checks at knot level: zero row at r = 0, strict increase in r,
    // strict decrease in t (for r > 0), decaying tail.
    std::string check_axioms() const {
        const std::size_t nr = knots_r_.size(), nt = knots_t_.size();
        if (knots_r_.front() == 0.0)
            for (std::size_t k = 0; k < nt; ++k)
                if (node(0, k) != 0.0) return "value(0,t) != 0 at t-knot " + fmt_g6(knots_t_[k]);
        for (std::size_t k = 0; k < nt; ++k)
            for (std::size_t i = 1; i < nr; ++i)
                if (!(node(i, k) > node(i - 1, k)))
                    return "not strictly increasing in r at (r,t)=(" + fmt_g6(knots_r_[i]) + "," +
                           fmt_g6(knots_t_[k]) + ")";
        for (std::size_t i = 0; i < nr; ++i) {
            if (knots_r_[i] <= 0.0) continue;
            for (std::size_t k = 1; k < nt; ++k)
                if (!(node(i, k) < node(i, k - 1)))
                    return "not strictly decreasing in t at (r,t)=(" + fmt_g6(knots_r_[i]) + "," +
                           fmt_g6(knots_t_[k]) + ")";
        }
        if (!(tail_rate_ > 0.0)) return "tail rate not positive";
        return {};
    }

  private:
    double eval_r(double r, std::size_t kt, double wt) const {
        const auto at = [&](std::size_t i) {
            return (1.0 - wt) * node(i, kt) + wt * node(i, kt + 1);
        };
        const std::size_t nr = knots_r_.size();
        if (r >= knots_r_.back()) {
            const double y1 = at(nr - 1), y0 = at(nr - 2);
            const double slope = (y1 - y0) / (knots_r_[nr - 1] - knots_r_[nr - 2]);
            return y1 + slope * (r - knots_r_.back());
        }
        if (r <= knots_r_.front()) return at(0);
        const std::size_t i = segment(knots_r_, r);
        const double wr = (r - knots_r_[i]) / (knots_r_[i + 1] - knots_r_[i]);
        return (1.0 - wr) * at(i) + wr * at(i + 1);
    }

    static std::size_t segment(const std::vector<double>& knots, double x) {
        std::size_t lo = 0, hi = knots.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (knots[mid] <= x)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    std::vector<double> knots_r_;
    std::vector<double> knots_t_;
    std::vector<double> values_;
    double tail_rate_ = 1.0;
};

// Builds a KL majorant of a nonnegative step function b(R,t) that is bounded
// on the knot rectangle. Node values take the max of b over all adjacent
// cells (subsampled), so any convex combination of the four cell corners
// dominates b inside the cell; monotone sweeps plus a strictness bump then
// enforce the KL axioms without dropping below b.
inline KLFunction majorize_step_function(const std::function<double(double, double)>& b,
                                         std::vector<double> knots_r, std::vector<double> knots_t,
                                         double tail_rate, std::size_t subsample = 8) {
    if (knots_r.empty() || knots_r.front() != 0.0)
        knots_r.insert(knots_r.begin(), 0.0);
    const std::size_t nr = knots_r.size(), nt = knots_t.size();
    std::vector<double> vals(nr * nt, 0.0);

    auto cell_max = [&](std::size_t i0, std::size_t k0) {
        double m = 0.0;
        for (std::size_t a = 0; a <= subsample; ++a) {
            const double r = knots_r[i0] +
                             (knots_r[i0 + 1] - knots_r[i0]) * static_cast<double>(a) /
                                 static_cast<double>(subsample);
            for (std::size_t c = 0; c <= subsample; ++c) {
                const double t = knots_t[k0] +
                                 (knots_t[k0 + 1] - knots_t[k0]) * static_cast<double>(c) /
                                     static_cast<double>(subsample);
                m = std::max(m, b(r, t));
            }
        }
        return m;
    };

    for (std::size_t i = 0; i + 1 < nr; ++i) {
        for (std::size_t k = 0; k + 1 < nt; ++k) {
            const double m = cell_max(i, k);
            for (std::size_t di = 0; di <= 1; ++di)
                for (std::size_t dk = 0; dk <= 1; ++dk) {
                    double& v = vals[(i + di) * nt + (k + dk)];
                    v = std::max(v, m);
                }
        }
    }
    // r = 0 row pinned to zero (b(0,t) = 0 for step functions we majorize)
    for (std::size_t k = 0; k < nt; ++k) vals[k] = 0.0;

    // monotone sweeps: nondecreasing in r, nonincreasing in t
    for (std::size_t k = 0; k < nt; ++k)
        for (std::size_t i = 1; i < nr; ++i)
            vals[i * nt + k] = std::max(vals[i * nt + k], vals[(i - 1) * nt + k]);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t k = nt - 1; k-- > 0;)
            vals[i * nt + k] = std::max(vals[i * nt + k], vals[i * nt + k + 1]);

    // strictness bump, vanishing at r = 0
    double scale = 0.0;
    for (double v : vals) scale = std::max(scale, v);
    const double eps = 1e-9 * (1.0 + scale);
    const double rmax = knots_r.back();
    for (std::size_t i = 0; i < nr; ++i) {
        const double rr = knots_r[i] / rmax;
        for (std::size_t k = 0; k < nt; ++k)
            vals[i * nt + k] += eps * rr * (1.0 + 1.0 / (1.0 + knots_t[k]));
    }
    return KLFunction(std::move(knots_r), std::move(knots_t), std::move(vals), tail_rate);
}

// Samples the rectangle quasi-randomly and reports the worst b - beta gap
// (positive = majorization violated).
inline double majorization_gap(const KLFunction& beta, const std::function<double(double, double)>& b,
                               double r_lo, double r_hi, double t_lo, double t_hi,
                               std::size_t samples) {
    double worst = -kInf;
    for (std::size_t s = 0; s < samples; ++s) {
        const double r = r_lo + (r_hi - r_lo) * halton(s, 2);
        const double t = t_lo + (t_hi - t_lo) * halton(s, 3);
        worst = std::max(worst, b(r, t) - beta.value(r, t));
    }
    return worst;
}

}  // namespace mrf

#endif
