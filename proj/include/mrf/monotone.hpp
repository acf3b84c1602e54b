#ifndef MRF_MONOTONE_HPP
#define MRF_MONOTONE_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "mrf/common.hpp"

namespace mrf {

// Piecewise-linear nondecreasing table y(x) with monotone-preserving
// evaluation and inverse lookup. Below the first row the table is anchored at
// the origin (values head to 0), above the last row it continues with the
// final segment slope.
class MonotoneTable {
  public:
    MonotoneTable() = default;

    MonotoneTable(std::vector<double> xs, std::vector<double> ys)
        : xs_(std::move(xs)), ys_(std::move(ys)) {
        if (xs_.size() != ys_.size() || xs_.size() < 2)
            throw PreconditionError("monotone table: need >= 2 rows");
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            if (!(xs_[i] > xs_[i - 1])) throw PreconditionError("monotone table: x not strictly increasing");
            if (ys_[i] < ys_[i - 1]) throw PreconditionError("monotone table: y decreasing");
        }
    }

    static MonotoneTable from_function(const std::function<double(double)>& f,
                                       const std::vector<double>& xs) {
        std::vector<double> ys(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = f(xs[i]);
        return MonotoneTable(xs, ys);
    }

    const std::vector<double>& xs() const { return xs_; }
    const std::vector<double>& ys() const { return ys_; }
    double x_min() const { return xs_.front(); }
    double x_max() const { return xs_.back(); }
    double y_min() const { return ys_.front(); }
    double y_max() const { return ys_.back(); }

    double operator()(double x) const {
        if (x <= xs_.front()) {
            if (xs_.front() <= 0.0) return ys_.front();
            // anchor at origin
            if (x <= 0.0) return 0.0;
            return ys_.front() * (x / xs_.front());
        }
        if (x >= xs_.back()) return ys_.back() + tail_slope() * (x - xs_.back());
        const std::size_t i = segment(x);
        const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + t * (ys_[i + 1] - ys_[i]);
    }

    // Inverse lookup; requires the table to cover y strictly monotonically on
    // the relevant stretch. Above the covered range the tail slope is used.
    double inverse(double y) const {
        if (y <= ys_.front()) {
            if (xs_.front() <= 0.0 || ys_.front() <= 0.0) {
                if (y <= ys_.front() - 1e-300) throw RangeError("monotone inverse: below table range");
                return xs_.front();
            }
            if (y <= 0.0) return 0.0;
            return xs_.front() * (y / ys_.front());
        }
        if (y >= ys_.back()) {
            const double s = tail_slope();
            if (s <= 0.0) {
                if (y > ys_.back()) throw RangeError("monotone inverse: above table range (flat tail)");
                return xs_.back();
            }
            return xs_.back() + (y - ys_.back()) / s;
        }
        // binary search on ys
        std::size_t lo = 0, hi = ys_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (ys_[mid] <= y)
                lo = mid;
            else
                hi = mid;
        }
        const double dy = ys_[hi] - ys_[lo];
        if (dy <= 0.0) return xs_[lo];
        return xs_[lo] + (xs_[hi] - xs_[lo]) * (y - ys_[lo]) / dy;
    }

    bool strictly_increasing() const {
        for (std::size_t i = 1; i < ys_.size(); ++i)
            if (!(ys_[i] > ys_[i - 1])) return false;
        return true;
    }

  private:
    double tail_slope() const {
        const std::size_t n = xs_.size();
        return (ys_[n - 1] - ys_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
    }

    std::size_t segment(double x) const {
        std::size_t lo = 0, hi = xs_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (xs_[mid] <= x)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    std::vector<double> xs_;
    std::vector<double> ys_;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = hi;
    return v;
}

inline std::vector<double> geomspace(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo)) throw PreconditionError("geomspace: need 0 < lo < hi");
    std::vector<double> v(n);
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo * std::exp(ratio * static_cast<double>(i) / static_cast<double>(n - 1));
    v.back() = hi;
    return v;
}

}  // namespace mrf

#endif
