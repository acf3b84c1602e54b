#ifndef MRF_GRID_HPP
#define MRF_GRID_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include "mrf/common.hpp"

namespace mrf {

// Axis-aligned box [lo_k, hi_k] per axis.
struct Box {
    Vec lo;
    Vec hi;

    std::size_t dim() const { return lo.size(); }

    bool contains(const Vec& x, double tol = 0.0) const {
        for (std::size_t k = 0; k < lo.size(); ++k)
            if (x[k] < lo[k] - tol || x[k] > hi[k] + tol) return false;
        return true;
    }

    Vec extent() const {
        Vec e(lo.size());
        for (std::size_t k = 0; k < lo.size(); ++k) e[k] = hi[k] - lo[k];
        return e;
    }
};

// Scalar field on a rectangular grid with multilinear interpolation.
// Node k along axis a sits at lo[a] + k*h[a], h[a] = (hi[a]-lo[a])/(res[a]-1).
// Values are stored row-major with the last axis fastest. target_mask marks
// nodes inside the target set; masked node values are part of the field like
// any other (solvers pin them to zero).
class GridField {
  public:
    GridField() = default;

    GridField(Box box, std::vector<std::size_t> resolution)
        : box_(std::move(box)), res_(std::move(resolution)) {
        if (box_.dim() != res_.size()) throw PreconditionError("grid: box/resolution dimension mismatch");
        std::size_t n = 1;
        spacing_.resize(res_.size());
        stride_.assign(res_.size(), 1);
        for (std::size_t k = 0; k < res_.size(); ++k) {
            if (res_[k] < 2) throw PreconditionError("grid: need at least 2 nodes per axis");
            if (!(box_.hi[k] > box_.lo[k])) throw PreconditionError("grid: empty box axis");
            spacing_[k] = (box_.hi[k] - box_.lo[k]) / static_cast<double>(res_[k] - 1);
            n *= res_[k];
        }
        for (std::size_t k = res_.size(); k-- > 1;) stride_[k - 1] = stride_[k] * res_[k];
        values_.assign(n, 0.0);
        mask_.assign(n, 0);
    }

    const Box& box() const { return box_; }
    const std::vector<std::size_t>& resolution() const { return res_; }
    const Vec& spacing() const { return spacing_; }
    std::size_t dim() const { return res_.size(); }
    std::size_t node_count() const { return values_.size(); }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<std::uint8_t>& mask() { return mask_; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }

    double& value_at(std::size_t flat) { return values_[flat]; }
    double value_at(std::size_t flat) const { return values_[flat]; }
    bool masked(std::size_t flat) const { return mask_[flat] != 0; }

    std::size_t flat_index(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t k = 0; k < idx.size(); ++k) f += idx[k] * stride_[k];
        return f;
    }

    std::vector<std::size_t> multi_index(std::size_t flat) const {
        std::vector<std::size_t> idx(res_.size());
        for (std::size_t k = 0; k < res_.size(); ++k) {
            idx[k] = flat / stride_[k];
            flat %= stride_[k];
        }
        return idx;
    }

    Vec node_coords(std::size_t flat) const {
        const auto idx = multi_index(flat);
        Vec x(res_.size());
        for (std::size_t k = 0; k < res_.size(); ++k)
            x[k] = box_.lo[k] + static_cast<double>(idx[k]) * spacing_[k];
        return x;
    }

    bool on_boundary(std::size_t flat) const {
        const auto idx = multi_index(flat);
        for (std::size_t k = 0; k < res_.size(); ++k)
            if (idx[k] == 0 || idx[k] + 1 == res_[k]) return true;
        return false;
    }

    void fill_from(const std::function<double(const Vec&)>& f) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = f(node_coords(i));
    }

    void mask_from(const std::function<bool(const Vec&)>& inside) {
        for (std::size_t i = 0; i < mask_.size(); ++i) mask_[i] = inside(node_coords(i)) ? 1 : 0;
    }

    // Multilinear interpolation; exact at nodes. Queries get a relative
    // epsilon of slack at the box faces so that round-off on boundary points
    // does not reject them; anything further out throws.
    double interpolate(const Vec& x) const {
        std::size_t base = 0;
        double w[kMaxDim];
        std::size_t cell[kMaxDim];
        locate(x, cell, w);
        for (std::size_t k = 0; k < res_.size(); ++k) base += cell[k] * stride_[k];
        const std::size_t corners = std::size_t{1} << res_.size();
        double acc = 0.0;
        for (std::size_t c = 0; c < corners; ++c) {
            double wt = 1.0;
            std::size_t off = 0;
            for (std::size_t k = 0; k < res_.size(); ++k) {
                if (c & (std::size_t{1} << k)) {
                    wt *= w[k];
                    off += stride_[k];
                } else {
                    wt *= 1.0 - w[k];
                }
            }
            acc += wt * values_[base + off];
        }
        return acc;
    }

    bool inside(const Vec& x) const { return box_.contains(x, boundary_slack()); }

    std::size_t stride(std::size_t k) const { return stride_[k]; }

    // Exposes the enclosing cell and per-axis weights of a query point so
    // solvers can freeze interpolation stencils across sweeps.
    void locate_cell(const Vec& x, std::size_t* cell, double* w) const { locate(x, cell, w); }

  private:
    static constexpr std::size_t kMaxDim = 8;

    double boundary_slack() const {
        double m = 0.0;
        for (std::size_t k = 0; k < res_.size(); ++k)
            m = std::max(m, std::max(std::abs(box_.lo[k]), std::abs(box_.hi[k])));
        return 1e-12 * std::max(1.0, m);
    }

    void locate(const Vec& x, std::size_t* cell, double* w) const {
        if (x.size() != res_.size()) throw PreconditionError("interpolate: dimension mismatch");
        if (res_.size() > kMaxDim) throw PreconditionError("interpolate: dimension too large");
        const double slack = boundary_slack();
        for (std::size_t k = 0; k < res_.size(); ++k) {
            if (x[k] < box_.lo[k] - slack || x[k] > box_.hi[k] + slack)
                throw OutOfDomainError("interpolate: query outside field box");
            double s = (x[k] - box_.lo[k]) / spacing_[k];
            double c = std::floor(s);
            if (c < 0) c = 0;
            if (c > static_cast<double>(res_[k] - 2)) c = static_cast<double>(res_[k] - 2);
            cell[k] = static_cast<std::size_t>(c);
            double frac = s - c;
            if (frac < 0.0) frac = 0.0;
            if (frac > 1.0) frac = 1.0;
            w[k] = frac;
        }
    }

    Box box_;
    std::vector<std::size_t> res_;
    Vec spacing_;
    std::vector<std::size_t> stride_;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

}  // namespace mrf

#endif
