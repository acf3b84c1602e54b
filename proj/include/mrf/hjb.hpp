#ifndef MRF_HJB_HPP
#define MRF_HJB_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "mrf/common.hpp"
#include "mrf/grid.hpp"
#include "mrf/system.hpp"

namespace mrf {

using Lagrangian = std::function<double(const Vec&, const Vec&)>;

struct SolverParams {
    double tau = 0.0;              // pseudo-time step; 0 = use min grid spacing
    double fixed_point_tol = 1e-9; // sup-norm stopping threshold
    std::size_t max_sweeps = 50000;
    double boundary_value = 1e6;   // assigned to stencil points outside the box
    std::size_t workers = 1;

    void validate() const {
        if (tau < 0.0) throw PreconditionError("solver: tau must be positive");
        if (!(fixed_point_tol > 0.0)) throw PreconditionError("solver: fixed_point_tol must be positive");
        if (max_sweeps == 0) throw PreconditionError("solver: max_sweeps must be positive");
    }
};

struct SolveResult {
    GridField field;
    bool converged = false;
    std::size_t sweeps = 0;
    double final_delta = 0.0;
    double tau = 0.0;
};

// Grid shape for a system: mask marks nodes with target_distance <= mask_tol.
// The default tolerance absorbs round-off in node coordinates so nodes sitting
// exactly on the target boundary land inside the mask.
inline GridField make_grid(const ControlSystem& sys, const Box& box,
                           const std::vector<std::size_t>& resolution, double mask_tol = 1e-12) {
    GridField g(box, resolution);
    g.mask_from([&sys, mask_tol](const Vec& x) { return sys.target_distance(x) <= mask_tol; });
    return g;
}

namespace detail {

// Frozen semi-Lagrangian stencil: for every (node, control) the displaced
// point x + tau f(x,u), its interpolation corners/weights, and the one-step
// cost tau * L(x,u). Interpolation cells do not move between sweeps, so the
// sweep inner loop reduces to weighted sums over the previous buffer.
struct FrozenStencil {
    std::size_t n_controls = 0;
    std::size_t n_corners = 0;
    std::vector<double> step_cost;        // (node*nc + c)
    std::vector<std::uint8_t> in_box;     // (node*nc + c)
    std::vector<std::uint32_t> corners;   // (node*nc + c)*n_corners + j
    std::vector<double> weights;          // same layout as corners
    std::vector<std::uint8_t> update;     // node: 1 = recompute (non-masked)

    static FrozenStencil build(const GridField& grid, const ControlSystem& sys,
                               const Lagrangian& lagrangian, double tau) {
        FrozenStencil st;
        const std::size_t n = grid.node_count();
        const std::size_t dim = grid.dim();
        const std::size_t nc = sys.control_samples.size();
        st.n_controls = nc;
        st.n_corners = std::size_t{1} << dim;
        st.step_cost.assign(n * nc, 0.0);
        st.in_box.assign(n * nc, 0);
        st.corners.assign(n * nc * st.n_corners, 0);
        st.weights.assign(n * nc * st.n_corners, 0.0);
        st.update.assign(n, 0);

        std::size_t cell[8];
        double w[8];
        Vec y(dim);
        for (std::size_t i = 0; i < n; ++i) {
            if (grid.masked(i)) continue;
            st.update[i] = 1;
            const Vec x = grid.node_coords(i);
            const bool interior = !grid.on_boundary(i);
            bool any_inside = false;
            for (std::size_t c = 0; c < nc; ++c) {
                const Vec& u = sys.control_samples[c];
                const Vec fx = sys.dynamics(x, u);
                for (std::size_t k = 0; k < dim; ++k) y[k] = x[k] + tau * fx[k];
                const std::size_t e = i * nc + c;
                st.step_cost[e] = tau * lagrangian(x, u);
                if (!grid.inside(y)) continue;
                st.in_box[e] = 1;
                any_inside = true;
                grid.locate_cell(y, cell, w);
                std::size_t base = 0;
                for (std::size_t k = 0; k < dim; ++k) base += cell[k] * grid.stride(k);
                for (std::size_t j = 0; j < st.n_corners; ++j) {
                    double wt = 1.0;
                    std::size_t off = 0;
                    for (std::size_t k = 0; k < dim; ++k) {
                        if (j & (std::size_t{1} << k)) {
                            wt *= w[k];
                            off += grid.stride(k);
                        } else {
                            wt *= 1.0 - w[k];
                        }
                    }
                    st.corners[e * st.n_corners + j] = static_cast<std::uint32_t>(base + off);
                    st.weights[e * st.n_corners + j] = wt;
                }
            }
            if (interior && !any_inside)
                throw DegenerateStencilError(
                    "solver: tau so large that every control exits the box from an interior node");
        }
        return st;
    }
};

inline void for_ranges(std::size_t n, std::size_t workers, const std::function<void(std::size_t, std::size_t)>& body) {
    if (workers <= 1 || n < 2 * workers) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Value iteration for the exit-time problem:
//   V(x) <- min_u { tau L(x,u) + I[V](x + tau f(x,u)) },  V = 0 on masked nodes.
// Stencil points outside the box read boundary_value, which makes the box
// boundary repelling. Sweeps are Jacobi style (fresh write buffer), so the
// result is independent of node order and worker count. Starting from
// boundary_value everywhere off-target the iterates decrease monotonically.
inline SolveResult solve_value_function(const ControlSystem& sys, const GridField& grid_shape,
                                        const Lagrangian& lagrangian, const SolverParams& params) {
    params.validate();
    sys.validate();
    double tau = params.tau;
    if (tau == 0.0) {
        tau = *std::min_element(grid_shape.spacing().begin(), grid_shape.spacing().end());
    }

    const auto stencil = detail::FrozenStencil::build(grid_shape, sys, lagrangian, tau);
    const std::size_t n = grid_shape.node_count();
    const std::size_t nc = stencil.n_controls;
    const std::size_t ncor = stencil.n_corners;

    SolveResult out;
    out.tau = tau;
    out.field = grid_shape;
    auto& cur = out.field.values();
    for (std::size_t i = 0; i < n; ++i) cur[i] = grid_shape.masked(i) ? 0.0 : params.boundary_value;
    std::vector<double> next(cur);

    const std::size_t workers = std::max<std::size_t>(params.workers, 1);
    std::vector<double> worker_delta(workers, 0.0);

    for (std::size_t sweep = 0; sweep < params.max_sweeps; ++sweep) {
        std::fill(worker_delta.begin(), worker_delta.end(), 0.0);
        const std::size_t chunk = (n + workers - 1) / workers;
        detail::for_ranges(n, workers, [&](std::size_t lo, std::size_t hi) {
            double local = 0.0;
            for (std::size_t i = lo; i < hi; ++i) {
                if (!stencil.update[i]) {
                    next[i] = cur[i];
                    continue;
                }
                double best = kInf;
                for (std::size_t c = 0; c < nc; ++c) {
                    const std::size_t e = i * nc + c;
                    double v = stencil.step_cost[e];
                    if (stencil.in_box[e]) {
                        double acc = 0.0;
                        const std::size_t b = e * ncor;
                        for (std::size_t j = 0; j < ncor; ++j)
                            acc += stencil.weights[b + j] * cur[stencil.corners[b + j]];
                        v += acc;
                    } else {
                        v += params.boundary_value;
                    }
                    if (v < best) best = v;
                }
                next[i] = best;
                local = std::max(local, std::abs(best - cur[i]));
            }
            worker_delta[lo / std::max<std::size_t>(chunk, 1)] = local;
        });
        double delta = 0.0;
        for (double d : worker_delta) delta = std::max(delta, d);
        cur.swap(next);
        out.sweeps = sweep + 1;
        out.final_delta = delta;
        if (delta < params.fixed_point_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

inline SolveResult solve_min_time(const ControlSystem& sys, const GridField& grid_shape,
                                  const SolverParams& params) {
    return solve_value_function(
        sys, grid_shape, [](const Vec&, const Vec&) { return 1.0; }, params);
}

// One-step scheme residual at every node:
//   R(x) = min_u { [I[V](x + tau f(x,u)) - V(x)]/tau + cost(x,u) }
// over controls whose stencil stays in the box. Nodes that are masked, on the
// box boundary, or without any in-box control carry NaN and evaluated = 0;
// they are counted, never silently dropped.
struct ResidualField {
    GridField values;
    std::vector<std::uint8_t> evaluated;
    double worst = -kInf;
    std::size_t worst_node = 0;
    std::size_t evaluated_count = 0;
    std::size_t skipped_count = 0;
};

inline ResidualField one_step_residual(const GridField& V, const ControlSystem& sys,
                                       const Lagrangian& cost, double tau) {
    if (!(tau > 0.0)) throw PreconditionError("residual: tau must be positive");
    ResidualField out;
    out.values = V;
    const std::size_t n = V.node_count();
    out.evaluated.assign(n, 0);
    auto& rv = out.values.values();

    Vec y(V.dim());
    for (std::size_t i = 0; i < n; ++i) {
        rv[i] = kNaN;
        if (V.masked(i) || V.on_boundary(i)) {
            ++out.skipped_count;
            continue;
        }
        const Vec x = V.node_coords(i);
        const double vx = V.value_at(i);
        double best = kInf;
        bool any = false;
        for (const Vec& u : sys.control_samples) {
            const Vec fx = sys.dynamics(x, u);
            for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + tau * fx[k];
            if (!V.inside(y)) continue;
            any = true;
            const double r = (V.interpolate(y) - vx) / tau + cost(x, u);
            best = std::min(best, r);
        }
        if (!any) {
            ++out.skipped_count;
            continue;
        }
        rv[i] = best;
        out.evaluated[i] = 1;
        ++out.evaluated_count;
        if (best > out.worst) {
            out.worst = best;
            out.worst_node = i;
        }
    }
    return out;
}

inline ResidualField supersolution_residual(const GridField& V, const ControlSystem& sys,
                                            const Lagrangian& lagrangian, double tau) {
    return one_step_residual(V, sys, lagrangian, tau);
}

}  // namespace mrf

#endif
