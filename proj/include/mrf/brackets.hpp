#ifndef MRF_BRACKETS_HPP
#define MRF_BRACKETS_HPP

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "mrf/common.hpp"
#include "mrf/grid.hpp"
#include "mrf/monotone.hpp"

namespace mrf {

using DistanceFn = std::function<double(const Vec&)>;

// Monotone tables relating the level sets of a field W to the target
// distance: d_plus(r) bounds W from above on {d <= r}, d_minus(r) from below
// on {d >= r}. Between rows d_minus interpolates below its exact step value
// and d_plus above it, so both stay conservative; at node distances the rows
// are exact and the sandwich d_minus(d(x)) <= W(x) <= d_plus(d(x)) holds by
// construction.
struct BracketPair {
    MonotoneTable d_minus;
    MonotoneTable d_plus;
    bool ladder_coarse_warning = false;

    double gap_at(double r) const { return d_plus(r) - d_minus(r); }
};

// Strictifying bumps: d_plus rows get +k*eps (upward), d_minus rows get
// -(K-1-k)*eps (downward), which keeps the sandwich one-sided. eps shrinks if
// the first d_minus row would otherwise go nonpositive.
inline BracketPair compute_brackets(const GridField& W, const DistanceFn& dist,
                                    const std::vector<double>& ladder = {}) {
    const std::size_t n = W.node_count();
    std::vector<std::pair<double, double>> dw;
    dw.reserve(n);
    for (std::size_t i = 0; i < n; ++i) dw.emplace_back(dist(W.node_coords(i)), W.value_at(i));
    std::sort(dw.begin(), dw.end());

    std::vector<double> rows;
    bool coarse = false;
    if (ladder.empty()) {
        for (const auto& [d, w] : dw)
            if (d > 0.0 && (rows.empty() || d > rows.back())) rows.push_back(d);
    } else {
        rows = ladder;
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        std::size_t distinct = 0;
        double last = -1.0;
        for (const auto& [d, w] : dw)
            if (d > 0.0 && d > last) {
                ++distinct;
                last = d;
            }
        coarse = rows.size() < distinct;
    }
    if (rows.size() < 2) throw PreconditionError("brackets: need at least two positive distance rows");

    // d_plus: prefix max of W over d <= r; d_minus: suffix min over d >= r
    std::vector<double> dplus(rows.size()), dminus(rows.size());
    {
        std::size_t j = 0;
        double run = -kInf;
        for (std::size_t k = 0; k < rows.size(); ++k) {
            while (j < dw.size() && dw[j].first <= rows[k] + 0.0) {
                run = std::max(run, dw[j].second);
                ++j;
            }
            dplus[k] = run;
        }
    }
    {
        std::size_t j = dw.size();
        double run = kInf;
        for (std::size_t k = rows.size(); k-- > 0;) {
            while (j > 0 && dw[j - 1].first >= rows[k]) {
                run = std::min(run, dw[j - 1].second);
                --j;
            }
            dminus[k] = run;
        }
    }

    const std::size_t K = rows.size();
    double eps = 1e-12;
    if (dminus.front() - static_cast<double>(K) * eps <= 0.0)
        eps = std::max(dminus.front(), 0.0) / (2.0 * static_cast<double>(K) + 1.0);
    for (std::size_t k = 0; k < K; ++k) {
        dplus[k] += static_cast<double>(k) * eps;
        dminus[k] -= static_cast<double>(K - 1 - k) * eps;
    }
    // monotone repair in case of exact ties surviving the bumps
    for (std::size_t k = 1; k < K; ++k) {
        if (dplus[k] <= dplus[k - 1]) dplus[k] = std::nextafter(dplus[k - 1], kInf);
        if (dminus[k] <= dminus[k - 1]) dminus[k] = std::nextafter(dminus[k - 1], kInf);
    }

    BracketPair out{MonotoneTable(rows, dminus), MonotoneTable(rows, dplus), coarse};
    return out;
}

struct SandwichCheck {
    double worst_slack = kInf;  // min over nodes of min(W - d_minus(d), d_plus(d) - W)
    std::size_t violations = 0; // nodes with slack < -1e-12
    std::size_t checked = 0;
};

inline SandwichCheck check_sandwich(const GridField& W, const DistanceFn& dist,
                                    const BracketPair& br, double slack_floor = -1e-12) {
    SandwichCheck out;
    for (std::size_t i = 0; i < W.node_count(); ++i) {
        const double d = dist(W.node_coords(i));
        if (d <= 0.0) continue;
        const double w = W.value_at(i);
        const double s = std::min(w - br.d_minus(d), br.d_plus(d) - w);
        ++out.checked;
        out.worst_slack = std::min(out.worst_slack, s);
        if (s < slack_floor) ++out.violations;
    }
    return out;
}

}  // namespace mrf

#endif
