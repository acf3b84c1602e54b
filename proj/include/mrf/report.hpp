#ifndef MRF_REPORT_HPP
#define MRF_REPORT_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mrf/brackets.hpp"
#include "mrf/common.hpp"
#include "mrf/grid.hpp"
#include "mrf/hjb.hpp"
#include "mrf/kl.hpp"
#include "mrf/monotone.hpp"
#include "mrf/synthesize.hpp"
#include "mrf/trajectory.hpp"
#include "mrf/verify.hpp"

namespace mrf {

// All artifact files are LF-terminated UTF-8 with '.' decimal points and
// doubles printed via %.17g, so identical runs produce identical bytes.

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open for writing: " + path);
    out << content;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- field serialization: flat CSV plus a text header ----

inline std::string field_csv(const GridField& f) {
    std::ostringstream o;
    for (std::size_t k = 0; k < f.dim(); ++k) o << "x" << k << ",";
    o << "value,mask\n";
    for (std::size_t i = 0; i < f.node_count(); ++i) {
        const Vec x = f.node_coords(i);
        for (double c : x) o << fmt_g17(c) << ",";
        o << fmt_g17(f.value_at(i)) << "," << (f.masked(i) ? 1 : 0) << "\n";
    }
    return o.str();
}

inline std::string field_meta(const GridField& f, double tau, std::size_t sweeps, bool converged) {
    std::ostringstream o;
    o << "dim = " << f.dim() << "\n";
    for (std::size_t k = 0; k < f.dim(); ++k) {
        o << "lo" << k << " = " << fmt_g17(f.box().lo[k]) << "\n";
        o << "hi" << k << " = " << fmt_g17(f.box().hi[k]) << "\n";
        o << "res" << k << " = " << f.resolution()[k] << "\n";
    }
    o << "tau = " << fmt_g17(tau) << "\n";
    o << "sweeps = " << sweeps << "\n";
    o << "converged = " << (converged ? "true" : "false") << "\n";
    return o.str();
}

// Reads back a field written by field_csv/field_meta (used by the plot
// subcommand and the file candidate kind).
inline GridField read_field_csv(const std::string& csv_path, const std::string& meta_path) {
    const std::string meta = read_text_file(meta_path);
    std::istringstream mi(meta);
    std::string line;
    std::size_t dim = 0;
    Vec lo, hi;
    std::vector<std::size_t> res;
    while (std::getline(mi, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, line.find(' '));
        const std::string val = line.substr(eq + 1);
        if (key == "dim") {
            dim = std::stoul(val);
            lo.resize(dim);
            hi.resize(dim);
            res.resize(dim);
        } else if (key.rfind("res", 0) == 0)
            res[std::stoul(key.substr(3))] = std::stoul(val);
        else if (key.rfind("lo", 0) == 0)
            lo[std::stoul(key.substr(2))] = std::stod(val);
        else if (key.rfind("hi", 0) == 0)
            hi[std::stoul(key.substr(2))] = std::stod(val);
    }
    if (dim == 0) throw Error("field meta: missing dim: " + meta_path);
    GridField f({lo, hi}, res);

    std::istringstream ci(read_text_file(csv_path));
    std::getline(ci, line);  // header
    std::size_t i = 0;
    while (std::getline(ci, line) && i < f.node_count()) {
        std::istringstream row(line);
        std::string cell;
        for (std::size_t k = 0; k < dim; ++k) std::getline(row, cell, ',');
        std::getline(row, cell, ',');
        f.value_at(i) = std::stod(cell);
        std::getline(row, cell, ',');
        f.mask()[i] = static_cast<std::uint8_t>(std::stoi(cell));
        ++i;
    }
    if (i != f.node_count()) throw Error("field csv: row count mismatch: " + csv_path);
    return f;
}

// ---- other CSV artifacts ----

inline std::string table_csv(const MonotoneTable& t, const std::string& xname,
                             const std::string& yname) {
    std::ostringstream o;
    o << xname << "," << yname << "\n";
    for (std::size_t i = 0; i < t.xs().size(); ++i)
        o << fmt_g17(t.xs()[i]) << "," << fmt_g17(t.ys()[i]) << "\n";
    return o.str();
}

inline std::string brackets_csv(const BracketPair& br) {
    std::ostringstream o;
    o << "r,d_minus,d_plus\n";
    const auto& xs = br.d_minus.xs();
    for (std::size_t i = 0; i < xs.size(); ++i)
        o << fmt_g17(xs[i]) << "," << fmt_g17(br.d_minus.ys()[i]) << ","
          << fmt_g17(br.d_plus.ys()[i]) << "\n";
    return o.str();
}

inline std::string trajectory_csv(const Trajectory& traj, const GridField* W,
                                  const KLFunction* beta, double dist_start,
                                  const DistanceFn& dist) {
    std::ostringstream o;
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    const std::size_t m = traj.controls.empty() ? 0 : traj.controls.front().size();
    o << "t";
    for (std::size_t k = 0; k < n; ++k) o << ",x" << k;
    for (std::size_t k = 0; k < m; ++k) o << ",u" << k;
    o << ",cost";
    if (W) o << ",W";
    if (beta) o << ",beta_env";
    o << "\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        o << fmt_g17(traj.times[i]);
        for (double c : traj.states[i]) o << "," << fmt_g17(c);
        for (double c : traj.controls[i]) o << "," << fmt_g17(c);
        o << "," << fmt_g17(traj.accumulated_cost[i]);
        if (W) o << "," << fmt_g17(W->inside(traj.states[i]) ? W->interpolate(traj.states[i]) : kNaN);
        if (beta) o << "," << fmt_g17(beta->value(dist_start, traj.times[i]));
        o << "\n";
    }
    (void)dist;
    return o.str();
}

inline std::string segments_csv(const std::vector<SegmentCertificate>& segs) {
    std::ostringstream o;
    o << "index,t_begin,duration,cost,level_before,level_after,min_level,max_level,"
         "time_bound,cost_bound_rhs,rel1,rel2,rel3\n";
    for (const auto& s : segs) {
        o << s.index << "," << fmt_g17(s.t_begin) << "," << fmt_g17(s.duration) << ","
          << fmt_g17(s.cost) << "," << fmt_g17(s.level_before) << "," << fmt_g17(s.level_after)
          << "," << fmt_g17(s.min_level_seen) << "," << fmt_g17(s.max_level_seen) << ","
          << fmt_g17(s.time_bound) << "," << fmt_g17(s.cost_bound_rhs) << "," << (s.rel1 ? 1 : 0)
          << "," << (s.rel2 ? 1 : 0) << "," << (s.rel3 ? 1 : 0) << "\n";
    }
    return o.str();
}

// ---- residual histogram with fixed bin edges ----

inline const std::vector<double>& residual_bin_edges() {
    static const std::vector<double> edges = {-1e300, -1.0,  -0.3,  -0.1, -0.03, -0.01,
                                              -0.003, -0.001, 0.0,   0.001, 0.01, 0.1,
                                              1.0,    1e300};
    return edges;
}

inline std::string residual_histogram(const std::vector<double>& residuals) {
    const auto& edges = residual_bin_edges();
    std::vector<std::size_t> counts(edges.size() - 1, 0);
    for (double r : residuals) {
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            if (r > edges[b] && r <= edges[b + 1]) {
                ++counts[b];
                break;
            }
        }
    }
    std::ostringstream o;
    o << "residual histogram (bin upper edge : count)\n";
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
        if (counts[b] == 0) continue;
        o << "  <= " << fmt_g6(edges[b + 1]) << " : " << counts[b] << "\n";
    }
    return o.str();
}

// ---- structured text report with fixed section order ----

class Report {
  public:
    void begin_section(const std::string& title) {
        body_ << "== " << title << " ==\n";
    }

    template <typename T>
    Report& line(const T& t) {
        body_ << t << "\n";
        return *this;
    }

    Report& kv(const std::string& key, const std::string& value) {
        body_ << key << ": " << value << "\n";
        return *this;
    }

    Report& kv(const std::string& key, double value) { return kv(key, fmt_g17(value)); }

    Report& verdict(const std::string& what, bool pass) {
        body_ << what << ": " << (pass ? "PASS" : "FAIL") << "\n";
        return *this;
    }

    std::string text() const { return body_.str(); }

  private:
    std::ostringstream body_;
};

}  // namespace mrf

#endif
