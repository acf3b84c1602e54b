#ifndef MRF_CONFIG_HPP
#define MRF_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrf/common.hpp"

namespace mrf {

// INI-style config: [section] headers, key = value lines, '#' comments.
// Sections and keys are validated against the known schema; anything
// unrecognized is a parse error with its line number.
class ConfigText {
  public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };

    static ConfigText parse(const std::string& text) {
        ConfigText cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty()) throw ConfigError("empty section name", line_no);
                cfg.sections_[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line_no);
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("empty key", line_no);
            if (section.empty()) throw ConfigError("key outside any section", line_no);
            auto& sec = cfg.sections_[section];
            if (sec.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
            sec[key] = Entry{value, line_no};
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        k->second.consumed = true;
        return k->second.value;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        k->second.consumed = true;
        try {
            std::size_t pos = 0;
            const double v = std::stod(k->second.value, &pos);
            if (pos != k->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("expected a number for " + section + "." + key + ", got '" +
                                  k->second.value + "'",
                              k->second.line);
        }
    }

    long long get_int(const std::string& section, const std::string& key, long long fallback) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        k->second.consumed = true;
        try {
            std::size_t pos = 0;
            const long long v = std::stoll(k->second.value, &pos);
            if (pos != k->second.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw ConfigError("expected an integer for " + section + "." + key + ", got '" +
                                  k->second.value + "'",
                              k->second.line);
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        const std::string v = get_string(section, key, fallback ? "true" : "false");
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError("expected a boolean for " + section + "." + key + ", got '" + v + "'");
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                    std::vector<double> fallback) const {
        auto s = sections_.find(section);
        if (s == sections_.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        k->second.consumed = true;
        std::vector<double> out;
        std::istringstream in(k->second.value);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("expected comma-separated numbers for " + section + "." + key,
                                  k->second.line);
            }
        }
        if (out.empty())
            throw ConfigError("empty list for " + section + "." + key, k->second.line);
        return out;
    }

    void reject_unknown(const std::set<std::string>& known_sections) const {
        for (const auto& [sec, entries] : sections_) {
            if (!known_sections.count(sec))
                throw ConfigError("unknown section [" + sec + "]",
                                  entries.empty() ? 0 : entries.begin()->second.line);
            for (const auto& [key, e] : entries)
                if (!e.consumed)
                    throw ConfigError("unknown key '" + key + "' in section [" + sec + "]", e.line);
        }
    }

  private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::map<std::string, Entry>> sections_;
};

// Fully resolved run plan; every field has its default filled in and is
// echoed verbatim into the report header.
struct RunPlan {
    // system
    std::string system_name = "int1d_mintime";
    std::size_t control_count = 3;
    double target_radius = 0.1;
    std::vector<double> drift = {0.5, 0.0};

    // grid
    std::vector<double> box_lo = {-2.2};
    std::vector<double> box_hi = {2.2};
    std::vector<long long> resolution = {441};
    double mask_tol = 1e-12;

    // candidate
    std::string candidate_kind = "analytic";  // analytic | solve | file
    std::string candidate_name = "two_dist";  // two_dist | dist
    std::string candidate_path;
    std::string solve_lagrangian = "unit";  // unit | running_cost

    // comparators
    std::string p0_name = "one";
    std::string gamma_name = "rational";
    double gamma_scale = 1.0;
    double v_max = 8.0;
    long long refinement_levels = 6;
    double quadrature_tol = 1e-6;

    // solver
    double tau = 0.0;
    double fixed_point_tol = 1e-9;
    long long max_sweeps = 50000;
    double boundary_value = 1e6;
    std::string decrease_tol = "auto";

    // synthesis
    double dt = 1e-3;
    double halving_tol_rel = 1e-6;
    long long max_levels = 40;
    double target_tol = 1e-3;
    double safety_factor = 5.0;
    double quad_tol = 1e-6;
    long long starts = 8;
    double min_start_distance = 0.15;
    double descent_r_min = 5e-3;

    // converse
    std::string controller = "toward_target";
    long long j_max = 2;
    long long samples_per_strip = 5;
    double strip_safety = 1.5;

    // outputs
    bool plots = true;

    // run
    std::uint64_t seed = 42;
    std::size_t workers = 1;

    static RunPlan from_text(const std::string& text) {
        const auto cfg = ConfigText::parse(text);
        RunPlan p;
        p.system_name = cfg.get_string("system", "name", p.system_name);
        p.control_count =
            static_cast<std::size_t>(cfg.get_int("system", "control_count", (long long)p.control_count));
        p.target_radius = cfg.get_double("system", "target_radius", p.target_radius);
        p.drift = cfg.get_doubles("system", "drift", p.drift);

        p.box_lo = cfg.get_doubles("grid", "lo", p.box_lo);
        p.box_hi = cfg.get_doubles("grid", "hi", p.box_hi);
        {
            std::vector<double> res_def(p.resolution.begin(), p.resolution.end());
            const auto res = cfg.get_doubles("grid", "resolution", res_def);
            p.resolution.assign(res.begin(), res.end());
        }
        p.mask_tol = cfg.get_double("grid", "mask_tol", p.mask_tol);

        p.candidate_kind = cfg.get_string("candidate", "kind", p.candidate_kind);
        p.candidate_name = cfg.get_string("candidate", "name", p.candidate_name);
        p.candidate_path = cfg.get_string("candidate", "path", p.candidate_path);
        p.solve_lagrangian = cfg.get_string("candidate", "lagrangian", p.solve_lagrangian);

        p.p0_name = cfg.get_string("comparators", "p0", p.p0_name);
        p.gamma_name = cfg.get_string("comparators", "gamma", p.gamma_name);
        p.gamma_scale = cfg.get_double("comparators", "gamma_scale", p.gamma_scale);
        p.v_max = cfg.get_double("comparators", "v_max", p.v_max);
        p.refinement_levels = cfg.get_int("comparators", "refinement_levels", p.refinement_levels);
        p.quadrature_tol = cfg.get_double("comparators", "quadrature_tol", p.quadrature_tol);

        p.tau = cfg.get_double("solver", "tau", p.tau);
        p.fixed_point_tol = cfg.get_double("solver", "fixed_point_tol", p.fixed_point_tol);
        p.max_sweeps = cfg.get_int("solver", "max_sweeps", p.max_sweeps);
        p.boundary_value = cfg.get_double("solver", "boundary_value", p.boundary_value);
        p.decrease_tol = cfg.get_string("solver", "decrease_tol", p.decrease_tol);

        p.dt = cfg.get_double("synthesis", "dt", p.dt);
        p.halving_tol_rel = cfg.get_double("synthesis", "halving_tol_rel", p.halving_tol_rel);
        p.max_levels = cfg.get_int("synthesis", "max_levels", p.max_levels);
        p.target_tol = cfg.get_double("synthesis", "target_tol", p.target_tol);
        p.safety_factor = cfg.get_double("synthesis", "safety_factor", p.safety_factor);
        p.quad_tol = cfg.get_double("synthesis", "quad_tol", p.quad_tol);
        p.starts = cfg.get_int("synthesis", "starts", p.starts);
        p.min_start_distance = cfg.get_double("synthesis", "min_start_distance", p.min_start_distance);
        p.descent_r_min = cfg.get_double("synthesis", "descent_r_min", p.descent_r_min);

        p.controller = cfg.get_string("converse", "controller", p.controller);
        p.j_max = cfg.get_int("converse", "j_max", p.j_max);
        p.samples_per_strip = cfg.get_int("converse", "samples_per_strip", p.samples_per_strip);
        p.strip_safety = cfg.get_double("converse", "strip_safety", p.strip_safety);

        p.plots = cfg.get_bool("outputs", "plots", p.plots);

        p.seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", (long long)p.seed));
        p.workers = static_cast<std::size_t>(cfg.get_int("run", "workers", (long long)p.workers));

        cfg.reject_unknown({"system", "grid", "candidate", "comparators", "solver", "synthesis",
                            "converse", "outputs", "run"});
        p.validate();
        return p;
    }

    void validate() const {
        if (system_name != "int1d_mintime" && system_name != "double_integrator_mintime" &&
            system_name != "zermelo" && system_name != "scalar_lq")
            throw ConfigError("unknown system name: " + system_name);
        if (box_lo.size() != box_hi.size() || box_lo.size() != resolution.size())
            throw ConfigError("grid lo/hi/resolution dimension mismatch");
        for (std::size_t k = 0; k < box_lo.size(); ++k) {
            if (!(box_hi[k] > box_lo[k])) throw ConfigError("grid box axis " + std::to_string(k) + " is empty");
            if (resolution[k] < 2) throw ConfigError("grid resolution must be >= 2 per axis");
        }
        if (control_count == 0) throw ConfigError("control_count must be positive");
        if (!(target_radius > 0.0)) throw ConfigError("target_radius must be positive");
        if (!(dt > 0.0)) throw ConfigError("synthesis dt must be positive");
        if (!(fixed_point_tol > 0.0)) throw ConfigError("fixed_point_tol must be positive");
        if (candidate_kind != "analytic" && candidate_kind != "solve" && candidate_kind != "file")
            throw ConfigError("candidate kind must be analytic | solve | file");
        if (candidate_kind == "analytic" && candidate_name != "two_dist" && candidate_name != "dist")
            throw ConfigError("unknown analytic candidate: " + candidate_name);
        if (solve_lagrangian != "unit" && solve_lagrangian != "running_cost")
            throw ConfigError("candidate lagrangian must be unit | running_cost");
        if (refinement_levels < 2) throw ConfigError("refinement_levels must be >= 2");
        if (starts < 1) throw ConfigError("synthesis starts must be >= 1");
        if (workers < 1) throw ConfigError("run workers must be >= 1");
    }

    std::string echo() const {
        std::ostringstream o;
        auto num = [](double v) { return fmt_g17(v); };
        auto list = [&num](const std::vector<double>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
            return s;
        };
        o << "[system]\n"
          << "name = " << system_name << "\n"
          << "control_count = " << control_count << "\n"
          << "target_radius = " << num(target_radius) << "\n"
          << "drift = " << list(drift) << "\n"
          << "[grid]\n"
          << "lo = " << list(box_lo) << "\n"
          << "hi = " << list(box_hi) << "\n"
          << "resolution = ";
        for (std::size_t i = 0; i < resolution.size(); ++i)
            o << (i ? ", " : "") << resolution[i];
        o << "\n"
          << "mask_tol = " << num(mask_tol) << "\n"
          << "[candidate]\n"
          << "kind = " << candidate_kind << "\n"
          << "name = " << candidate_name << "\n"
          << "path = " << candidate_path << "\n"
          << "lagrangian = " << solve_lagrangian << "\n"
          << "[comparators]\n"
          << "p0 = " << p0_name << "\n"
          << "gamma = " << gamma_name << "\n"
          << "gamma_scale = " << num(gamma_scale) << "\n"
          << "v_max = " << num(v_max) << "\n"
          << "refinement_levels = " << refinement_levels << "\n"
          << "quadrature_tol = " << num(quadrature_tol) << "\n"
          << "[solver]\n"
          << "tau = " << num(tau) << "\n"
          << "fixed_point_tol = " << num(fixed_point_tol) << "\n"
          << "max_sweeps = " << max_sweeps << "\n"
          << "boundary_value = " << num(boundary_value) << "\n"
          << "decrease_tol = " << decrease_tol << "\n"
          << "[synthesis]\n"
          << "dt = " << num(dt) << "\n"
          << "halving_tol_rel = " << num(halving_tol_rel) << "\n"
          << "max_levels = " << max_levels << "\n"
          << "target_tol = " << num(target_tol) << "\n"
          << "safety_factor = " << num(safety_factor) << "\n"
          << "quad_tol = " << num(quad_tol) << "\n"
          << "starts = " << starts << "\n"
          << "min_start_distance = " << num(min_start_distance) << "\n"
          << "descent_r_min = " << num(descent_r_min) << "\n"
          << "[converse]\n"
          << "controller = " << controller << "\n"
          << "j_max = " << j_max << "\n"
          << "samples_per_strip = " << samples_per_strip << "\n"
          << "strip_safety = " << num(strip_safety) << "\n"
          << "[outputs]\n"
          << "plots = " << (plots ? "true" : "false") << "\n"
          << "[run]\n"
          << "seed = " << seed << "\n"
          << "workers = " << workers << "\n";
        return o.str();
    }
};

}  // namespace mrf

#endif
