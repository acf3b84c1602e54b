#ifndef MRF_PIPELINE_HPP
#define MRF_PIPELINE_HPP

#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrf/brackets.hpp"
#include "mrf/common.hpp"
#include "mrf/comparators.hpp"
#include "mrf/config.hpp"
#include "mrf/converse.hpp"
#include "mrf/grid.hpp"
#include "mrf/hjb.hpp"
#include "mrf/kl.hpp"
#include "mrf/plot.hpp"
#include "mrf/report.hpp"
#include "mrf/rng.hpp"
#include "mrf/synthesize.hpp"
#include "mrf/system.hpp"
#include "mrf/trajectory.hpp"
#include "mrf/verify.hpp"

namespace mrf {

enum class Stage { solve, verify, synthesize, converse };

// Verification and synthesis evidence for one run. PASS requires every
// requested check to hold: no decrease violations, structural checks green,
// finite P table, all segment relations, cost bounds, and super-optimality.
struct MrfCertificate {
    bool has_solve = false;
    bool solve_converged = false;
    std::size_t solve_sweeps = 0;
    double solve_delta = 0.0;
    double solve_tau = 0.0;

    bool has_verify = false;
    StructureReport structure;
    DecreaseReport decrease;
    SandwichCheck sandwich;
    IcReport ic;
    bool has_petrov = false;
    std::vector<std::pair<double, double>> petrov_rows;  // (d(z), bound)
    std::vector<double> petrov_solver_values;            // paired min-time values

    bool has_synthesis = false;
    std::vector<SynthesisResult> synthesis;
    std::vector<SuperoptReport> superopt;
    std::vector<bool> superopt_ok;
    bool has_descent = false;
    double descent_gap = 1.0;
    std::string kl_axioms_issue;

    bool has_converse = false;
    bool converse_pass = false;

    bool pass() const {
        if (has_solve && !solve_converged) return false;
        if (has_verify) {
            if (!structure.pass()) return false;
            if (!decrease.pass || decrease.violations != 0) return false;
            if (sandwich.violations != 0) return false;
            if (!ic.pass) return false;
        }
        if (has_synthesis) {
            for (const auto& s : synthesis) {
                if (s.status != SynthesisStatus::reached_target) return false;
                if (!s.cost_within_bound || !s.all_segment_checks) return false;
            }
            for (bool ok : superopt_ok)
                if (!ok) return false;
            if (has_descent && (descent_gap > 0.0 || !kl_axioms_issue.empty())) return false;
        }
        if (has_converse && !converse_pass) return false;
        return true;
    }
};

struct PipelineOutcome {
    RunPlan plan;
    MrfCertificate cert;
    std::string report_text;
    std::vector<std::string> artifacts;  // file names written under out_dir
    bool all_pass = false;
};

namespace detail {

inline CatalogParams catalog_params(const RunPlan& plan) {
    CatalogParams cp;
    cp.control_count = plan.control_count;
    cp.target_radius = plan.target_radius;
    cp.drift = plan.drift;
    return cp;
}

inline Box plan_box(const RunPlan& plan) { return Box{plan.box_lo, plan.box_hi}; }

inline std::vector<std::size_t> plan_resolution(const RunPlan& plan) {
    return std::vector<std::size_t>(plan.resolution.begin(), plan.resolution.end());
}

inline SolverParams solver_params(const RunPlan& plan) {
    SolverParams sp;
    sp.tau = plan.tau;
    sp.fixed_point_tol = plan.fixed_point_tol;
    sp.max_sweeps = static_cast<std::size_t>(plan.max_sweeps);
    sp.boundary_value = plan.boundary_value;
    sp.workers = plan.workers;
    return sp;
}

inline SynthesisParams synthesis_params(const RunPlan& plan) {
    SynthesisParams sp;
    sp.dt = plan.dt;
    sp.tau = plan.tau;
    sp.halving_tol_rel = plan.halving_tol_rel;
    sp.max_levels = static_cast<std::size_t>(plan.max_levels);
    sp.target_tol = plan.target_tol;
    sp.safety_factor = plan.safety_factor;
    sp.quad_tol = plan.quad_tol;
    return sp;
}

inline bool unit_cost(const ControlSystem& sys) {
    const Vec probe(sys.state_dim, 0.37);
    for (const Vec& u : sys.control_samples)
        if (sys.running_cost(probe, u) != 1.0) return false;
    return true;
}

inline std::vector<Vec> sample_starts(const RunPlan& plan, const ControlSystem& sys,
                                      const GridField& W) {
    std::vector<Vec> starts;
    const Box& box = W.box();
    const std::size_t n = static_cast<std::size_t>(plan.starts);
    for (std::size_t k = 0; k < n; ++k) {
        Rng rng(Rng::derive(plan.seed, "start", k));
        Vec z(sys.state_dim);
        bool ok = false;
        for (int attempt = 0; attempt < 100000; ++attempt) {
            for (std::size_t a = 0; a < sys.state_dim; ++a) {
                const double margin = 0.05 * (box.hi[a] - box.lo[a]);
                z[a] = rng.uniform(box.lo[a] + margin, box.hi[a] - margin);
            }
            if (sys.target_distance(z) >= plan.min_start_distance && W.interpolate(z) > 0.0) {
                ok = true;
                break;
            }
        }
        if (!ok) throw GeometryError("could not sample a start point off the target");
        starts.push_back(z);
    }
    return starts;
}

// analytic switching curve x = -v|v|/2 of the double integrator, for overlays
inline std::vector<std::pair<double, double>> di_switching_curve(double v_lo, double v_hi,
                                                                 std::size_t n = 201) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = v_lo + (v_hi - v_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        pts.emplace_back(-0.5 * v * std::abs(v), v);
    }
    return pts;
}

}  // namespace detail

// Built-in feedback controllers usable as GAC witnesses in the converse stage.
inline FeedbackController make_controller(const std::string& name, const ControlSystem& sys,
                                          double lookahead = 0.05) {
    if (name == "toward_target") {
        ControlSystem s = sys;
        return [s, lookahead](const Vec& x) {
            double best = kInf;
            const Vec* pick = &s.control_samples.front();
            for (const Vec& u : s.control_samples) {
                const Vec fx = s.dynamics(x, u);
                Vec y(x.size());
                for (std::size_t k = 0; k < x.size(); ++k) y[k] = x[k] + lookahead * fx[k];
                const double d = s.target_distance(y);
                if (d < best) {
                    best = d;
                    pick = &u;
                }
            }
            return *pick;
        };
    }
    throw ConfigError("unknown controller: " + name);
}

// ---- converse construction: GAC witness -> candidate MRF ----

struct ConverseOutcome {
    BilateralSequence seq;
    UniformTimes times;
    KLFunction beta_bar;
    Ell1 ell1;
    EllSequence ells;
    PhiPsi phi_psi;
    SolveResult value;      // V solved with lagrangian ell(d) + l
    BracketPair v_brackets;
    Comparator gamma_v;     // ell o d_plus^{-1}
    StructureReport v_structure;
    DecreaseReport v_decrease;
    bool pass = false;
    int i_lo = 0, i_hi = 0;
};

// Runs the constructive route from a GAC witness (controller + exponential
// envelope + cost bound 2d) to a solver-produced candidate MRF, then verifies
// the decrease condition with gamma = ell o d_{V+}^{-1} at solver tolerance.
// Strips beyond the box reuse the top strip's crossing time; the descent-rate
// staircase clamps its level once the estimated strips run out, which keeps
// the majorant conservative.
inline ConverseOutcome run_converse_stage(const RunPlan& plan, const ControlSystem& sys) {
    ConverseOutcome out;
    const Box box = detail::plan_box(plan);
    const auto grid = make_grid(sys, box, detail::plan_resolution(plan), plan.mask_tol);

    // GAC witness data: cost bound W = 2d with its brackets, envelope 2r e^{-t}
    auto Wgac = grid;
    Wgac.fill_from([&](const Vec& x) { return 2.0 * sys.target_distance(x); });
    const auto gac_brackets = compute_brackets(Wgac, sys.target_distance);
    const auto beta = KLFunction::from_function(
        [](double r, double t) { return 2.0 * r * std::exp(-t); }, linspace(0.0, 8.0, 33),
        linspace(0.0, 24.0, 481), 1.0);

    double d_max = 0.0;
    for (std::size_t i = 0; i < grid.node_count(); ++i)
        d_max = std::max(d_max, sys.target_distance(grid.node_coords(i)));

    out.seq = build_bilateral_sequence(beta, gac_brackets, -8, 14);
    out.i_lo = out.seq.strip_index(d_max * (1.0 - 1e-9));
    out.i_hi = out.i_lo + 7;

    const auto controller = make_controller(plan.controller, sys);
    UniformTimeOptions uto;
    uto.samples_per_strip = static_cast<std::size_t>(plan.samples_per_strip);
    uto.safety_factor = plan.strip_safety;
    uto.dt = plan.dt;
    uto.seed = plan.seed;
    out.times = estimate_uniform_times(sys, controller, out.seq, box, out.i_lo, out.i_hi, uto);

    // uniform time with strips beyond the box reusing the top strip estimate
    const auto seq = out.seq;
    const auto ut = out.times;
    const int i_lo = out.i_lo, i_hi = out.i_hi;
    auto T_at = [ut, i_lo, i_hi](int i) {
        return ut.at(std::min(std::max(i, i_lo), i_hi));
    };
    auto time_of = [seq, T_at](double R) {
        int i;
        if (R <= seq.at(seq.i_max))
            i = seq.i_max;
        else if (R > seq.at(seq.i_min + 1))
            i = seq.i_min + 1;
        else
            i = seq.strip_index(R);
        const int N = std::max(-1, 1 - i);
        double acc = 0.0;
        for (int j = 0; j <= N; ++j) acc += T_at(i + j);
        return acc;
    };

    // descent-rate staircase of the strip construction: level r_{i+N-2} on
    // [Tbar_{i,N-1}, Tbar_{i,N}); levels clamp when strip times run out
    auto b31 = [seq, T_at, i_hi](double R, double t) -> double {
        if (!(R > 0.0)) return 0.0;
        int i;
        if (R <= seq.at(seq.i_max))
            i = seq.i_max;
        else if (R > seq.at(seq.i_min + 1))
            i = seq.i_min + 1;
        else
            i = seq.strip_index(R);
        int N = 0;
        double acc = T_at(i);
        while (acc <= t && i + N + 1 <= i_hi) {
            ++N;
            acc += T_at(i + N);
        }
        const int level_idx = std::max(std::min(i + N - 2, seq.i_max), seq.i_min);
        return seq.at(level_idx);
    };

    double t_top = 0.0;
    for (int j = i_lo; j <= i_hi; ++j) t_top += ut.at(j);
    const double r_kl_lo = out.seq.at(std::min(out.i_hi, out.seq.i_max - 1));
    out.beta_bar = majorize_step_function(b31, geomspace(r_kl_lo, d_max, 49),
                                          linspace(0.0, t_top, 49), std::log(2.0) / (1.0 + 0.1 * t_top), 8);
    const double gap31 = majorization_gap(out.beta_bar, b31, r_kl_lo, d_max, 0.0, t_top, 4000);
    if (gap31 > 0.0)
        throw ConstructionError("converse: beta-bar fails to majorize the strip staircase");

    const std::size_t j_max = static_cast<std::size_t>(plan.j_max);
    const double anchor_top = out.beta_bar.value(static_cast<double>(j_max), 0.0);
    out.ell1 = build_ell1(out.beta_bar, anchor_top + 4.0);
    out.phi_psi = build_phi_psi(out.seq, gac_brackets, out.beta_bar);
    EllOptions eo;
    eo.kappa_opts.seed = plan.seed;
    out.ells = build_ell_sequence(j_max, out.beta_bar, out.phi_psi.phi, time_of, sys, out.ell1, eo);

    // exit-time value function with the augmented lagrangian ell(d) + l
    const auto ell_table = out.ells.final_table;
    const auto dist = sys.target_distance;
    Lagrangian lag = [ell_table, dist, &sys](const Vec& x, const Vec& u) {
        return ell_table(dist(x)) + sys.running_cost(x, u);
    };
    out.value = solve_value_function(sys, grid, lag, detail::solver_params(plan));

    out.v_structure = check_structure(out.value.field, sys.target_distance, plan.target_tol);
    out.v_brackets = compute_brackets(out.value.field, sys.target_distance);
    const auto dplus = out.v_brackets.d_plus;
    out.gamma_v = Comparator::from_closure(
        "ell_o_dplus_inv", [ell_table, dplus](double v) { return ell_table(dplus.inverse(v)); },
        true);
    const double tol = 2.0 * plan.fixed_point_tol / out.value.tau;
    out.v_decrease = check_decrease(out.value.field, sys, {make_p0("one"), out.gamma_v},
                                    out.value.tau, tol);
    out.pass = out.value.converged && out.v_structure.pass() && out.v_decrease.pass;
    return out;
}

// ---- full pipeline ----

inline PipelineOutcome run_pipeline(const RunPlan& plan, const std::set<Stage>& stages,
                                    const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    PipelineOutcome out;
    out.plan = plan;
    Report rep;
    rep.begin_section("plan");
    rep.line(plan.echo());

    auto save = [&](const std::string& name, const std::string& content) {
        write_text_file((fs::path(out_dir) / name).string(), content);
        out.artifacts.push_back(name);
    };

    const auto sys = make_system(plan.system_name, detail::catalog_params(plan));
    sys.validate();
    const Box box = detail::plan_box(plan);
    const auto grid = make_grid(sys, box, detail::plan_resolution(plan), plan.mask_tol);

    ComparatorPair comp{make_p0(plan.p0_name), make_gamma(plan.gamma_name)};
    if (plan.gamma_scale != 1.0) comp.gamma = comp.gamma.scaled(plan.gamma_scale);

    // ---- candidate field ----
    GridField W = grid;
    bool candidate_is_solved = false;
    double cand_tau = 0.0;
    if (stages.count(Stage::converse)) {
        rep.begin_section("converse construction");
        auto cv = run_converse_stage(plan, sys);
        out.cert.has_converse = true;
        out.cert.converse_pass = cv.pass;
        W = cv.value.field;
        comp = ComparatorPair{make_p0("one"), cv.gamma_v};
        candidate_is_solved = true;
        cand_tau = cv.value.tau;
        out.cert.has_solve = true;
        out.cert.solve_converged = cv.value.converged;
        out.cert.solve_sweeps = cv.value.sweeps;
        out.cert.solve_delta = cv.value.final_delta;
        out.cert.solve_tau = cv.value.tau;

        rep.kv("strips estimated", std::to_string(cv.i_lo) + " .. " + std::to_string(cv.i_hi));
        for (int i = cv.i_lo; i <= cv.i_hi; ++i)
            rep.kv("  T[" + std::to_string(i) + "]", cv.times.at(i));
        rep.kv("beta_bar(1,0)", cv.beta_bar.value(1.0, 0.0));
        rep.verdict("value solve converged", cv.value.converged);
        rep.verdict("structure (solved V)", cv.v_structure.pass());
        rep.verdict("decrease (solved V, gamma = ell o d_plus^-1)", cv.v_decrease.pass);
        rep.kv("decrease worst residual", cv.v_decrease.worst_residual);

        // serialize the construction tables
        {
            std::ostringstream o;
            o << "i,r_i\n";
            for (int i = cv.seq.i_min; i <= cv.seq.i_max; ++i)
                o << i << "," << fmt_g17(cv.seq.at(i)) << "\n";
            save("converse_r.csv", o.str());
        }
        {
            std::ostringstream o;
            o << "i,T_i  # safety_factor=" << fmt_g17(plan.strip_safety)
              << " samples_per_strip=" << plan.samples_per_strip << " seed=" << plan.seed << "\n";
            for (int i = cv.i_lo; i <= cv.i_hi; ++i)
                o << i << "," << fmt_g17(cv.times.at(i)) << "\n";
            save("converse_T.csv", o.str());
        }
        save("converse_ell1.csv", table_csv(cv.ell1.table, "R", "ell1"));
        save("converse_ell.csv", table_csv(cv.ells.final_table, "R", "ell"));
        save("converse_phi.csv", table_csv(cv.phi_psi.phi, "R", "phi"));
    } else if (plan.candidate_kind == "analytic") {
        const double scale = plan.candidate_name == "two_dist" ? 2.0 : 1.0;
        W.fill_from([&](const Vec& x) { return scale * sys.target_distance(x); });
    } else if (plan.candidate_kind == "file") {
        W = read_field_csv(plan.candidate_path + ".csv", plan.candidate_path + ".meta");
    }

    if (stages.count(Stage::solve) ||
        (plan.candidate_kind == "solve" && !stages.count(Stage::converse))) {
        rep.begin_section("solve");
        Lagrangian lag;
        if (plan.solve_lagrangian == "unit")
            lag = [](const Vec&, const Vec&) { return 1.0; };
        else
            lag = sys.running_cost;
        const auto sol = solve_value_function(sys, grid, lag, detail::solver_params(plan));
        out.cert.has_solve = true;
        out.cert.solve_converged = sol.converged;
        out.cert.solve_sweeps = sol.sweeps;
        out.cert.solve_delta = sol.final_delta;
        out.cert.solve_tau = sol.tau;
        rep.verdict("converged", sol.converged);
        rep.kv("sweeps", static_cast<double>(sol.sweeps));
        rep.kv("final sup-norm update", sol.final_delta);
        rep.kv("tau", sol.tau);
        save("field.csv", field_csv(sol.field));
        save("field.meta", field_meta(sol.field, sol.tau, sol.sweeps, sol.converged));
        if (plan.candidate_kind == "solve") {
            W = sol.field;
            candidate_is_solved = true;
            cand_tau = sol.tau;
        }
    }

    const double used_tau =
        cand_tau > 0.0 ? cand_tau
                       : (plan.tau > 0.0 ? plan.tau
                                         : *std::min_element(W.spacing().begin(), W.spacing().end()));

    BracketPair brackets;
    bool have_brackets = false;

    if (stages.count(Stage::verify) || stages.count(Stage::synthesize)) {
        rep.begin_section("verify");
        out.cert.has_verify = true;
        out.cert.structure = check_structure(W, sys.target_distance, plan.target_tol);
        rep.verdict("structure: positive definite", out.cert.structure.positive_definite);
        rep.verdict("structure: zero on target band", out.cert.structure.zero_on_target);
        rep.verdict("structure: properness surrogate (levels)", out.cert.structure.proper_levels);
        rep.verdict("structure: properness surrogate (growth)", out.cert.structure.proper_growth);
        rep.kv("growth ratio", out.cert.structure.growth_ratio);

        brackets = compute_brackets(W, sys.target_distance);
        have_brackets = true;
        out.cert.sandwich = check_sandwich(W, sys.target_distance, brackets);
        rep.verdict("bracket sandwich", out.cert.sandwich.violations == 0);
        rep.kv("sandwich worst slack", out.cert.sandwich.worst_slack);
        save("brackets.csv", brackets_csv(brackets));

        double dec_tol = 0.0;
        if (plan.decrease_tol == "auto")
            dec_tol = candidate_is_solved ? 2.0 * plan.fixed_point_tol / used_tau : 0.0;
        else
            dec_tol = std::stod(plan.decrease_tol);
        out.cert.decrease = check_decrease(W, sys, comp, used_tau, dec_tol);
        rep.verdict("decrease condition", out.cert.decrease.pass);
        rep.kv("decrease tol", dec_tol);
        rep.kv("worst residual", out.cert.decrease.worst_residual);
        rep.kv("violations", static_cast<double>(out.cert.decrease.violations));
        rep.kv("evaluated / skipped", std::to_string(out.cert.decrease.evaluated) + " / " +
                                          std::to_string(out.cert.decrease.skipped));
        if (!out.cert.decrease.warning.empty()) rep.kv("warning", out.cert.decrease.warning);
        if (!out.cert.decrease.worst_node.empty()) {
            std::string s;
            for (double c : out.cert.decrease.worst_node) s += (s.empty() ? "" : ", ") + fmt_g17(c);
            rep.kv("worst node", s);
        }
        rep.line(residual_histogram(out.cert.decrease.residuals));

        out.cert.ic = check_integrability(comp.p0, plan.v_max,
                                          static_cast<std::size_t>(plan.refinement_levels),
                                          plan.quadrature_tol);
        rep.verdict("integrability condition", out.cert.ic.pass);
        rep.kv("P(v_max)", out.cert.ic.P_vmax);
        {
            std::ostringstream o;
            o << "level,partial\n";
            for (std::size_t k = 0; k < out.cert.ic.partials.size(); ++k)
                o << k << "," << fmt_g17(out.cert.ic.partials[k]) << "\n";
            save("ic_partials.csv", o.str());
        }
        if (out.cert.ic.pass) save("p_table.csv", table_csv(out.cert.ic.P, "v", "P"));

        if (plan.candidate_kind == "analytic" && plan.candidate_name == "dist" &&
            detail::unit_cost(sys)) {
            out.cert.has_petrov = true;
            rep.begin_section("petrov min-time bound");
            for (double d : {0.2, 0.4, 0.8, 1.2, 1.6}) {
                const auto pb = petrov_min_time_bound(comp, d);
                out.cert.petrov_rows.emplace_back(d, pb.infinite ? kInf : pb.bound);
                rep.kv("bound at d=" + fmt_g6(d), pb.infinite ? kInf : pb.bound);
            }
        }
    }

    if (stages.count(Stage::synthesize)) {
        rep.begin_section("synthesize");
        out.cert.has_synthesis = true;
        if (!out.cert.ic.pass) {
            rep.line("skipped: integrability condition failed, no P table");
        } else {
            const auto starts = detail::sample_starts(plan, sys, W);
            const auto sp = detail::synthesis_params(plan);

            double d_starts_max = 0.0;
            for (const auto& z : starts) d_starts_max = std::max(d_starts_max, sys.target_distance(z));
            if (comp.gamma.strictly_increasing()) {
                const auto dr =
                    build_descent_rate(brackets, comp.gamma, std::max(d_starts_max, 0.5),
                                       plan.descent_r_min);
                out.cert.has_descent = true;
                out.cert.descent_gap = dr.majorization_worst_gap;
                out.cert.kl_axioms_issue = dr.beta.check_axioms();
                rep.verdict("descent rate majorization", dr.majorization_worst_gap <= 0.0);
                rep.verdict("descent rate KL axioms", out.cert.kl_axioms_issue.empty());
                {
                    std::ostringstream o;
                    o << "R,gamma_cap\n";
                    for (std::size_t i = 0; i < dr.level_cap.xs().size(); ++i)
                        o << fmt_g17(dr.level_cap.xs()[i]) << "," << fmt_g17(dr.level_cap.ys()[i])
                          << "\n";
                    save("descent_gamma_cap.csv", o.str());
                }
                {
                    std::ostringstream o;
                    o << "R,r,N,T\n";
                    const std::size_t n = dr.r_knots.size();
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            o << fmt_g17(dr.R_knots[i]) << "," << fmt_g17(dr.r_knots[j]) << ","
                              << dr.N_table[i * n + j] << "," << fmt_g17(dr.T_table[i * n + j])
                              << "\n";
                    save("descent_NT.csv", o.str());
                }

                std::size_t idx = 0;
                std::size_t reached = 0;
                for (const auto& z : starts) {
                    auto res = synthesize_level_halving(sys, W, comp, brackets, out.cert.ic.P, z, sp);
                    const auto so = check_superoptimality(res.trajectory, W, comp, sys);
                    const bool so_ok = so.residual <= res.W_start / 2.0 + 1e-4;
                    if (res.status == SynthesisStatus::reached_target) ++reached;
                    save("traj_" + std::to_string(idx) + ".csv",
                         trajectory_csv(res.trajectory, &W, &dr.beta, res.dist_start,
                                        sys.target_distance));
                    if (idx == 0) save("segments.csv", segments_csv(res.segments));
                    out.cert.synthesis.push_back(std::move(res));
                    out.cert.superopt.push_back(so);
                    out.cert.superopt_ok.push_back(so_ok);
                    ++idx;
                }
                rep.kv("starts", static_cast<double>(starts.size()));
                rep.kv("reached target", static_cast<double>(reached));
                bool all_cost = true, all_rel = true, all_so = true;
                for (std::size_t k = 0; k < out.cert.synthesis.size(); ++k) {
                    all_cost = all_cost && out.cert.synthesis[k].cost_within_bound;
                    all_rel = all_rel && out.cert.synthesis[k].all_segment_checks;
                    all_so = all_so && out.cert.superopt_ok[k];
                }
                rep.verdict("cost within 4P(W/2)", all_cost);
                rep.verdict("segment relations", all_rel);
                rep.verdict("super-optimality", all_so);

                // cost vs bound plot data
                if (plan.plots) {
                    std::vector<std::pair<double, double>> cost_pts, bound_curve;
                    for (const auto& s : out.cert.synthesis)
                        cost_pts.emplace_back(s.W_start, s.trajectory.final_cost());
                    std::vector<double> ws;
                    for (const auto& s : out.cert.synthesis) ws.push_back(s.W_start);
                    std::sort(ws.begin(), ws.end());
                    for (double w : ws) bound_curve.emplace_back(w, cost_bound(w, out.cert.ic.P));
                    save("cost_vs_bound.svg",
                         plot_cost_vs_bound(cost_pts, bound_curve, "accumulated cost vs 4P(W/2)"));
                }
            } else {
                rep.line("descent rate skipped: gamma not strictly increasing");
            }
        }
    }

    // ---- plots ----
    if (plan.plots) {
        if (W.dim() == 1) {
            std::vector<CurveOverlay> overlays;
            for (std::size_t k = 0; k < out.cert.synthesis.size() && k < 3; ++k) {
                CurveOverlay ov;
                const auto& traj = out.cert.synthesis[k].trajectory;
                for (std::size_t i = 0; i < traj.size(); ++i)
                    ov.points.emplace_back(traj.states[i][0], W.interpolate(traj.states[i]));
                for (const auto& seg : out.cert.synthesis[k].segments)
                    ov.markers.emplace_back(seg.end[0], seg.level_after);
                overlays.push_back(std::move(ov));
            }
            save("field.svg", plot_field_1d(W, -plan.target_radius, plan.target_radius,
                                            plan.system_name + ": candidate field", overlays));
        } else if (W.dim() == 2) {
            std::vector<PathOverlay> overlays;
            if (plan.system_name == "double_integrator_mintime") {
                PathOverlay sw;
                sw.points = detail::di_switching_curve(box.lo[1], box.hi[1]);
                sw.color = "#000000";
                overlays.push_back(std::move(sw));
            }
            for (std::size_t k = 0; k < out.cert.synthesis.size() && k < 3; ++k) {
                PathOverlay ov;
                const auto& traj = out.cert.synthesis[k].trajectory;
                for (const auto& s : traj.states) ov.points.emplace_back(s[0], s[1]);
                for (const auto& seg : out.cert.synthesis[k].segments)
                    ov.markers.emplace_back(seg.end[0], seg.end[1]);
                overlays.push_back(std::move(ov));
            }
            save("field.svg",
                 plot_field_2d(W, plan.system_name + ": candidate field", overlays));
        } else {
            rep.line("plots skipped: dimension > 2");
        }
        if (out.cert.has_verify && !out.cert.decrease.residuals.empty())
            save("residuals.svg", plot_histogram(out.cert.decrease.residuals,
                                                 residual_bin_edges(), "decrease residuals"));
    }

    // candidate field is always exported
    save("candidate.csv", field_csv(W));
    save("candidate.meta", field_meta(W, used_tau, out.cert.solve_sweeps, true));

    rep.begin_section("certificate summary");
    out.all_pass = out.cert.pass();
    rep.verdict("certificate", out.all_pass);
    out.report_text = rep.text();
    save("report.txt", out.report_text);
    return out;
}

}  // namespace mrf

#endif
