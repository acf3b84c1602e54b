// Command-line front end: solve / verify / synthesize / converse / bench /
// plot over an INI config. Exit status is 0 iff every requested check passed.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>

#include "mrf/config.hpp"
#include "mrf/pipeline.hpp"
#include "mrf/plot.hpp"
#include "mrf/report.hpp"

namespace fs = std::filesystem;
using namespace mrf;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

RunPlan load_plan(const GlobalOpts& g) {
    RunPlan plan;
    if (!g.config_path.empty())
        plan = RunPlan::from_text(read_text_file(g.config_path));
    if (g.seed_set) plan.seed = g.seed;
    return plan;
}

int run_stages(const GlobalOpts& g, const std::set<Stage>& stages) {
    RunPlan plan = load_plan(g);
    try {
        const auto outcome = run_pipeline(plan, stages, g.out_dir);
        if (!g.quiet) {
            std::cout << outcome.report_text;
            std::cout << (outcome.all_pass ? "PASS" : "FAIL") << "\n";
        }
        return outcome.all_pass ? 0 : 1;
    } catch (const Error& e) {
        // keep partial artifacts, add a failure banner
        fs::create_directories(g.out_dir);
        Report rep;
        rep.begin_section("plan");
        rep.line(plan.echo());
        rep.begin_section("FAILED");
        rep.line(e.what());
        write_text_file((fs::path(g.out_dir) / "report.txt").string(), rep.text());
        if (!g.quiet) std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

int replot(const GlobalOpts& g) {
    const fs::path dir(g.out_dir);
    const fs::path csv = dir / "candidate.csv";
    const fs::path meta = dir / "candidate.meta";
    if (!fs::exists(csv) || !fs::exists(meta)) {
        std::cerr << "plot: no candidate.csv/candidate.meta under " << g.out_dir << "\n";
        return 2;
    }
    const auto field = read_field_csv(csv.string(), meta.string());
    if (field.dim() > 2) {
        if (!g.quiet) std::cout << "plot: dimension > 2, plots skipped\n";
        return 0;
    }
    RunPlan plan = load_plan(g);
    if (field.dim() == 1) {
        write_text_file((dir / "field.svg").string(),
                        plot_field_1d(field, -plan.target_radius, plan.target_radius,
                                      "candidate field"));
    } else {
        write_text_file((dir / "field.svg").string(), plot_field_2d(field, "candidate field"));
    }
    if (!g.quiet) std::cout << "wrote " << (dir / "field.svg").string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exit-time value functions, restraint-function verification, and certified "
                 "trajectory synthesis"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "INI config path")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", g.seed, "override the config seed");
    app.add_flag("--quiet", g.quiet, "suppress console output");

    auto* solve = app.add_subcommand("solve", "solve the exit-time value function");
    auto* verify = app.add_subcommand("verify", "check structure, brackets, decrease, IC");
    auto* synth = app.add_subcommand("synthesize", "verify + certified level-halving synthesis");
    auto* conv = app.add_subcommand("converse", "constructive route: GAC witness -> MRF -> synthesis");
    auto* bench = app.add_subcommand("bench", "full benchmark pipeline");
    auto* plot = app.add_subcommand("plot", "re-emit SVG plots from a finished run directory");
    for (auto* sub : {solve, verify, synth, conv, bench, plot}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    g.seed_set = seed_opt->count() > 0;

    try {
        if (solve->parsed()) return run_stages(g, {Stage::solve});
        if (verify->parsed()) return run_stages(g, {Stage::verify});
        if (synth->parsed()) return run_stages(g, {Stage::verify, Stage::synthesize});
        if (conv->parsed())
            return run_stages(g, {Stage::converse, Stage::verify, Stage::synthesize});
        if (bench->parsed()) return run_stages(g, {Stage::verify, Stage::synthesize});
        if (plot->parsed()) return replot(g);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
