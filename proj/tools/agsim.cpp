// agsim - batch front-end for the attack-graph / MDP / RL pipeline.
//
// Subcommands:
//   generate      attack-graph export and stats for a scenario
//   solve         build the four MDP layers, run the solvers, dump provenance
//   ground        run the two-loop grounding simulation (or a sweep)
//   growth-study  node/edge growth over a parametric model family
//
// Exit codes: 0 success, 2 validation error, 3 cap exceeded, 4 runtime error.

#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "agsim/commands.hpp"

namespace {

template <typename Fn>
int dispatch(Fn&& body) {
    return agsim::run_with_exit_codes(std::forward<Fn>(body));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attack-graph MDP pipeline for RL-driven penetration testing studies"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string outdir = "out";

    auto* gen = app.add_subcommand("generate", "generate an attack graph and export it");
    std::string generator_name;
    bool prune_goal = false;
    gen->add_option("--scenario", scenario_path, "scenario file")->required();
    gen->add_option("--out", outdir, "output directory");
    gen->add_option("--generator", generator_name,
                    "override generator: state-enum or exploit-dep");
    gen->add_flag("--prune-goal", prune_goal, "prune to paths reaching the task goal");

    auto* solve = app.add_subcommand("solve", "build the MDP layer stack and solve it");
    solve->add_option("--scenario", scenario_path, "scenario file")->required();
    solve->add_option("--out", outdir, "output directory");

    auto* ground = app.add_subcommand("ground", "run the grounding simulation");
    ground->add_option("--scenario", scenario_path, "scenario file")->required();
    ground->add_option("--out", outdir, "output directory");

    auto* growth = app.add_subcommand("growth-study", "growth rates over a model family");
    int n_min = 2, n_max = 8;
    std::string family = "fully-connected";
    growth->add_option("--n-min", n_min, "smallest host count");
    growth->add_option("--n-max", n_max, "largest host count");
    growth->add_option("--family", family,
                       "model family: fully-connected, chain or single-host");
    growth->add_option("--out", outdir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        return dispatch([&] {
            agsim::GenerateOptions opts;
            opts.prune_goal = prune_goal;
            if (!generator_name.empty()) {
                if (generator_name == "state-enum")
                    opts.generator = agsim::AttackGraphKind::StateEnumeration;
                else if (generator_name == "exploit-dep")
                    opts.generator = agsim::AttackGraphKind::ExploitDependency;
                else
                    throw agsim::ScenarioInvalidError("unknown generator " + generator_name);
            }
            auto sc = agsim::load_scenario_file(scenario_path);
            agsim::cmd_generate(sc, opts, outdir);
        });
    }
    if (solve->parsed()) {
        return dispatch([&] {
            auto sc = agsim::load_scenario_file(scenario_path);
            agsim::cmd_solve(sc, outdir);
        });
    }
    if (ground->parsed()) {
        return dispatch([&] {
            auto sc = agsim::load_scenario_file(scenario_path);
            agsim::cmd_ground(sc, outdir);
        });
    }
    if (growth->parsed()) {
        return dispatch([&] { agsim::cmd_growth_study(n_min, n_max, family, outdir); });
    }
    return 0;
}
