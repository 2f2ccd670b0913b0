#ifndef AGSIM_COMMANDS_HPP
#define AGSIM_COMMANDS_HPP

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "agsim/modelgen.hpp"
#include "agsim/scenario.hpp"
#include "agsim/stats.hpp"

namespace agsim {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Exit codes: 0 success, 2 validation error, 3 cap exceeded, 4 runtime error.
template <typename Fn>
int run_with_exit_codes(Fn&& body, std::ostream& err = std::cerr) {
    try {
        body();
        return 0;
    } catch (const StateSpaceCapError& e) {
        err << "error (cap): " << e.what() << "\n";
        return 3;
    } catch (const OracleScaleExceededError& e) {
        err << "error (cap): " << e.what() << "\n";
        return 3;
    } catch (const ScenarioInvalidError& e) {
        err << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const TargetMissingError& e) {
        err << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const EmptyActionSetError& e) {
        err << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const LayerOrderError& e) {
        err << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const InvalidEventError& e) {
        err << "error (validation): " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 4;
    }
}

// ---------------------------------------------------------------------------
// Run manifest: scenario hash, stage timings, artifact paths. Timings live
// only here so every other artifact is byte-reproducible. Written last.
// ---------------------------------------------------------------------------

struct RunManifest {
    std::string command;
    std::string scenario_hash;
    std::vector<std::pair<std::string, double>> timings_ms;
    std::vector<std::string> artifacts;

    void write(const fs::path& outdir) const {
        for (const auto& a : artifacts)
            if (!fs::exists(outdir / a))
                throw Error("manifest references missing artifact " + a);
        ojson j;
        j["command"] = command;
        j["scenario_hash"] = scenario_hash;
        ojson t = ojson::object();
        for (const auto& [k, v] : timings_ms) t[k] = v;
        j["timings_ms"] = t;
        j["artifacts"] = artifacts;
        std::ofstream out(outdir / "manifest.json");
        out << j.dump(2) << "\n";
    }
};

class StageTimer {
public:
    explicit StageTimer(RunManifest& m, std::string stage)
        : manifest_(m), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
    ~StageTimer() {
        auto ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
        manifest_.timings_ms.emplace_back(stage_, ms);
    }

private:
    RunManifest& manifest_;
    std::string stage_;
    std::chrono::steady_clock::time_point start_;
};

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
}

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline ojson diff_to_json(const MdpDiff& d) {
    ojson j;
    j["empty"] = d.empty();
    j["states_added"] = d.states_added;
    j["states_removed"] = d.states_removed;
    j["actions_added"] = d.actions_added;
    j["actions_removed"] = d.actions_removed;
    j["terminals_added"] = d.terminals_added;
    j["terminals_removed"] = d.terminals_removed;
    auto pairs = [](const std::vector<MdpPairChange>& v) {
        ojson arr = ojson::array();
        for (const auto& c : v) {
            ojson e;
            e["state"] = c.state_key;
            e["action"] = c.action_key;
            e["p_before"] = c.p_before;
            e["p_after"] = c.p_after;
            e["r_before"] = c.r_before;
            e["r_after"] = c.r_after;
            arr.push_back(e);
        }
        return arr;
    };
    j["pairs_added"] = pairs(d.pairs_added);
    j["pairs_removed"] = pairs(d.pairs_removed);
    j["pairs_changed"] = pairs(d.pairs_changed);
    return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate: attack graph export plus stats
// ---------------------------------------------------------------------------

struct GenerateOptions {
    std::optional<AttackGraphKind> generator;  // override scenario setting
    bool prune_goal = false;
};

struct GenerateOutcome {
    GraphStats stats;
    bool pruned = false;
};

inline GenerateOutcome cmd_generate(const Scenario& sc, const GenerateOptions& opts,
                                    const fs::path& outdir, std::ostream& log = std::cout) {
    RunManifest manifest;
    manifest.command = "generate";
    manifest.scenario_hash = hex64(sc.hash());

    GeneratorSpec gen = sc.pipeline.generator;
    if (opts.generator) gen.kind = *opts.generator;
    if (opts.prune_goal && !sc.has_task)
        throw ScenarioInvalidError("--prune-goal requires a task section to derive the goal");

    auto t0 = std::chrono::steady_clock::now();
    AttackGraph graph;
    {
        StageTimer timer(manifest, "generate");
        auto reach = compute_reachability(sc.network);
        HostId entry = effective_entry(sc.network, sc.pipeline.adversary);
        graph = build_graph(sc.network, reach, entry, gen);
        if (opts.prune_goal) graph = prune_to_goal(graph, task_goal(sc.pipeline.task));
    }
    double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    GenerateOutcome out;
    out.stats = graph_stats(graph);
    out.pruned = opts.prune_goal;

    fs::create_directories(outdir);
    detail::write_text(outdir / "graph.dot", to_dot(graph));
    manifest.artifacts.push_back("graph.dot");
    ojson stats;
    stats["generator"] = to_string(gen.kind);
    stats["pruned"] = out.pruned;
    stats["nodes"] = out.stats.node_count;
    stats["edges"] = out.stats.edge_count;
    stats["acyclic"] = out.stats.is_acyclic;
    stats["depth"] = out.stats.depth;
    detail::write_text(outdir / "graph_stats.json", stats.dump(2) + "\n");
    manifest.artifacts.push_back("graph_stats.json");
    manifest.write(outdir);

    log << "generate: nodes=" << out.stats.node_count << " edges=" << out.stats.edge_count
        << " acyclic=" << (out.stats.is_acyclic ? "true" : "false")
        << " depth=" << out.stats.depth << " wall_ms=" << wall_ms << "\n";
    return out;
}

// ---------------------------------------------------------------------------
// solve: build the four layers in order, solve, dump provenance
// ---------------------------------------------------------------------------

struct SolveOutcome {
    LayerStack stack;
    SolveResult result;  // for the first scenario seed
};

inline SolveOutcome cmd_solve(const Scenario& sc, const fs::path& outdir,
                              std::ostream& log = std::cout) {
    if (!sc.has_task) throw ScenarioInvalidError("solve requires a task section");
    RunManifest manifest;
    manifest.command = "solve";
    manifest.scenario_hash = hex64(sc.hash());

    SolveOutcome out;
    {
        StageTimer timer(manifest, "build_layers");
        out.stack = build_layer_stack(sc.network, sc.pipeline);
    }

    fs::create_directories(outdir);
    detail::write_text(outdir / "graph.dot", to_dot(out.stack.graph));
    manifest.artifacts.push_back("graph.dot");
    detail::write_text(outdir / "mdp_generic.txt", dump_mdp(out.stack.generic));
    detail::write_text(outdir / "mdp_terrain.txt", dump_mdp(out.stack.terrain));
    detail::write_text(outdir / "mdp_adversary.txt", dump_mdp(out.stack.adversary));
    detail::write_text(outdir / "mdp_task.txt", dump_mdp(out.stack.task));
    for (const char* name : {"mdp_generic.txt", "mdp_terrain.txt", "mdp_adversary.txt",
                             "mdp_task.txt"})
        manifest.artifacts.push_back(name);

    ojson prov;
    prov["generic_to_terrain"] =
        detail::diff_to_json(mdp_diff(out.stack.generic, out.stack.terrain));
    prov["terrain_to_adversary"] =
        detail::diff_to_json(mdp_diff(out.stack.terrain, out.stack.adversary));
    prov["adversary_to_task"] =
        detail::diff_to_json(mdp_diff(out.stack.adversary, out.stack.task));
    detail::write_text(outdir / "provenance.json", prov.dump(2) + "\n");
    manifest.artifacts.push_back("provenance.json");

    const LayeredMdp& task = out.stack.task;
    for (std::size_t i = 0; i < sc.seeds.size(); ++i) {
        std::uint64_t seed = sc.seeds[i];
        SolveResult res;
        {
            StageTimer timer(manifest, "solve_seed_" + std::to_string(seed));
            res = solve_task(task, sc.pipeline.solver, seed);
        }
        ojson j;
        j["scenario"] = sc.name;
        j["scenario_hash"] = hex64(sc.hash());
        j["seed"] = seed;
        ojson layers = ojson::array();
        for (Layer l : task.layers_applied) layers.push_back(to_string(l));
        j["layers"] = layers;
        j["mdp_hash"] = hex64(task.content_hash());
        j["optimal_return"] = res.optimal_return;
        ojson vi;
        vi["sweeps"] = res.vi.sweeps;
        ojson values = ojson::object();
        for (StateId s : task.states)
            values[task.state_keys[static_cast<std::size_t>(s)]] = res.vi.value.at(s);
        vi["values"] = values;
        ojson policy = ojson::object();
        for (const auto& [s, a] : res.vi.policy)
            policy[task.state_keys[static_cast<std::size_t>(s)]] =
                task.actions[static_cast<std::size_t>(a)].key;
        vi["policy"] = policy;
        j["value_iteration"] = vi;
        if (res.q) {
            ojson q;
            Policy greedy = greedy_policy(task, res.q->q);
            ojson qpolicy = ojson::object();
            for (const auto& [s, a] : greedy)
                qpolicy[task.state_keys[static_cast<std::size_t>(s)]] =
                    task.actions[static_cast<std::size_t>(a)].key;
            q["greedy_policy"] = qpolicy;
            q["episode_returns"] = res.q->returns;
            j["q_learning"] = q;
        }
        std::string fname = "results_seed" + std::to_string(seed) + ".json";
        detail::write_text(outdir / fname, j.dump(2) + "\n");
        manifest.artifacts.push_back(fname);
        if (i == 0) out.result = std::move(res);
    }
    manifest.write(outdir);
    log << "solve: states=" << task.states.size() << " actions=" << task.actions.size()
        << " optimal_return=" << out.result.optimal_return << "\n";
    return out;
}

// ---------------------------------------------------------------------------
// ground: grounding report or sweep table
// ---------------------------------------------------------------------------

namespace detail {

inline ojson report_to_json(const GroundingReport& r) {
    ojson j;
    j["staleness"] = r.staleness;
    j["staleness_se"] = r.staleness_se;
    j["actuation_success_rate"] = r.actuation_success_rate;
    j["success_se"] = r.success_se;
    j["refresh_count"] = r.refresh_count;
    j["restarts"] = r.restarts;
    ojson seeds = ojson::array();
    for (const auto& s : r.per_seed) {
        ojson e;
        e["seed"] = s.seed;
        e["agent_steps"] = s.agent_steps;
        e["stale_steps"] = s.stale_steps;
        e["staleness"] = s.staleness();
        e["actions_attempted"] = s.actions_attempted;
        e["actions_valid"] = s.actions_valid;
        e["stale_target"] = s.stale_target;
        e["stale_route"] = s.stale_route;
        e["actuation_success_rate"] = s.actuation_success_rate();
        e["refreshes"] = s.refreshes;
        e["restarts"] = s.restarts;
        e["goals_achieved"] = s.goals_achieved;
        e["grounded_goals"] = s.grounded_goals;
        e["policy_changes"] = s.policy_changes;
        e["degraded_refreshes"] = s.degraded_refreshes;
        seeds.push_back(e);
    }
    j["per_seed"] = seeds;
    return j;
}

inline const char* kSweepCsvHeader =
    "t_refresh,rate_scale,seed,t_agent,add_host,remove_host,add_vuln,remove_vuln,"
    "flip_firewall_rule,staleness,actuation_success_rate,refreshes,restarts\n";

inline void append_sweep_rows(std::ostringstream& csv, Tick t_refresh, double rate_scale,
                              Tick t_agent, const MutationRates& rates,
                              const GroundingReport& r) {
    for (const auto& s : r.per_seed) {
        csv << t_refresh << "," << fmt_double(rate_scale) << "," << s.seed << "," << t_agent
            << "," << fmt_double(rates.add_host) << "," << fmt_double(rates.remove_host)
            << "," << fmt_double(rates.add_vuln) << "," << fmt_double(rates.remove_vuln)
            << "," << fmt_double(rates.flip_firewall_rule) << ","
            << fmt_double(s.staleness()) << "," << fmt_double(s.actuation_success_rate())
            << "," << s.refreshes << "," << s.restarts << "\n";
    }
}

}  // namespace detail

inline GroundingReport cmd_ground(const Scenario& sc, const fs::path& outdir,
                                  std::ostream& log = std::cout) {
    if (!sc.grounding) throw ScenarioInvalidError("ground requires a grounding section");
    if (!sc.has_task) throw ScenarioInvalidError("ground requires a task section");
    RunManifest manifest;
    manifest.command = "ground";
    manifest.scenario_hash = hex64(sc.hash());
    fs::create_directories(outdir);

    std::ostringstream csv;
    csv << detail::kSweepCsvHeader;
    GroundingReport report;

    if (sc.has_sweep()) {
        std::vector<SweepCell> cells;
        {
            StageTimer timer(manifest, "sweep");
            cells = sweep(sc.network, sc.pipeline, *sc.grounding, sc.sweep_t_refresh,
                          sc.sweep_rate_scales);
        }
        ojson grid = ojson::array();
        for (const auto& cell : cells) {
            detail::append_sweep_rows(csv, cell.t_refresh, cell.rate_scale,
                                      sc.grounding->t_agent,
                                      sc.grounding->rates.scaled(cell.rate_scale),
                                      cell.report);
            ojson cj;
            cj["t_refresh"] = cell.t_refresh;
            cj["rate_scale"] = cell.rate_scale;
            cj["report"] = detail::report_to_json(cell.report);
            grid.push_back(cj);
        }
        ojson j;
        j["scenario"] = sc.name;
        j["scenario_hash"] = hex64(sc.hash());
        j["cells"] = grid;
        detail::write_text(outdir / "grounding.json", j.dump(2) + "\n");
        report = cells.front().report;
        log << "ground: sweep cells=" << cells.size() << "\n";
    } else {
        {
            StageTimer timer(manifest, "run_grounded");
            report = run_grounded(sc.network, sc.pipeline, *sc.grounding);
        }
        detail::append_sweep_rows(csv, sc.grounding->t_refresh, 1.0, sc.grounding->t_agent,
                                  sc.grounding->rates, report);
        ojson j;
        j["scenario"] = sc.name;
        j["scenario_hash"] = hex64(sc.hash());
        j["report"] = detail::report_to_json(report);
        detail::write_text(outdir / "grounding.json", j.dump(2) + "\n");
        log << "ground: staleness=" << report.staleness
            << " success=" << report.actuation_success_rate
            << " refreshes=" << report.refresh_count << "\n";
    }
    manifest.artifacts.push_back("grounding.json");
    detail::write_text(outdir / "grounding.csv", csv.str());
    manifest.artifacts.push_back("grounding.csv");
    manifest.write(outdir);
    return report;
}

// ---------------------------------------------------------------------------
// growth-study: Table-style growth report over a parametric family
// ---------------------------------------------------------------------------

struct GrowthRow {
    int n = 0;
    std::string generator;
    std::string status;  // "ok" or "cap"
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double wall_ms = 0.0;
};

struct GrowthStudyResult {
    std::vector<GrowthRow> rows;
    LinearFit state_enum_log2_fit;   // log2(nodes) vs n, ok rows only
    QuadraticFit exploit_dep_fit;    // nodes vs n
    double total_wall_ms = 0.0;
};

inline GrowthStudyResult run_growth_study(int n_min, int n_max, const std::string& family,
                                          const StateEnumCaps& caps = {}) {
    if (n_min < 1 || n_max < n_min)
        throw ScenarioInvalidError("growth study needs 1 <= n_min <= n_max");
    GrowthStudyResult res;
    std::vector<double> se_n, se_log2, ed_n, ed_nodes;
    auto t_start = std::chrono::steady_clock::now();
    for (int n = n_min; n <= n_max; ++n) {
        NetworkModel model = family_model(family, n);
        auto reach = compute_reachability(model);
        HostId entry = model.hosts_with_tag(HostTag::Entry).front();
        {
            GrowthRow row;
            row.n = n;
            row.generator = "state-enum";
            auto t0 = std::chrono::steady_clock::now();
            try {
                AttackGraph g = generate_state_enumeration(model, reach, entry, true, caps);
                row.status = "ok";
                row.nodes = g.nodes.size();
                row.edges = g.edges.size();
                se_n.push_back(n);
                se_log2.push_back(std::log2(static_cast<double>(g.nodes.size())));
            } catch (const StateSpaceCapError&) {
                row.status = "cap";
            }
            row.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            res.rows.push_back(row);
        }
        {
            GrowthRow row;
            row.n = n;
            row.generator = "exploit-dep";
            auto t0 = std::chrono::steady_clock::now();
            AttackGraph g = generate_exploit_dependency(model, reach, entry);
            row.status = "ok";
            row.nodes = g.nodes.size();
            row.edges = g.edges.size();
            ed_n.push_back(n);
            ed_nodes.push_back(static_cast<double>(g.nodes.size()));
            row.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            res.rows.push_back(row);
        }
    }
    res.state_enum_log2_fit = linear_fit(se_n, se_log2);
    res.exploit_dep_fit = quadratic_fit(ed_n, ed_nodes);
    res.total_wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t_start)
                            .count();
    return res;
}

inline GrowthStudyResult cmd_growth_study(int n_min, int n_max, const std::string& family,
                                          const fs::path& outdir,
                                          std::ostream& log = std::cout) {
    RunManifest manifest;
    manifest.command = "growth-study";
    manifest.scenario_hash = hex64(
        fnv1a(fnv1a_init(), family + ":" + std::to_string(n_min) + ":" + std::to_string(n_max)));

    GrowthStudyResult res;
    {
        StageTimer timer(manifest, "growth_study");
        res = run_growth_study(n_min, n_max, family);
    }

    fs::create_directories(outdir);
    std::ostringstream csv;
    csv << "family,n,generator,status,nodes,edges\n";
    for (const auto& r : res.rows)
        csv << family << "," << r.n << "," << r.generator << "," << r.status << "," << r.nodes
            << "," << r.edges << "\n";
    detail::write_text(outdir / "growth.csv", csv.str());
    manifest.artifacts.push_back("growth.csv");

    ojson j;
    j["family"] = family;
    j["n_min"] = n_min;
    j["n_max"] = n_max;
    ojson rows = ojson::array();
    for (const auto& r : res.rows) {
        ojson e;
        e["n"] = r.n;
        e["generator"] = r.generator;
        e["status"] = r.status;
        e["nodes"] = r.nodes;
        e["edges"] = r.edges;
        rows.push_back(e);
    }
    j["rows"] = rows;
    j["state_enum_log2_slope"] = res.state_enum_log2_fit.slope;
    j["state_enum_log2_r2"] = res.state_enum_log2_fit.r_squared;
    j["exploit_dep_quadratic_r2"] = res.exploit_dep_fit.r_squared;
    detail::write_text(outdir / "growth.json", j.dump(2) + "\n");
    manifest.artifacts.push_back("growth.json");
    manifest.write(outdir);

    for (const auto& r : res.rows)
        log << "growth: family=" << family << " n=" << r.n << " generator=" << r.generator
            << " status=" << r.status << " nodes=" << r.nodes << " edges=" << r.edges
            << " wall_ms=" << r.wall_ms << "\n";
    log << "growth: state_enum_log2_slope=" << res.state_enum_log2_fit.slope
        << " exploit_dep_quadratic_r2=" << res.exploit_dep_fit.r_squared
        << " total_wall_ms=" << res.total_wall_ms << "\n";
    return res;
}

}  // namespace agsim

#endif  // AGSIM_COMMANDS_HPP
