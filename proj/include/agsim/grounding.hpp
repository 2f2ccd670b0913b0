#ifndef AGSIM_GROUNDING_HPP
#define AGSIM_GROUNDING_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agsim/pipeline.hpp"
#include "agsim/stats.hpp"

namespace agsim {

// ---------------------------------------------------------------------------
// Actuation: replaying a policy action against the real (current) network
// ---------------------------------------------------------------------------

enum class ActuationOutcome { Valid, StaleTarget, StaleRoute };

inline const char* to_string(ActuationOutcome o) {
    switch (o) {
        case ActuationOutcome::Valid: return "valid";
        case ActuationOutcome::StaleTarget: return "stale_target";
        case ActuationOutcome::StaleRoute: return "stale_route";
    }
    return "?";
}

// One episode's worth of actuation outcomes.
struct ActuationResult {
    std::vector<ActuationOutcome> outcomes;
    bool achieved_goal = false;  // terminal reached with every action still valid
};

namespace detail {

inline ActuationOutcome classify_actuation(const LayeredMdp& m, StateId s, const SaEntry& e,
                                           const NetworkModel& model,
                                           const ReachabilityMatrix& reach_now) {
    const MdpAction& a = m.actions[static_cast<std::size_t>(e.action)];
    const Host* target = model.find_host(a.target_host);
    if (!target) return ActuationOutcome::StaleTarget;
    const Vulnerability* vuln = nullptr;
    for (const auto& v : target->vulns)
        if (v.id == a.vuln_id) vuln = &v;
    if (!vuln) return ActuationOutcome::StaleTarget;

    // any surviving foothold from the agent's belief that still reaches
    // the service keeps the route alive
    PrivilegeLevel needed = std::max(PrivilegeLevel::User, vuln->precondition);
    for (const auto& [g, p] : m.state_privs[static_cast<std::size_t>(s)]) {
        if (p < needed) continue;
        if (!model.find_host(g)) continue;
        if (reach_now.reachable(g, a.target_host, vuln->service))
            return ActuationOutcome::Valid;
    }
    return ActuationOutcome::StaleRoute;
}

}  // namespace detail

// Classifies the policy's action at `trace_state` against the current
// network. Exactly one of the three outcomes applies.
inline ActuationOutcome actuate(const LayeredMdp& m, const Policy& pi, StateId trace_state,
                                const NetworkModel& model) {
    auto it = pi.find(trace_state);
    if (it == pi.end())
        throw Error("actuate: policy has no action at state " +
                    m.state_keys[static_cast<std::size_t>(trace_state)]);
    const SaEntry* e = m.find_entry(trace_state, it->second);
    if (!e) throw Error("actuate: policy action is not admissible");
    return detail::classify_actuation(m, trace_state, *e, model, compute_reachability(model));
}

// ---------------------------------------------------------------------------
// Grounding simulation config and report
// ---------------------------------------------------------------------------

struct GroundingConfig {
    Tick t_agent = 1;    // ticks per agent step
    Tick t_refresh = 10; // ticks per pipeline regeneration
    Tick horizon = 100;
    Tick refresh_delay = 0;  // latency between snapshot and swap-in
    MutationRates rates;
    std::vector<std::uint64_t> seeds = {1};

    void validate() const {
        if (t_agent < 1) throw ScenarioInvalidError("grounding t_agent must be >= 1");
        if (t_refresh < t_agent)
            throw ScenarioInvalidError("grounding t_refresh must be >= t_agent");
        if (horizon < 1) throw ScenarioInvalidError("grounding horizon must be >= 1");
        if (refresh_delay < 0)
            throw ScenarioInvalidError("grounding refresh_delay must be >= 0");
        if (refresh_delay >= t_refresh)
            throw ScenarioInvalidError(
                "grounding refresh_delay must be smaller than t_refresh");
        if (seeds.empty()) throw ScenarioInvalidError("grounding seeds must be nonempty");
    }
};

struct SeedGroundingStats {
    std::uint64_t seed = 0;
    long agent_steps = 0;
    long stale_steps = 0;
    long actions_attempted = 0;
    long actions_valid = 0;
    long stale_target = 0;
    long stale_route = 0;
    long refreshes = 0;  // pipeline builds, including the initial one
    long restarts = 0;   // episode restarts (goal, dead end, unmappable foothold)
    long goals_achieved = 0;
    long grounded_goals = 0;  // goals whose whole episode actuated Valid
    long policy_changes = 0;  // refreshes that changed the policy
    long degraded_refreshes = 0;  // adversary filter left no actions after a refresh
    std::vector<ActuationResult> episodes;

    double staleness() const {
        return agent_steps == 0 ? 0.0
                                : static_cast<double>(stale_steps) /
                                      static_cast<double>(agent_steps);
    }
    double actuation_success_rate() const {
        return actions_attempted == 0 ? 1.0
                                      : static_cast<double>(actions_valid) /
                                            static_cast<double>(actions_attempted);
    }
};

struct GroundingReport {
    double staleness = 0.0;  // seed means
    double actuation_success_rate = 1.0;
    double staleness_se = 0.0;
    double success_se = 0.0;
    long refresh_count = 0;  // summed over seeds
    long restarts = 0;
    std::vector<SeedGroundingStats> per_seed;
};

// ---------------------------------------------------------------------------
// The two grounding loops, one seed at a time. Per tick, in order:
// mutations land on the real network, the pipeline refreshes on its
// boundary, then the agent steps against the in-use MDP while the same
// action is actuated against the current network.
// ---------------------------------------------------------------------------

namespace detail {

struct BuiltPipeline {
    LayerStack stack;
    SolveResult sol;
    Tick built_from = 0;
    std::uint64_t mdp_hash = 0;
};

inline SeedGroundingStats run_one_seed(const NetworkModel& model0, const PipelineSpec& spec,
                                       const GroundingConfig& cfg, std::uint64_t seed) {
    SeedGroundingStats st;
    st.seed = seed;

    NetworkModel model = model0;
    auto stream = mutation_stream(seed, cfg.rates, cfg.horizon);
    std::size_t next_ev = 0;
    Rng agent_rng(seed ^ 0x517cc1b727220a95ULL);

    std::optional<BuiltPipeline> cur;
    struct PendingRefresh {
        NetworkModel snapshot;
        Tick from = 0;
        Tick ready_at = 0;
    };
    std::optional<PendingRefresh> pending;

    Tick last_change = -1;
    ReachabilityMatrix reach_now = compute_reachability(model);
    StateId agent_state = 0;
    ActuationResult episode;

    auto policy_signature = [](const BuiltPipeline& b) {
        std::map<std::string, std::string> sig;
        for (const auto& [s, a] : b.sol.vi.policy)
            sig[b.stack.task.state_keys[static_cast<std::size_t>(s)]] =
                b.stack.task.actions[static_cast<std::size_t>(a)].key;
        return sig;
    };

    auto restart = [&](bool count) {
        if (cur) agent_state = cur->stack.task.initial_state;
        if (count) ++st.restarts;
        if (!episode.outcomes.empty()) st.episodes.push_back(episode);
        episode = ActuationResult{};
    };

    auto rebuild = [&](const NetworkModel& snapshot, Tick from) {
        bool first = !cur.has_value();
        BuiltPipeline next;
        // a broken initial scenario is an error; a refresh that the
        // adversary filter empties out degrades instead
        next.stack = build_layer_stack(snapshot, spec, !first);
        next.built_from = from;
        next.mdp_hash = next.stack.task.content_hash();
        if (!first && next.mdp_hash == cur->mdp_hash) {
            // nothing changed: keep the prior solution verbatim
            cur->built_from = from;
            ++st.refreshes;
            return;
        }
        ValueFunction warm;
        if (!first) {
            auto map = shared_state_map(cur->stack.task, next.stack.task);
            for (const auto& [olds, news] : map) warm.v[news] = cur->sol.vi.value.at(olds);
        }
        SolverSpec vi_only = spec.solver;
        vi_only.run_q_learning = false;  // the grounded loop re-solves with VI
        next.sol = solve_task(next.stack.task, vi_only, seed, first ? nullptr : &warm);
        if (next.stack.task.admissible_pair_count() == 0 && !first) ++st.degraded_refreshes;
        ++st.refreshes;

        if (first) {
            agent_state = next.stack.task.initial_state;
            cur = std::move(next);
            return;
        }
        if (policy_signature(*cur) != policy_signature(next)) ++st.policy_changes;

        // carry the agent's foothold into the new state space by key
        const std::string& key = cur->stack.task.state_keys[static_cast<std::size_t>(agent_state)];
        StateId mapped = -1;
        for (StateId s : next.stack.task.states) {
            if (next.stack.task.state_keys[static_cast<std::size_t>(s)] == key) {
                mapped = s;
                break;
            }
        }
        cur = std::move(next);
        if (mapped >= 0) {
            agent_state = mapped;
        } else {
            restart(true);  // unmappable foothold
        }
    };

    for (Tick t = 0; t < cfg.horizon; ++t) {
        bool model_changed = false;
        while (next_ev < stream.size() && stream[next_ev].at == t) {
            std::uint64_t before = model_hash(model);
            model = apply_mutation(model, stream[next_ev]);
            ++next_ev;
            if (model_hash(model) != before) {
                last_change = t;
                model_changed = true;
            }
        }
        if (model_changed) reach_now = compute_reachability(model);

        if (t % cfg.t_refresh == 0) {
            if (cfg.refresh_delay == 0)
                rebuild(model, t);
            else
                pending = PendingRefresh{model, t, t + cfg.refresh_delay};
        }
        if (pending && t >= pending->ready_at) {
            rebuild(pending->snapshot, pending->from);
            pending.reset();
        }

        if (cur && t % cfg.t_agent == 0) {
            const LayeredMdp& task = cur->stack.task;
            ++st.agent_steps;
            if (last_change > cur->built_from) ++st.stale_steps;

            const Policy& pi = cur->sol.vi.policy;
            auto pit = pi.find(agent_state);
            const SaEntry* e =
                pit == pi.end() ? nullptr : task.find_entry(agent_state, pit->second);
            if (task.is_terminal(agent_state) || !e) {
                restart(true);
                continue;
            }

            ActuationOutcome outcome =
                detail::classify_actuation(task, agent_state, *e, model, reach_now);
            ++st.actions_attempted;
            episode.outcomes.push_back(outcome);
            switch (outcome) {
                case ActuationOutcome::Valid: ++st.actions_valid; break;
                case ActuationOutcome::StaleTarget: ++st.stale_target; break;
                case ActuationOutcome::StaleRoute: ++st.stale_route; break;
            }

            StateId succ = detail::sample_successor(*e, agent_rng);
            agent_state = succ;
            if (task.is_terminal(succ)) {
                ++st.goals_achieved;
                bool all_valid = true;
                for (auto o : episode.outcomes) all_valid = all_valid && o == ActuationOutcome::Valid;
                episode.achieved_goal = all_valid;
                if (all_valid) ++st.grounded_goals;
                restart(true);
            }
        }
    }
    if (!episode.outcomes.empty()) st.episodes.push_back(episode);
    return st;
}

}  // namespace detail

inline GroundingReport run_grounded(const NetworkModel& model0, const PipelineSpec& spec,
                                    const GroundingConfig& cfg) {
    cfg.validate();
    validate_model(model0);
    GroundingReport report;
    std::vector<double> stale, success;
    for (std::uint64_t seed : cfg.seeds) {
        auto st = detail::run_one_seed(model0, spec, cfg, seed);
        stale.push_back(st.staleness());
        success.push_back(st.actuation_success_rate());
        report.refresh_count += st.refreshes;
        report.restarts += st.restarts;
        report.per_seed.push_back(std::move(st));
    }
    report.staleness = mean(stale);
    report.actuation_success_rate = mean(success);
    report.staleness_se = standard_error(stale);
    report.success_se = standard_error(success);
    return report;
}

// ---------------------------------------------------------------------------
// Factorial sweep over refresh period and mutation-rate scale
// ---------------------------------------------------------------------------

struct SweepCell {
    Tick t_refresh = 0;
    double rate_scale = 1.0;
    GroundingReport report;
};

inline std::vector<SweepCell> sweep(const NetworkModel& model0, const PipelineSpec& spec,
                                    const GroundingConfig& base,
                                    const std::vector<Tick>& t_refresh_grid,
                                    const std::vector<double>& rate_scales) {
    if (t_refresh_grid.empty() || rate_scales.empty())
        throw ScenarioInvalidError("sweep grid must be nonempty");
    std::vector<SweepCell> cells;
    for (Tick tr : t_refresh_grid) {
        for (double rs : rate_scales) {
            GroundingConfig cfg = base;
            cfg.t_refresh = tr;
            cfg.rates = base.rates.scaled(rs);
            SweepCell cell;
            cell.t_refresh = tr;
            cell.rate_scale = rs;
            cell.report = run_grounded(model0, spec, cfg);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

}  // namespace agsim

#endif  // AGSIM_GROUNDING_HPP
