#ifndef AGSIM_PIPELINE_HPP
#define AGSIM_PIPELINE_HPP

#include <optional>
#include <string>

#include "agsim/layers.hpp"
#include "agsim/solver.hpp"

namespace agsim {

struct GeneratorSpec {
    AttackGraphKind kind = AttackGraphKind::ExploitDependency;
    bool monotone = true;  // state enumeration only
    StateEnumCaps caps;
};

struct SolverSpec {
    double epsilon = 1e-6;
    double discount = 0.95;
    bool run_q_learning = false;
    QLearnParams q_params;
};

// The layer specs a scenario applies on top of a network model.
struct PipelineSpec {
    GeneratorSpec generator;
    TerrainSpec terrain;
    AdversaryProfile adversary;  // defaults to all technique classes
    TaskSpec task;
    SolverSpec solver;

    PipelineSpec() { adversary = AdversaryProfile::any(); }
};

inline HostId effective_entry(const NetworkModel& model, const AdversaryProfile& prof) {
    if (prof.infrastructure_entry) {
        if (!model.find_host(*prof.infrastructure_entry))
            throw ScenarioInvalidError("infrastructure_entry host " +
                                       *prof.infrastructure_entry + " not in model");
        return *prof.infrastructure_entry;
    }
    for (const auto& h : model.hosts)
        if (h.has_tag(HostTag::Entry)) return h.id;
    throw ScenarioInvalidError("no entry host available");
}

inline AttackGraph build_graph(const NetworkModel& model, const ReachabilityMatrix& reach,
                               const HostId& entry, const GeneratorSpec& gen) {
    if (gen.kind == AttackGraphKind::StateEnumeration)
        return generate_state_enumeration(model, reach, entry, gen.monotone, gen.caps);
    return generate_exploit_dependency(model, reach, entry);
}

// One fully layered build: graph plus the four MDPs in order.
struct LayerStack {
    HostId entry;
    ReachabilityMatrix reach;
    AttackGraph graph;
    LayeredMdp generic;
    LayeredMdp terrain;
    LayeredMdp adversary;
    LayeredMdp task;
};

// allow_empty_adversary: the grounding loop may legitimately rebuild over a
// mutated model whose surviving vulns are all outside the adversary's
// technique set; it degrades to an action-less MDP instead of failing.
inline LayerStack build_layer_stack(const NetworkModel& model, const PipelineSpec& spec,
                                    bool allow_empty_adversary = false) {
    validate_model(model);
    LayerStack st;
    st.entry = effective_entry(model, spec.adversary);
    st.reach = compute_reachability(model);
    st.graph = build_graph(model, st.reach, st.entry, spec.generator);
    st.generic = build_generic(st.graph, model, spec.solver.discount);
    st.terrain = apply_terrain(st.generic, spec.terrain, st.reach);
    try {
        st.adversary = apply_adversary(st.terrain, spec.adversary);
    } catch (const EmptyActionSetError&) {
        if (!allow_empty_adversary) throw;
        st.adversary = st.terrain;
        st.adversary.admissible.clear();
        st.adversary.layers_applied.push_back(Layer::Adversary);
    }
    st.task = apply_task(st.adversary, spec.task);
    return st;
}

struct SolveResult {
    VIResult vi;
    std::optional<QLearnResult> q;
    double optimal_return = 0.0;  // entry bonus at s0 plus V(s0)
};

inline SolveResult solve_task(const LayeredMdp& task_mdp, const SolverSpec& spec,
                              std::uint64_t seed = 1,
                              const ValueFunction* warm_v = nullptr,
                              const QTable* warm_q = nullptr) {
    SolveResult out;
    out.vi = value_iteration(task_mdp, spec.epsilon, 1000000, warm_v);
    out.optimal_return =
        task_mdp.entry_bonus(task_mdp.initial_state) + out.vi.value.at(task_mdp.initial_state);
    if (spec.run_q_learning)
        out.q = q_learning(task_mdp, spec.q_params, seed, warm_q ? *warm_q : QTable{});
    return out;
}

// Goal implied by a task, used for --prune-goal graph exports.
inline GoalSpec task_goal(const TaskSpec& task) {
    if (task.kind == TaskKind::Exfiltration)
        return GoalSpec{{task.exit_node}, task.goal_privilege};
    return GoalSpec{task.targets, task.goal_privilege};
}

}  // namespace agsim

#endif  // AGSIM_PIPELINE_HPP
