#ifndef AGSIM_LAYERS_HPP
#define AGSIM_LAYERS_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "agsim/mdp.hpp"

namespace agsim {

// ---------------------------------------------------------------------------
// Layer specs
// ---------------------------------------------------------------------------

struct TerrainSpec {
    double obstacle_penalty = 0.0;  // <= 0, per monitored-firewall traversal
    std::set<HostId> key_terrain;
    double proximity_bonus = 0.0;                // >= 0
    std::map<HostId, double> concealment;        // host -> detection probability

    void validate() const {
        if (obstacle_penalty > 0.0)
            throw ScenarioInvalidError("terrain obstacle_penalty must be <= 0");
        if (proximity_bonus < 0.0)
            throw ScenarioInvalidError("terrain proximity_bonus must be >= 0");
        for (const auto& [h, d] : concealment)
            if (d < 0.0 || d > 1.0)
                throw ScenarioInvalidError("concealment probability for " + h +
                                           " outside [0,1]");
    }

    bool is_identity() const {
        if (obstacle_penalty != 0.0 || proximity_bonus != 0.0) return false;
        for (const auto& [h, d] : concealment)
            if (d != 0.0) return false;
        return true;
    }
};

struct AdversaryProfile {
    // Technique tags match an action's "<attack_vector>:<service>" class,
    // its attack-vector half, or its service half.
    std::set<std::string> allowed_techniques;
    double skill = 1.0;  // in (0,1], multiplies success probabilities
    std::optional<HostId> infrastructure_entry;

    void validate() const {
        if (allowed_techniques.empty())
            throw ScenarioInvalidError("adversary allowed_techniques must be nonempty");
        if (!(skill > 0.0 && skill <= 1.0))
            throw ScenarioInvalidError("adversary skill must lie in (0,1]");
    }

    bool allows(const MdpAction& a) const {
        if (allowed_techniques.count(a.technique)) return true;
        auto colon = a.technique.find(':');
        if (allowed_techniques.count(a.technique.substr(0, colon))) return true;
        return allowed_techniques.count(a.technique.substr(colon + 1)) > 0;
    }

    static AdversaryProfile any() {
        AdversaryProfile p;
        p.allowed_techniques = {"network", "adjacent", "local", "physical"};
        return p;
    }
};

enum class TaskKind { Pathing, CrownJewel, Exfiltration };

inline const char* to_string(TaskKind k) {
    switch (k) {
        case TaskKind::Pathing: return "pathing";
        case TaskKind::CrownJewel: return "crown_jewel";
        case TaskKind::Exfiltration: return "exfiltration";
    }
    return "?";
}

struct TaskSpec {
    TaskKind kind = TaskKind::Pathing;
    HostId source;                 // must be the attacker entry the graph was built from
    std::vector<HostId> targets;   // Pathing: one host; CrownJewel: tagged hosts
    HostId data_store;             // Exfiltration phase 1
    HostId exit_node;              // Exfiltration phase 2
    double terminal_reward = 10.0;
    double step_penalty = -0.01;
    // privilege needed on a target to count as reaching it
    PrivilegeLevel goal_privilege = PrivilegeLevel::User;

    void validate() const {
        if (terminal_reward <= 0.0)
            throw ScenarioInvalidError("task terminal_reward must be positive");
        if (step_penalty > 0.0)
            throw ScenarioInvalidError("task step_penalty must be non-positive");
        if (kind == TaskKind::Exfiltration) {
            if (data_store.empty() || exit_node.empty())
                throw ScenarioInvalidError(
                    "exfiltration task requires data_store and exit_node hosts");
        } else if (targets.empty()) {
            throw ScenarioInvalidError("task requires at least one target host");
        }
    }
};

// ---------------------------------------------------------------------------
// Terrain layer: obstacles (monitored firewall traversals), key terrain
// proximity bonuses, and concealment that suppresses success probability.
// ---------------------------------------------------------------------------

namespace detail {

inline void require_layers(const LayeredMdp& m, std::initializer_list<Layer> expected,
                           const char* op) {
    std::vector<Layer> want(expected);
    if (m.layers_applied != want) {
        std::string msg = std::string(op) + " requires layer prefix [";
        for (std::size_t i = 0; i < want.size(); ++i)
            msg += std::string(i ? " " : "") + to_string(want[i]);
        msg += "], MDP has [";
        for (std::size_t i = 0; i < m.layers_applied.size(); ++i)
            msg += std::string(i ? " " : "") + to_string(m.layers_applied[i]);
        msg += "]";
        throw LayerOrderError(msg);
    }
}

// landing within one hop of key terrain: the landing host is key terrain
// itself or can reach a key-terrain host directly
inline bool near_key_terrain(const HostId& landing, const std::set<HostId>& key_terrain,
                             const ReachabilityMatrix& reach) {
    if (key_terrain.count(landing)) return true;
    for (const auto& kt : key_terrain)
        if (reach.reachable_any_service(landing, kt)) return true;
    return false;
}

}  // namespace detail

inline LayeredMdp apply_terrain(const LayeredMdp& m, const TerrainSpec& t,
                                const ReachabilityMatrix& reach) {
    detail::require_layers(m, {Layer::Generic}, "apply_terrain");
    t.validate();
    LayeredMdp out = m;
    for (auto& [s, row] : out.admissible) {
        for (auto& e : row) {
            const MdpAction& a = out.actions[static_cast<std::size_t>(e.action)];
            if (e.monitored) e.base_reward += t.obstacle_penalty;
            if (!t.key_terrain.empty() &&
                detail::near_key_terrain(a.target_host, t.key_terrain, reach))
                e.base_reward += t.proximity_bonus;
            auto c = t.concealment.find(a.target_host);
            if (c != t.concealment.end() && c->second != 0.0) {
                e.p_success *= (1.0 - c->second);
                rebalance_transitions(e, s);
            }
        }
    }
    out.layers_applied.push_back(Layer::Terrain);
    return out;
}

// ---------------------------------------------------------------------------
// Adversary layer: restricts the action set to allowed technique classes
// and scales success probability by skill.
// ---------------------------------------------------------------------------

inline LayeredMdp apply_adversary(const LayeredMdp& m, const AdversaryProfile& prof) {
    detail::require_layers(m, {Layer::Generic, Layer::Terrain}, "apply_adversary");
    prof.validate();
    LayeredMdp out = m;
    std::size_t before = m.admissible_pair_count();
    std::map<StateId, std::vector<SaEntry>> filtered;
    for (const auto& [s, row] : out.admissible) {
        std::vector<SaEntry> kept;
        for (const auto& e : row)
            if (prof.allows(out.actions[static_cast<std::size_t>(e.action)]))
                kept.push_back(e);
        if (!kept.empty()) filtered[s] = std::move(kept);
    }
    out.admissible = std::move(filtered);
    if (before > 0 && out.admissible_pair_count() == 0) {
        std::string techniques;
        for (const auto& t : prof.allowed_techniques)
            techniques += (techniques.empty() ? "" : ", ") + t;
        throw EmptyActionSetError("adversary profile {" + techniques +
                                  "} filters out every admissible action");
    }
    if (prof.skill != 1.0) {
        for (auto& [s, row] : out.admissible) {
            for (auto& e : row) {
                e.p_success *= prof.skill;
                rebalance_transitions(e, s);
            }
        }
    }
    out.layers_applied.push_back(Layer::Adversary);
    return out;
}

// ---------------------------------------------------------------------------
// Task layer
// ---------------------------------------------------------------------------

namespace detail {

// states reachable from the initial state through admissible transitions
inline std::set<StateId> reachable_states(const LayeredMdp& m) {
    std::set<StateId> seen{m.initial_state};
    std::deque<StateId> q{m.initial_state};
    while (!q.empty()) {
        StateId s = q.front();
        q.pop_front();
        for (const auto& e : m.actions_at(s)) {
            for (const auto& t : e.transitions) {
                if (t.prob > 0.0 && seen.insert(t.succ).second) q.push_back(t.succ);
            }
        }
    }
    return seen;
}

inline void restrict_to(LayeredMdp& m, const std::set<StateId>& live) {
    std::vector<StateId> states;
    for (StateId s : m.states)
        if (live.count(s)) states.push_back(s);
    m.states = std::move(states);
    std::erase_if(m.admissible, [&](const auto& kv) { return !live.count(kv.first); });
    std::erase_if(m.entry_reward, [&](const auto& kv) { return !live.count(kv.first); });
    std::erase_if(m.terminals, [&](StateId s) { return !live.count(s); });
}

}  // namespace detail

inline LayeredMdp apply_task(const LayeredMdp& m, const TaskSpec& task) {
    detail::require_layers(m, {Layer::Generic, Layer::Terrain, Layer::Adversary},
                           "apply_task");
    task.validate();

    auto check_host = [&](const HostId& h, const char* role) {
        if (!m.model_hosts.count(h))
            throw TargetMissingError(std::string(role) + " host " + h +
                                     " does not exist in the network model");
    };
    check_host(task.source, "task source");
    if (task.kind == TaskKind::Exfiltration) {
        check_host(task.data_store, "data_store");
        check_host(task.exit_node, "exit_node");
    } else {
        for (const auto& h : task.targets) check_host(h, "target");
    }

    const auto& init_privs = m.state_privs[static_cast<std::size_t>(m.initial_state)];
    auto src = init_privs.find(task.source);
    if (src == init_privs.end() || src->second < PrivilegeLevel::User)
        throw ScenarioInvalidError("task source " + task.source +
                                   " is not the attacker entry foothold of this MDP");

    if (task.kind != TaskKind::Exfiltration) {
        GoalSpec goal{task.targets, task.goal_privilege};
        LayeredMdp out = m;
        for (StateId s : out.states) {
            if (goal.satisfied_by_privs(out.state_privs[static_cast<std::size_t>(s)])) {
                out.terminals.insert(s);
                out.entry_reward[s] = task.terminal_reward;
            }
        }
        for (auto& [s, row] : out.admissible)
            for (auto& e : row) e.base_reward += task.step_penalty;
        std::erase_if(out.admissible,
                      [&](const auto& kv) { return out.terminals.count(kv.first) > 0; });
        detail::restrict_to(out, detail::reachable_states(out));
        out.layers_applied.push_back(Layer::Task);
        return out;
    }

    // Exfiltration: augment the state space with an "acquired" flag.
    // S' = S x {0,1}; reaching the data store sets the flag; the terminal
    // is the exit node with the flag set.
    GoalSpec data_goal{{task.data_store}, task.goal_privilege};
    GoalSpec exit_goal{{task.exit_node}, task.goal_privilege};

    LayeredMdp out;
    out.discount = m.discount;
    out.actions = m.actions;
    out.model_hosts = m.model_hosts;
    out.layers_applied = m.layers_applied;

    std::size_t n = m.state_keys.size();
    auto aug = [&](StateId s, bool flag) {
        return static_cast<StateId>(static_cast<std::size_t>(s) + (flag ? n : 0));
    };
    out.state_keys.resize(2 * n);
    out.state_privs.resize(2 * n);
    out.state_acquired.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out.state_keys[i] = m.state_keys[i];
        out.state_keys[i + n] = m.state_keys[i] + "#acquired";
        out.state_privs[i] = m.state_privs[i];
        out.state_privs[i + n] = m.state_privs[i];
        out.state_acquired[i] = false;
        out.state_acquired[i + n] = true;
    }
    auto data_at = [&](StateId s) {
        return data_goal.satisfied_by_privs(m.state_privs[static_cast<std::size_t>(s)]);
    };
    auto exit_at = [&](StateId s) {
        return exit_goal.satisfied_by_privs(m.state_privs[static_cast<std::size_t>(s)]);
    };

    for (StateId s : m.states)
        for (bool flag : {false, true}) out.states.push_back(aug(s, flag));
    std::sort(out.states.begin(), out.states.end());
    out.initial_state = aug(m.initial_state, data_at(m.initial_state));

    for (StateId s : m.states) {
        for (bool flag : {false, true}) {
            StateId as = aug(s, flag);
            if (flag && exit_at(s)) {
                out.terminals.insert(as);
                out.entry_reward[as] = task.terminal_reward;
                continue;  // terminal: no admissible actions
            }
            std::vector<SaEntry> row;
            for (const auto& e : m.actions_at(s)) {
                SaEntry ne = e;
                ne.base_reward += task.step_penalty;
                bool succ_flag = flag || data_at(e.success_state);
                ne.success_state = aug(e.success_state, succ_flag);
                ne.transitions.clear();
                auto [p, q] = exact_complement(e.p_success);
                if (ne.success_state == as) {
                    ne.transitions.push_back({as, 1.0});
                } else {
                    if (p > 0.0) ne.transitions.push_back({ne.success_state, p});
                    if (q > 0.0) ne.transitions.push_back({as, q});
                }
                row.push_back(ne);
            }
            if (!row.empty()) out.admissible[as] = std::move(row);
        }
    }
    detail::restrict_to(out, detail::reachable_states(out));
    out.layers_applied.push_back(Layer::Task);
    return out;
}

// ---------------------------------------------------------------------------
// Structured MDP delta, matched by canonical state/action keys
// ---------------------------------------------------------------------------

struct MdpPairChange {
    std::string state_key;
    std::string action_key;
    double p_before = 0.0, p_after = 0.0;
    double r_before = 0.0, r_after = 0.0;
};

struct MdpDiff {
    std::vector<std::string> states_added, states_removed;
    std::vector<std::string> actions_added, actions_removed;
    std::vector<std::string> terminals_added, terminals_removed;
    std::vector<MdpPairChange> pairs_added, pairs_removed, pairs_changed;

    bool empty() const {
        return states_added.empty() && states_removed.empty() && actions_added.empty() &&
               actions_removed.empty() && terminals_added.empty() &&
               terminals_removed.empty() && pairs_added.empty() && pairs_removed.empty() &&
               pairs_changed.empty();
    }
};

inline MdpDiff mdp_diff(const LayeredMdp& m1, const LayeredMdp& m2) {
    MdpDiff d;
    auto key_of = [](const LayeredMdp& m, StateId s) {
        return m.state_keys[static_cast<std::size_t>(s)];
    };

    std::set<std::string> s1, s2;
    for (StateId s : m1.states) s1.insert(key_of(m1, s));
    for (StateId s : m2.states) s2.insert(key_of(m2, s));
    for (const auto& k : s2)
        if (!s1.count(k)) d.states_added.push_back(k);
    for (const auto& k : s1)
        if (!s2.count(k)) d.states_removed.push_back(k);

    std::set<std::string> t1, t2;
    for (StateId s : m1.terminals) t1.insert(key_of(m1, s));
    for (StateId s : m2.terminals) t2.insert(key_of(m2, s));
    for (const auto& k : t2)
        if (!t1.count(k)) d.terminals_added.push_back(k);
    for (const auto& k : t1)
        if (!t2.count(k)) d.terminals_removed.push_back(k);

    // admissible pairs keyed by (state key, action key)
    using PairMap = std::map<std::pair<std::string, std::string>, std::pair<double, double>>;
    auto collect = [&](const LayeredMdp& m) {
        PairMap out;
        std::set<std::string> used;
        for (const auto& [s, row] : m.admissible) {
            for (const auto& e : row) {
                const auto& ak = m.actions[static_cast<std::size_t>(e.action)].key;
                used.insert(ak);
                out[{key_of(m, s), ak}] = {e.p_success, m.expected_reward(e)};
            }
        }
        return std::make_pair(out, used);
    };
    auto [p1, used1] = collect(m1);
    auto [p2, used2] = collect(m2);
    for (const auto& a : used2)
        if (!used1.count(a)) d.actions_added.push_back(a);
    for (const auto& a : used1)
        if (!used2.count(a)) d.actions_removed.push_back(a);

    const double tol = 1e-12;
    for (const auto& [k, v] : p2) {
        auto it = p1.find(k);
        if (it == p1.end()) {
            d.pairs_added.push_back({k.first, k.second, 0.0, v.first, 0.0, v.second});
        } else if (std::abs(it->second.first - v.first) > tol ||
                   std::abs(it->second.second - v.second) > tol) {
            d.pairs_changed.push_back(
                {k.first, k.second, it->second.first, v.first, it->second.second, v.second});
        }
    }
    for (const auto& [k, v] : p1)
        if (!p2.count(k))
            d.pairs_removed.push_back({k.first, k.second, v.first, 0.0, v.second, 0.0});
    return d;
}

}  // namespace agsim

#endif  // AGSIM_LAYERS_HPP
