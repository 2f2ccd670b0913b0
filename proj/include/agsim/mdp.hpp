#ifndef AGSIM_MDP_HPP
#define AGSIM_MDP_HPP

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agsim/attackgraph.hpp"
#include "agsim/netmodel.hpp"

namespace agsim {

// One catalog entry per distinct exploit instance (target host + vuln).
struct MdpAction {
    ActionId id = 0;
    std::string key;  // "host/vuln", canonical across regeneration
    std::string vuln_id;
    HostId target_host;
    ServiceId service;
    std::string technique;  // "<attack_vector>:<service>"
    double exploitability = 0.0;
    double impact = 0.0;
};

struct Transition {
    StateId succ = 0;
    double prob = 0.0;
};

// One admissible (state, action) pair. The transition row always holds the
// success target and, when success is not certain, a failure self-loop;
// the two probabilities sum to exactly 1.
struct SaEntry {
    ActionId action = 0;
    StateId success_state = 0;
    double p_success = 0.0;
    double base_reward = 0.0;  // immediate reward, entry bonuses excluded
    HostId src_host;           // foothold the exploit launches from
    bool monitored = false;    // route crosses a monitored firewall rule
    std::vector<Transition> transitions;
};

struct LayeredMdp {
    std::vector<std::string> state_keys;  // StateId -> canonical key
    std::vector<std::map<HostId, PrivilegeLevel>> state_privs;
    std::vector<bool> state_acquired;  // exfiltration flag, false unless augmented
    std::vector<StateId> states;       // live states (task layer may prune)
    std::vector<MdpAction> actions;
    std::map<StateId, std::vector<SaEntry>> admissible;  // Φ, rows sorted by action
    std::map<StateId, double> entry_reward;              // paid on entering a state
    std::set<StateId> terminals;
    double discount = 0.95;
    StateId initial_state = 0;
    std::vector<Layer> layers_applied;
    std::set<HostId> model_hosts;  // hosts of the source model, for target checks

    bool is_terminal(StateId s) const { return terminals.count(s) > 0; }

    bool is_live(StateId s) const {
        return std::find(states.begin(), states.end(), s) != states.end();
    }

    const std::vector<SaEntry>& actions_at(StateId s) const {
        static const std::vector<SaEntry> none;
        auto it = admissible.find(s);
        return it == admissible.end() ? none : it->second;
    }

    const SaEntry* find_entry(StateId s, ActionId a) const {
        for (const auto& e : actions_at(s))
            if (e.action == a) return &e;
        return nullptr;
    }

    double entry_bonus(StateId s) const {
        auto it = entry_reward.find(s);
        return it == entry_reward.end() ? 0.0 : it->second;
    }

    // R(s,a): expected immediate reward, including terminal entry bonuses.
    double expected_reward(const SaEntry& e) const {
        double r = e.base_reward;
        for (const auto& t : e.transitions) r += t.prob * entry_bonus(t.succ);
        return r;
    }

    std::size_t admissible_pair_count() const {
        std::size_t n = 0;
        for (const auto& [s, row] : admissible) n += row.size();
        return n;
    }

    std::uint64_t content_hash() const {
        std::uint64_t h = fnv1a_init();
        for (StateId s : states) {
            h = fnv1a(h, state_keys[static_cast<std::size_t>(s)]);
            h = fnv1a(h, &s, sizeof(s));
        }
        for (const auto& a : actions) h = fnv1a(h, a.key);
        for (const auto& [s, row] : admissible) {
            for (const auto& e : row) {
                h = fnv1a(h, &s, sizeof(s));
                h = fnv1a(h, &e.action, sizeof(e.action));
                h = fnv1a(h, &e.p_success, sizeof(e.p_success));
                h = fnv1a(h, &e.base_reward, sizeof(e.base_reward));
                h = fnv1a(h, &e.success_state, sizeof(e.success_state));
            }
        }
        for (const auto& [s, r] : entry_reward) {
            h = fnv1a(h, &s, sizeof(s));
            h = fnv1a(h, &r, sizeof(r));
        }
        for (StateId t : terminals) h = fnv1a(h, &t, sizeof(t));
        h = fnv1a(h, &discount, sizeof(discount));
        for (Layer l : layers_applied) h = fnv1a(h, std::string(to_string(l)));
        return h;
    }
};

// Rebuilds the transition row from p_success so the row sums to exactly 1.
inline void rebalance_transitions(SaEntry& e, StateId self) {
    auto [p, q] = exact_complement(e.p_success);
    e.p_success = p;
    e.transitions.clear();
    if (e.success_state == self) {
        e.transitions.push_back({self, 1.0});
        return;
    }
    if (p > 0.0) e.transitions.push_back({e.success_state, p});
    if (q > 0.0) e.transitions.push_back({self, q});
}

struct GenericParams {
    double p_min = 0.05;  // clamp bounds for exploit success probability
    double p_max = 0.99;
    double r_max = 1.0;  // impact-based rewards scaled into [0, r_max]
};

// ---------------------------------------------------------------------------
// Generic MDP over an attack graph: states are graph nodes, one action per
// applicable exploit edge. Success probability comes from the CVSS
// exploitability subscore, reward from the impact subscore. Failure leaves
// the state unchanged.
// ---------------------------------------------------------------------------

inline LayeredMdp build_generic(const AttackGraph& g, const NetworkModel& model,
                                double discount = 0.95, const GenericParams& params = {}) {
    if (g.empty()) throw EmptyGraphError("cannot build an MDP over an empty attack graph");
    if (!(discount > 0.0 && discount < 1.0))
        throw Error("discount factor must lie in (0,1), got " + std::to_string(discount));

    LayeredMdp m;
    m.discount = discount;
    m.layers_applied = {Layer::Generic};
    for (const auto& h : model.hosts) m.model_hosts.insert(h.id);

    for (const auto& n : g.nodes) {
        m.state_keys.push_back(n.key);
        m.state_privs.push_back(n.privs);
        m.state_acquired.push_back(false);
        m.states.push_back(n.id);
    }
    m.initial_state = g.initial_nodes.empty() ? 0 : g.initial_nodes.front();

    auto find_vuln = [&](const HostId& host, const std::string& vuln_id) -> const Vulnerability* {
        const Host* h = model.find_host(host);
        if (!h) return nullptr;
        for (const auto& v : h->vulns)
            if (v.id == vuln_id) return &v;
        return nullptr;
    };

    // action catalog in canonical (sorted key) order
    std::map<std::string, std::pair<HostId, std::string>> exploit_keys;
    for (const auto& e : g.edges)
        if (!e.vuln_id.empty())
            exploit_keys[e.target_host + "/" + e.vuln_id] = {e.target_host, e.vuln_id};
    std::map<std::string, ActionId> action_ids;
    for (const auto& [key, hv] : exploit_keys) {
        const Vulnerability* v = find_vuln(hv.first, hv.second);
        if (!v)
            throw Error("attack graph references vuln " + hv.second + " on host " + hv.first +
                        " absent from the model");
        MdpAction a;
        a.id = static_cast<ActionId>(m.actions.size());
        a.key = key;
        a.vuln_id = v->id;
        a.target_host = hv.first;
        a.service = v->service;
        a.technique = attack_vector_tag(v->cvss.attack_vector) + ":" + v->service;
        a.exploitability = exploitability_score(v->cvss);
        a.impact = impact_score(v->cvss);
        action_ids[key] = a.id;
        m.actions.push_back(a);
    }

    // success target of each exploit node (exploit-dependency graphs)
    std::map<int, int> exploit_post;
    if (g.kind == AttackGraphKind::ExploitDependency) {
        for (const auto& e : g.edges)
            if (e.vuln_id.empty())
                exploit_post[e.from] = e.to;
    }

    for (const auto& e : g.edges) {
        if (e.vuln_id.empty()) continue;
        StateId s = e.from;
        StateId succ;
        if (g.kind == AttackGraphKind::StateEnumeration) {
            succ = e.to;
        } else {
            auto it = exploit_post.find(e.to);
            if (it == exploit_post.end()) continue;  // exploit without postcondition edge
            succ = it->second;
        }
        const MdpAction& a = m.actions[static_cast<std::size_t>(
            action_ids.at(e.target_host + "/" + e.vuln_id))];
        SaEntry entry;
        entry.action = a.id;
        entry.success_state = succ;
        entry.p_success = clamp(a.exploitability / 3.9, params.p_min, params.p_max);
        entry.base_reward = a.impact / 6.1 * params.r_max;
        entry.src_host = e.src_host;
        entry.monitored = e.monitored;
        rebalance_transitions(entry, s);
        m.admissible[s].push_back(entry);
    }
    for (auto& [s, row] : m.admissible)
        std::sort(row.begin(), row.end(),
                  [](const SaEntry& x, const SaEntry& y) { return x.action < y.action; });
    return m;
}

// ---------------------------------------------------------------------------
// Structured dump (states, Φ, sparse P, R) for solver-independent inspection
// ---------------------------------------------------------------------------

inline std::string dump_mdp(const LayeredMdp& m) {
    std::ostringstream os;
    os.precision(17);
    os << "mdp {\n  discount " << m.discount << "\n  layers";
    for (Layer l : m.layers_applied) os << " " << to_string(l);
    os << "\n  initial " << m.state_keys[static_cast<std::size_t>(m.initial_state)] << "\n";
    for (StateId s : m.states) {
        os << "  state " << m.state_keys[static_cast<std::size_t>(s)];
        if (m.is_terminal(s)) os << " terminal";
        if (m.entry_bonus(s) != 0.0) os << " entry_reward=" << m.entry_bonus(s);
        os << "\n";
        for (const auto& e : m.actions_at(s)) {
            const auto& a = m.actions[static_cast<std::size_t>(e.action)];
            os << "    action " << a.key << " R=" << m.expected_reward(e) << " P=[";
            bool first = true;
            for (const auto& t : e.transitions) {
                if (!first) os << ", ";
                first = false;
                os << m.state_keys[static_cast<std::size_t>(t.succ)] << ":" << t.prob;
            }
            os << "]\n";
        }
    }
    os << "}\n";
    return os.str();
}

}  // namespace agsim

#endif  // AGSIM_MDP_HPP
