#ifndef AGSIM_ATTACKGRAPH_HPP
#define AGSIM_ATTACKGRAPH_HPP

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agsim/netmodel.hpp"

namespace agsim {

enum class AttackGraphKind { StateEnumeration, ExploitDependency };

inline const char* to_string(AttackGraphKind k) {
    return k == AttackGraphKind::StateEnumeration ? "state-enum" : "exploit-dep";
}

enum class AgNodeKind { State, Condition, Exploit };

inline const char* to_string(AgNodeKind k) {
    switch (k) {
        case AgNodeKind::State: return "state";
        case AgNodeKind::Condition: return "condition";
        case AgNodeKind::Exploit: return "exploit";
    }
    return "?";
}

struct AgNode {
    int id = 0;
    AgNodeKind kind = AgNodeKind::State;
    std::string key;  // canonical identity, stable across regeneration

    // State: privilege map over all live hosts. Condition: single entry.
    std::map<HostId, PrivilegeLevel> privs;

    // Exploit payload
    std::string vuln_id;
    HostId target_host;
    ServiceId service;
    PrivilegeLevel grants = PrivilegeLevel::None;
};

struct AgEdge {
    int from = 0;
    int to = 0;

    // Exploit annotation. On state-enumeration edges this describes the
    // applied exploit; on condition->exploit edges it describes the attempt
    // launched from the condition's host. Postcondition edges leave it empty.
    std::string vuln_id;
    HostId target_host;
    HostId src_host;
    ServiceId service;
    bool monitored = false;
};

struct AttackGraph {
    AttackGraphKind kind = AttackGraphKind::ExploitDependency;
    std::vector<AgNode> nodes;
    std::vector<AgEdge> edges;
    std::vector<int> initial_nodes;
    Tick generated_at = 0;

    bool empty() const { return nodes.empty(); }
};

// Goal: any listed host held at, or above, the given privilege.
struct GoalSpec {
    std::vector<HostId> any_of_hosts;
    PrivilegeLevel at_least = PrivilegeLevel::Root;

    bool satisfied_by_privs(const std::map<HostId, PrivilegeLevel>& privs) const {
        for (const auto& h : any_of_hosts) {
            auto it = privs.find(h);
            if (it != privs.end() && it->second >= at_least) return true;
        }
        return false;
    }

    bool satisfied_by_node(const AgNode& n) const {
        if (n.kind == AgNodeKind::Exploit) return false;
        return satisfied_by_privs(n.privs);
    }
};

namespace detail {

inline std::string state_key(const std::map<HostId, PrivilegeLevel>& privs) {
    std::string key = "state:";
    bool first = true;
    for (const auto& [h, p] : privs) {
        if (!first) key += ",";
        first = false;
        key += h;
        key += "=";
        key += to_string(p);
    }
    return key;
}

inline std::string condition_key(const HostId& h, PrivilegeLevel p) {
    return "cond:" + h + ":" + to_string(p);
}

inline std::string exploit_key(const HostId& h, const std::string& vuln_id) {
    return "exploit:" + h + ":" + vuln_id;
}

// Footholds in `privs` able to launch vuln v against host h. A foothold
// must itself be compromised, meet the vuln's precondition, and reach the
// service. Returns (chosen source, every-route-monitored); unmonitored
// routes are preferred, ties broken by host id.
struct FootholdChoice {
    bool any = false;
    HostId src;
    bool monitored = false;
};

inline FootholdChoice choose_foothold(const std::map<HostId, PrivilegeLevel>& privs,
                                      const ReachabilityMatrix& reach, const HostId& target,
                                      const Vulnerability& v) {
    PrivilegeLevel needed = std::max(PrivilegeLevel::User, v.precondition);
    FootholdChoice out;
    for (const auto& [g, p] : privs) {
        if (p < needed) continue;
        if (!reach.reachable(g, target, v.service)) continue;
        bool mon = reach.monitored(g, target, v.service);
        if (!out.any) {
            out = {true, g, mon};
        } else if (out.monitored && !mon) {
            out = {true, g, false};
        }
        // first (lowest-id) host wins within each monitoring class
    }
    return out;
}

}  // namespace detail

struct StateEnumCaps {
    int max_hosts = 12;
    std::size_t max_nodes = 200000;
};

// ---------------------------------------------------------------------------
// State-enumeration generator. Nodes are full network security states
// (privilege per host); exponential in hosts. With monotone=true privileges
// only increase and the result is acyclic; with monotone=false an exploit
// resets the target to its exact postcondition, which can lose privilege
// and introduce cycles.
// ---------------------------------------------------------------------------

inline AttackGraph generate_state_enumeration(const NetworkModel& model,
                                              const ReachabilityMatrix& reach,
                                              const HostId& entry, bool monotone = true,
                                              const StateEnumCaps& caps = {}) {
    const Host* entry_host = model.find_host(entry);
    if (!entry_host || !entry_host->has_tag(HostTag::Entry))
        throw ScenarioInvalidError("entry host " + entry + " missing or not tagged entry");
    if (static_cast<int>(model.hosts.size()) > caps.max_hosts) {
        double projected = std::pow(3.0, static_cast<double>(model.hosts.size()));
        std::ostringstream msg;
        msg << "state enumeration over " << model.hosts.size() << " hosts projects up to 3^"
            << model.hosts.size() << " = " << projected << " states, over the " << caps.max_hosts
            << "-host cap";
        throw StateSpaceCapError(msg.str());
    }

    AttackGraph g;
    g.kind = AttackGraphKind::StateEnumeration;
    g.generated_at = model.clock;

    std::map<HostId, PrivilegeLevel> initial;
    for (const auto& h : model.hosts) initial[h.id] = PrivilegeLevel::None;
    initial[entry] = PrivilegeLevel::User;

    std::map<std::string, int> index;
    auto intern = [&](const std::map<HostId, PrivilegeLevel>& privs) {
        std::string key = detail::state_key(privs);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        if (g.nodes.size() >= caps.max_nodes)
            throw StateSpaceCapError("state enumeration exceeded node cap of " +
                                     std::to_string(caps.max_nodes));
        AgNode n;
        n.id = static_cast<int>(g.nodes.size());
        n.kind = AgNodeKind::State;
        n.key = key;
        n.privs = privs;
        g.nodes.push_back(n);
        index[key] = n.id;
        return n.id;
    };

    int init_id = intern(initial);
    g.initial_nodes = {init_id};

    std::deque<int> frontier{init_id};
    std::set<int> expanded;
    while (!frontier.empty()) {
        int sid = frontier.front();
        frontier.pop_front();
        if (!expanded.insert(sid).second) continue;
        auto privs = g.nodes[static_cast<std::size_t>(sid)].privs;  // copy: nodes vector grows
        for (const auto& h : model.hosts) {
            for (const auto& v : h.vulns) {
                PrivilegeLevel cur = privs.at(h.id);
                bool applicable = monotone ? v.postcondition > cur : v.postcondition != cur;
                if (!applicable) continue;
                auto foothold = detail::choose_foothold(privs, reach, h.id, v);
                if (!foothold.any) continue;
                auto succ = privs;
                succ[h.id] = v.postcondition;
                int tid = intern(succ);
                AgEdge e;
                e.from = sid;
                e.to = tid;
                e.vuln_id = v.id;
                e.target_host = h.id;
                e.src_host = foothold.src;
                e.service = v.service;
                e.monitored = foothold.monitored;
                g.edges.push_back(e);
                if (!expanded.count(tid)) frontier.push_back(tid);
            }
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Exploit-dependency generator. Bipartite condition/exploit graph built by
// forward chaining in waves. An exploit node is added the first wave its
// preconditions hold and its postcondition is still underived, so every
// edge points from an earlier-established node to a later one and the
// graph is acyclic by construction. Node count is O(hosts * vulns).
// ---------------------------------------------------------------------------

inline AttackGraph generate_exploit_dependency(const NetworkModel& model,
                                               const ReachabilityMatrix& reach,
                                               const HostId& entry) {
    const Host* entry_host = model.find_host(entry);
    if (!entry_host || !entry_host->has_tag(HostTag::Entry))
        throw ScenarioInvalidError("entry host " + entry + " missing or not tagged entry");

    AttackGraph g;
    g.kind = AttackGraphKind::ExploitDependency;
    g.generated_at = model.clock;

    std::map<std::string, int> index;
    auto add_condition = [&](const HostId& h, PrivilegeLevel p) {
        std::string key = detail::condition_key(h, p);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        AgNode n;
        n.id = static_cast<int>(g.nodes.size());
        n.kind = AgNodeKind::Condition;
        n.key = key;
        n.privs[h] = p;
        g.nodes.push_back(n);
        index[key] = n.id;
        return n.id;
    };

    int init_id = add_condition(entry, PrivilegeLevel::User);
    g.initial_nodes = {init_id};

    // established condition facts: host -> set of levels held
    std::map<HostId, std::set<PrivilegeLevel>> derived;
    derived[entry].insert(PrivilegeLevel::User);
    std::set<std::string> exploits_added;

    struct Pending {
        const Host* host;
        const Vulnerability* vuln;
        std::vector<int> enablers;  // condition node ids
    };

    for (;;) {
        std::vector<Pending> wave;
        for (const auto& h : model.hosts) {
            for (const auto& v : h.vulns) {
                if (exploits_added.count(detail::exploit_key(h.id, v.id))) continue;
                auto dit = derived.find(h.id);
                if (dit != derived.end() && dit->second.count(v.postcondition))
                    continue;  // fact already derivable; exploit adds nothing
                PrivilegeLevel needed = std::max(PrivilegeLevel::User, v.precondition);
                std::vector<int> enablers;
                for (const auto& [src, levels] : derived) {
                    if (!reach.reachable(src, h.id, v.service)) continue;
                    for (PrivilegeLevel p : levels)
                        if (p >= needed)
                            enablers.push_back(index.at(detail::condition_key(src, p)));
                }
                if (!enablers.empty()) wave.push_back({&h, &v, std::move(enablers)});
            }
        }
        if (wave.empty()) break;
        for (const auto& w : wave) {
            AgNode n;
            n.id = static_cast<int>(g.nodes.size());
            n.kind = AgNodeKind::Exploit;
            n.key = detail::exploit_key(w.host->id, w.vuln->id);
            n.vuln_id = w.vuln->id;
            n.target_host = w.host->id;
            n.service = w.vuln->service;
            n.grants = w.vuln->postcondition;
            g.nodes.push_back(n);
            index[n.key] = n.id;
            exploits_added.insert(n.key);
            for (int cid : w.enablers) {
                AgEdge e;
                e.from = cid;
                e.to = n.id;
                e.vuln_id = w.vuln->id;
                e.target_host = w.host->id;
                e.src_host = g.nodes[static_cast<std::size_t>(cid)].privs.begin()->first;
                e.service = w.vuln->service;
                e.monitored = reach.monitored(e.src_host, w.host->id, w.vuln->service);
                g.edges.push_back(e);
            }
            int post = add_condition(w.host->id, w.vuln->postcondition);
            AgEdge pe;
            pe.from = n.id;
            pe.to = post;
            g.edges.push_back(pe);
        }
        for (const auto& w : wave) derived[w.host->id].insert(w.vuln->postcondition);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Goal-directed pruning: keep exactly the nodes and edges on some
// initial-to-goal path, treating goal nodes as absorbing endpoints.
// ---------------------------------------------------------------------------

inline AttackGraph prune_to_goal(const AttackGraph& g, const GoalSpec& goal) {
    std::size_t n = g.nodes.size();
    std::vector<std::vector<int>> out(n), in(n);
    for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
        out[static_cast<std::size_t>(g.edges[ei].from)].push_back(static_cast<int>(ei));
        in[static_cast<std::size_t>(g.edges[ei].to)].push_back(static_cast<int>(ei));
    }
    std::vector<bool> is_goal(n, false);
    for (std::size_t i = 0; i < n; ++i) is_goal[i] = goal.satisfied_by_node(g.nodes[i]);

    // forward sweep from the initial nodes; goal nodes absorb
    std::vector<bool> fwd(n, false);
    std::deque<int> q;
    for (int s : g.initial_nodes) {
        if (!fwd[static_cast<std::size_t>(s)]) {
            fwd[static_cast<std::size_t>(s)] = true;
            q.push_back(s);
        }
    }
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        if (is_goal[static_cast<std::size_t>(u)]) continue;
        for (int ei : out[static_cast<std::size_t>(u)]) {
            int v = g.edges[static_cast<std::size_t>(ei)].to;
            if (!fwd[static_cast<std::size_t>(v)]) {
                fwd[static_cast<std::size_t>(v)] = true;
                q.push_back(v);
            }
        }
    }

    // backward sweep from reachable goal nodes, staying inside fwd and
    // never walking out through another goal node
    std::vector<bool> keep(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (fwd[i] && is_goal[i]) {
            keep[i] = true;
            q.push_back(static_cast<int>(i));
        }
    }
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int ei : in[static_cast<std::size_t>(u)]) {
            int p = g.edges[static_cast<std::size_t>(ei)].from;
            auto pi = static_cast<std::size_t>(p);
            if (fwd[pi] && !is_goal[pi] && !keep[pi]) {
                keep[pi] = true;
                q.push_back(p);
            }
        }
    }

    AttackGraph pruned;
    pruned.kind = g.kind;
    pruned.generated_at = g.generated_at;
    std::vector<int> remap(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!keep[i]) continue;
        AgNode node = g.nodes[i];
        node.id = static_cast<int>(pruned.nodes.size());
        remap[i] = node.id;
        pruned.nodes.push_back(node);
    }
    for (const auto& e : g.edges) {
        auto fi = static_cast<std::size_t>(e.from);
        auto ti = static_cast<std::size_t>(e.to);
        if (!keep[fi] || !keep[ti] || is_goal[fi]) continue;
        AgEdge ne = e;
        ne.from = remap[fi];
        ne.to = remap[ti];
        pruned.edges.push_back(ne);
    }
    for (int s : g.initial_nodes)
        if (keep[static_cast<std::size_t>(s)])
            pruned.initial_nodes.push_back(remap[static_cast<std::size_t>(s)]);
    return pruned;
}

// ---------------------------------------------------------------------------
// Stats and export
// ---------------------------------------------------------------------------

struct GraphStats {
    std::size_t node_count = 0;
    std::size_t edge_count = 0;
    bool is_acyclic = true;
    int depth = 0;  // longest path in edges; -1 when cyclic
};

inline GraphStats graph_stats(const AttackGraph& g) {
    GraphStats s;
    s.node_count = g.nodes.size();
    s.edge_count = g.edges.size();
    std::size_t n = g.nodes.size();
    if (n == 0) return s;

    std::vector<int> indegree(n, 0);
    std::vector<std::vector<int>> out(n);
    for (const auto& e : g.edges) {
        out[static_cast<std::size_t>(e.from)].push_back(e.to);
        indegree[static_cast<std::size_t>(e.to)]++;
    }
    // Kahn's algorithm; longest path by DP over the topological order
    std::deque<int> q;
    std::vector<int> dist(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (indegree[i] == 0) q.push_back(static_cast<int>(i));
    std::size_t seen = 0;
    int depth = 0;
    while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        ++seen;
        for (int v : out[static_cast<std::size_t>(u)]) {
            auto vi = static_cast<std::size_t>(v);
            dist[vi] = std::max(dist[vi], dist[static_cast<std::size_t>(u)] + 1);
            depth = std::max(depth, dist[vi]);
            if (--indegree[vi] == 0) q.push_back(v);
        }
    }
    s.is_acyclic = seen == n;
    s.depth = s.is_acyclic ? depth : -1;
    return s;
}

// Graphviz DOT export with typed node/edge attributes. Import is not
// supported; graphs are regenerated from models.
inline std::string to_dot(const AttackGraph& g, const std::string& name = "attackgraph") {
    std::ostringstream os;
    os << "digraph " << name << " {\n";
    os << "  graph [kind=\"" << to_string(g.kind) << "\", generated_at=" << g.generated_at
       << "];\n";
    for (const auto& n : g.nodes) {
        os << "  n" << n.id << " [label=\"" << n.key << "\", kind=\"" << to_string(n.kind)
           << "\"";
        if (n.kind == AgNodeKind::Exploit)
            os << ", vuln=\"" << n.vuln_id << "\", host=\"" << n.target_host << "\"";
        if (n.kind == AgNodeKind::Exploit) os << ", shape=box";
        os << "];\n";
    }
    for (const auto& e : g.edges) {
        os << "  n" << e.from << " -> n" << e.to;
        if (!e.vuln_id.empty()) {
            os << " [vuln=\"" << e.vuln_id << "\", src=\"" << e.src_host << "\", monitored="
               << (e.monitored ? "true" : "false") << "]";
        }
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

}  // namespace agsim

#endif  // AGSIM_ATTACKGRAPH_HPP
