#ifndef AGSIM_TESTS_FIXTURES_HPP
#define AGSIM_TESTS_FIXTURES_HPP

// Shared fixtures and invariant checkers for the unit and acceptance suites.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "agsim/grounding.hpp"
#include "agsim/modelgen.hpp"
#include "agsim/pipeline.hpp"
#include "agsim/solver.hpp"

namespace agsim::testing {

// ---------------------------------------------------------------------------
// MDP well-formedness: P rows over Φ sum to 1 within 1e-9, R defined exactly
// on Φ, terminals have no admissible actions, transitions stay inside the
// live state set, layers_applied is a prefix of the canonical order.
// ---------------------------------------------------------------------------

inline std::string check_mdp_invariants(const LayeredMdp& m) {
    const std::vector<Layer> order{Layer::Generic, Layer::Terrain, Layer::Adversary,
                                   Layer::Task};
    if (m.layers_applied.empty() || m.layers_applied.size() > order.size())
        return "layers_applied has bad length";
    for (std::size_t i = 0; i < m.layers_applied.size(); ++i)
        if (m.layers_applied[i] != order[i]) return "layers_applied is not a prefix";

    std::set<StateId> live(m.states.begin(), m.states.end());
    if (!live.count(m.initial_state)) return "initial state not live";
    for (const auto& [s, row] : m.admissible) {
        if (!live.count(s)) return "admissible row on dead state";
        if (m.is_terminal(s)) return "terminal state has admissible actions";
        if (row.empty()) return "empty admissible row present";
        for (const auto& e : row) {
            if (e.action < 0 || static_cast<std::size_t>(e.action) >= m.actions.size())
                return "action id out of range";
            double sum = 0.0;
            for (const auto& t : e.transitions) {
                if (t.prob < 0.0 || t.prob > 1.0) return "transition prob outside [0,1]";
                if (!live.count(t.succ)) return "transition to dead state";
                sum += t.prob;
            }
            if (std::abs(sum - 1.0) > 1e-9) return "P row does not sum to 1";
            // R defined exactly on Φ: evaluating it must be finite
            if (!std::isfinite(m.expected_reward(e))) return "R not finite on Φ";
        }
    }
    return "";  // empty string = OK
}

// ---------------------------------------------------------------------------
// Hand-built MDP fixtures
// ---------------------------------------------------------------------------

// Minimal builder for solver tests that need MDPs the pipeline would not
// produce (reward cycles, bonus-once augmentations).
class MdpBuilder {
public:
    explicit MdpBuilder(double discount = 0.95) { m_.discount = discount; }

    StateId state(const std::string& key, bool terminal = false, double entry = 0.0) {
        StateId id = static_cast<StateId>(m_.state_keys.size());
        m_.state_keys.push_back(key);
        m_.state_privs.push_back({});
        m_.state_acquired.push_back(false);
        m_.states.push_back(id);
        if (terminal) m_.terminals.insert(id);
        if (entry != 0.0) m_.entry_reward[id] = entry;
        return id;
    }

    ActionId action(const std::string& key) {
        MdpAction a;
        a.id = static_cast<ActionId>(m_.actions.size());
        a.key = key;
        a.technique = "network:" + key;
        m_.actions.push_back(a);
        return a.id;
    }

    void arc(StateId from, ActionId via, StateId to, double p_success, double reward) {
        SaEntry e;
        e.action = via;
        e.success_state = to;
        e.p_success = p_success;
        e.base_reward = reward;
        rebalance_transitions(e, from);
        auto& row = m_.admissible[from];
        row.push_back(e);
        std::sort(row.begin(), row.end(),
                  [](const SaEntry& x, const SaEntry& y) { return x.action < y.action; });
    }

    LayeredMdp finish(StateId initial) {
        m_.initial_state = initial;
        m_.layers_applied = {Layer::Generic, Layer::Terrain, Layer::Adversary, Layer::Task};
        return m_;
    }

private:
    LayeredMdp m_;
};

// Per-visit reward cycle: looping A<->B harvests +1 per hop and beats the
// terminal payout of 5, so the optimal policy cycles forever.
inline LayeredMdp per_visit_cycle_mdp() {
    MdpBuilder b(0.95);
    StateId a = b.state("A");
    StateId bb = b.state("B");
    StateId t = b.state("T", true, 5.0);
    ActionId hop_ab = b.action("hop_ab");
    ActionId hop_ba = b.action("hop_ba");
    ActionId finish = b.action("finish");
    b.arc(a, hop_ab, bb, 1.0, 1.0);
    b.arc(a, finish, t, 1.0, 0.0);
    b.arc(bb, hop_ba, a, 1.0, 1.0);
    return b.finish(a);
}

// Same shape with the bonus collectible once: after the first A->B hop the
// collected copies of A/B pay nothing, so finishing dominates.
inline LayeredMdp once_only_cycle_mdp() {
    MdpBuilder b(0.95);
    StateId a0 = b.state("A");
    StateId b1 = b.state("B#collected");
    StateId a1 = b.state("A#collected");
    StateId t = b.state("T", true, 5.0);
    ActionId hop_ab = b.action("hop_ab");
    ActionId hop_ba = b.action("hop_ba");
    ActionId finish = b.action("finish");
    b.arc(a0, hop_ab, b1, 1.0, 1.0);
    b.arc(a0, finish, t, 1.0, 0.0);
    b.arc(b1, hop_ba, a1, 1.0, 0.0);
    b.arc(a1, hop_ab, b1, 1.0, 0.0);
    b.arc(a1, finish, t, 1.0, 0.0);
    return b.finish(a0);
}

// ---------------------------------------------------------------------------
// Network fixtures
// ---------------------------------------------------------------------------

inline Vulnerability vuln(const std::string& id, const ServiceId& svc,
                          const std::string& cvss, PrivilegeLevel pre,
                          PrivilegeLevel post) {
    Vulnerability v;
    v.id = id;
    v.service = svc;
    v.cvss = parse_cvss(cvss);
    v.precondition = pre;
    v.postcondition = post;
    return v;
}

constexpr const char* kStrongCvss = "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H";
constexpr const char* kWeakCvss = "AV:N/AC:H/PR:L/UI:N/S:U/C:L/I:L/A:N";
// mid exploitability (~0.415 success), full impact
constexpr const char* kRiskyCvss = "AV:N/AC:H/PR:N/UI:R/S:U/C:H/I:H/A:H";

// Two disjoint routes to the crown jewel: a short monitored hop through m
// and a longer unmonitored route through u1/u2. Mirrors
// scenarios/twopath.json for tests that want it programmatically.
inline NetworkModel twopath_model() {
    NetworkModel net;
    net.subnets = {"s0", "s1", "s2a", "s2b", "s3"};
    Host a{"a", "s0", {}, {}, {HostTag::Entry}};
    Host m{"m", "s1", {"rdp"},
           {vuln("CVE-M-1", "rdp", kStrongCvss, PrivilegeLevel::User, PrivilegeLevel::Root)},
           {}};
    Host u1{"u1", "s2a", {"http"},
            {vuln("CVE-U-1", "http", kWeakCvss, PrivilegeLevel::User, PrivilegeLevel::Root)},
            {}};
    Host u2{"u2", "s2b", {"smb"},
            {vuln("CVE-U-2", "smb", kWeakCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
            {}};
    Host t{"t", "s3", {"db"},
           {vuln("CVE-T-1", "db", kStrongCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
           {HostTag::CrownJewel}};
    net.hosts = {a, m, u1, u2, t};
    net.firewall_rules = {{"s0", "s1", "rdp", true, true},
                          {"s0", "s2a", "http", true, false},
                          {"s2a", "s2b", "smb", true, false},
                          {"s1", "s3", "db", true, false},
                          {"s2b", "s3", "db", true, false}};
    return net;
}

inline PipelineSpec twopath_spec(double obstacle_penalty = 0.0) {
    PipelineSpec spec;
    spec.generator.kind = AttackGraphKind::ExploitDependency;
    spec.terrain.obstacle_penalty = obstacle_penalty;
    spec.task.kind = TaskKind::CrownJewel;
    spec.task.source = "a";
    spec.task.targets = {"t"};
    spec.task.goal_privilege = PrivilegeLevel::Root;
    spec.solver.epsilon = 1e-8;
    return spec;
}

// Short risky hop versus a long safe detour to the same target, with the
// same vulnerability on the target reachable from both ends. Built for
// state enumeration, where both routes stay distinct.
inline NetworkModel shortlong_model() {
    NetworkModel net;
    net.subnets = {"w0", "w1", "w2", "w3"};
    Host a{"a", "w0", {}, {}, {HostTag::Entry}};
    Host l1{"l1", "w1", {"ssh"},
            {vuln("CVE-L1", "ssh", kStrongCvss, PrivilegeLevel::User, PrivilegeLevel::Root)},
            {}};
    Host l2{"l2", "w2", {"ssh"},
            {vuln("CVE-L2", "ssh", kStrongCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
            {}};
    Host t{"t", "w3", {"db"},
           {vuln("CVE-T", "db", kRiskyCvss, PrivilegeLevel::User, PrivilegeLevel::Root)},
           {HostTag::CrownJewel}};
    net.hosts = {a, l1, l2, t};
    net.firewall_rules = {{"w0", "w1", "ssh", true, false},
                          {"w1", "w2", "ssh", true, false},
                          {"w2", "w3", "db", true, false},
                          {"w0", "w3", "db", true, false}};
    return net;
}

inline PipelineSpec shortlong_spec(double step_penalty) {
    PipelineSpec spec;
    spec.generator.kind = AttackGraphKind::StateEnumeration;
    spec.task.kind = TaskKind::Pathing;
    spec.task.source = "a";
    spec.task.targets = {"t"};
    spec.task.step_penalty = step_penalty;
    spec.solver.epsilon = 1e-8;
    return spec;
}

// Two disjoint chains forking at the gateway: a weak decoy chain through
// a1/a2/a3 and a strong chain through c1/c2/c3 that reaches the targets.
// The decoy sorts first, so a zero-initialized greedy learner walks into
// it until exploration discovers the c-chain. Pathing tasks to c2 (source
// task) and c3 (shifted target) share their optimal prefix, which is what
// warm-start transfer should exploit.
inline NetworkModel ladder_model() {
    NetworkModel net;
    net.subnets = {"f0", "fa1", "fa2", "fa3", "fc1", "fc2", "fc3"};
    auto chain_vuln = [](const std::string& id, PrivilegeLevel pre, const char* cvss) {
        return vuln(id, "svc", cvss, pre, PrivilegeLevel::Root);
    };
    net.hosts = {
        Host{"gw", "f0", {"svc"},
             {chain_vuln("CVE-GW", PrivilegeLevel::User, kStrongCvss)}, {HostTag::Entry}},
        Host{"a1", "fa1", {"svc"},
             {chain_vuln("CVE-A1", PrivilegeLevel::Root, kWeakCvss)}, {}},
        Host{"a2", "fa2", {"svc"},
             {chain_vuln("CVE-A2", PrivilegeLevel::Root, kWeakCvss)}, {}},
        Host{"a3", "fa3", {"svc"},
             {chain_vuln("CVE-A3", PrivilegeLevel::Root, kWeakCvss)}, {}},
        Host{"c1", "fc1", {"svc"},
             {chain_vuln("CVE-C1", PrivilegeLevel::Root, kStrongCvss)}, {}},
        Host{"c2", "fc2", {"svc"},
             {chain_vuln("CVE-C2", PrivilegeLevel::Root, kStrongCvss)}, {}},
        Host{"c3", "fc3", {"svc"},
             {chain_vuln("CVE-C3", PrivilegeLevel::Root, kStrongCvss)}, {}},
    };
    net.firewall_rules = {{"f0", "fa1", "*", true, false},
                          {"fa1", "fa2", "*", true, false},
                          {"fa2", "fa3", "*", true, false},
                          {"f0", "fc1", "*", true, false},
                          {"fc1", "fc2", "*", true, false},
                          {"fc2", "fc3", "*", true, false}};
    return net;
}

inline PipelineSpec ladder_spec(const HostId& target) {
    PipelineSpec spec;
    spec.generator.kind = AttackGraphKind::ExploitDependency;
    spec.task.kind = TaskKind::Pathing;
    spec.task.source = "gw";
    spec.task.targets = {target};
    spec.solver.epsilon = 1e-8;
    return spec;
}

// Grounding scenario mirror of scenarios/grounding.json.
inline NetworkModel grounding_model() {
    NetworkModel net;
    net.subnets = {"z0", "z1", "z2", "z3"};
    net.hosts = {
        Host{"gw", "z0", {"vpn"},
             {vuln("CVE-GW-1", "vpn", kStrongCvss, PrivilegeLevel::User, PrivilegeLevel::Root)},
             {HostTag::Entry}},
        Host{"a1", "z1", {"ssh"},
             {vuln("CVE-A1-1", "ssh", kStrongCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
             {}},
        Host{"b1", "z1", {"smb"},
             {vuln("CVE-B1-1", "smb", kWeakCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
             {}},
        Host{"a2", "z2", {"http"},
             {vuln("CVE-A2-1", "http", kStrongCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
             {}},
        Host{"b2", "z2", {"db"},
             {vuln("CVE-B2-1", "db", "AV:A/AC:L/PR:N/UI:R/S:U/C:H/I:L/A:N",
                   PrivilegeLevel::Root, PrivilegeLevel::Root)},
             {}},
        Host{"cj", "z3", {"admin"},
             {vuln("CVE-CJ-1", "admin", kStrongCvss, PrivilegeLevel::Root, PrivilegeLevel::Root)},
             {HostTag::CrownJewel}},
    };
    net.firewall_rules = {{"z0", "z1", "*", true, false},
                          {"z1", "z2", "*", true, true},
                          {"z2", "z3", "*", true, false}};
    return net;
}

inline PipelineSpec grounding_spec() {
    PipelineSpec spec;
    spec.generator.kind = AttackGraphKind::ExploitDependency;
    spec.terrain.obstacle_penalty = -0.2;
    spec.task.kind = TaskKind::CrownJewel;
    spec.task.source = "gw";
    spec.task.targets = {"cj"};
    spec.task.goal_privilege = PrivilegeLevel::Root;
    spec.solver.epsilon = 1e-8;
    return spec;
}

}  // namespace agsim::testing

#endif  // AGSIM_TESTS_FIXTURES_HPP
