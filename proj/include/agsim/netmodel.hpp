#ifndef AGSIM_NETMODEL_HPP
#define AGSIM_NETMODEL_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "agsim/core.hpp"
#include "agsim/cvss.hpp"

namespace agsim {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

enum class HostTag { Entry, CrownJewel, DataStore, ExitNode };

inline const char* to_string(HostTag t) {
    switch (t) {
        case HostTag::Entry: return "entry";
        case HostTag::CrownJewel: return "crown_jewel";
        case HostTag::DataStore: return "data_store";
        case HostTag::ExitNode: return "exit_node";
    }
    return "?";
}

inline HostTag host_tag_from_string(const std::string& s) {
    if (s == "entry") return HostTag::Entry;
    if (s == "crown_jewel") return HostTag::CrownJewel;
    if (s == "data_store") return HostTag::DataStore;
    if (s == "exit_node") return HostTag::ExitNode;
    throw std::invalid_argument("unknown host tag: " + s);
}

struct Vulnerability {
    std::string id;  // CVE-style identifier
    ServiceId service;
    CvssVector cvss;
    PrivilegeLevel precondition = PrivilegeLevel::User;   // needed on the foothold host
    PrivilegeLevel postcondition = PrivilegeLevel::Root;  // granted on this host

    bool operator==(const Vulnerability&) const = default;
};

struct Host {
    HostId id;
    SubnetId subnet;
    std::vector<ServiceId> services;
    std::vector<Vulnerability> vulns;
    std::set<HostTag> tags;

    bool has_tag(HostTag t) const { return tags.count(t) > 0; }
    bool runs(const ServiceId& svc) const {
        return std::find(services.begin(), services.end(), svc) != services.end();
    }

    bool operator==(const Host&) const = default;
};

struct FirewallRule {
    SubnetId src;
    SubnetId dst;
    ServiceId service = "*";  // "*" matches any service
    bool allow = false;
    bool monitored = false;  // traversal is inspected

    bool matches(const SubnetId& s, const SubnetId& d, const ServiceId& svc) const {
        return src == s && dst == d && (service == "*" || service == svc);
    }

    bool operator==(const FirewallRule&) const = default;
};

// Immutable value after construction; mutations produce new models.
struct NetworkModel {
    std::vector<Host> hosts;
    std::vector<SubnetId> subnets;
    std::vector<FirewallRule> firewall_rules;  // first-match order, default deny
    Tick clock = 0;

    const Host* find_host(const HostId& id) const {
        for (const auto& h : hosts)
            if (h.id == id) return &h;
        return nullptr;
    }

    std::vector<HostId> hosts_with_tag(HostTag t) const {
        std::vector<HostId> out;
        for (const auto& h : hosts)
            if (h.has_tag(t)) out.push_back(h.id);
        return out;
    }
};

inline void validate_model(const NetworkModel& m, bool require_entry = true) {
    std::set<HostId> ids;
    std::set<SubnetId> subnets(m.subnets.begin(), m.subnets.end());
    for (const auto& h : m.hosts) {
        if (!ids.insert(h.id).second)
            throw ScenarioInvalidError("duplicate host id: " + h.id);
        if (!subnets.count(h.subnet))
            throw ScenarioInvalidError("host " + h.id + " references unknown subnet " + h.subnet);
        std::set<ServiceId> svcs;
        for (const auto& s : h.services)
            if (!svcs.insert(s).second)
                throw ScenarioInvalidError("duplicate service " + s + " on host " + h.id);
        for (const auto& v : h.vulns) {
            if (!h.runs(v.service))
                throw ScenarioInvalidError("vuln " + v.id + " on host " + h.id +
                                           " references service " + v.service +
                                           " not run by the host");
            if (v.postcondition == PrivilegeLevel::None)
                throw ScenarioInvalidError("vuln " + v.id + " grants no privilege");
        }
    }
    for (const auto& r : m.firewall_rules) {
        if (!subnets.count(r.src) || !subnets.count(r.dst))
            throw ScenarioInvalidError("firewall rule references unknown subnet " + r.src +
                                       "->" + r.dst);
    }
    if (require_entry) {
        bool has_entry = false;
        for (const auto& h : m.hosts) has_entry = has_entry || h.has_tag(HostTag::Entry);
        if (!has_entry) throw ScenarioInvalidError("no host is tagged as entry point");
    }
}

// Content hash over everything except the clock. Used for refresh-loop
// change detection and artifact manifests.
inline std::uint64_t model_hash(const NetworkModel& m) {
    std::uint64_t h = fnv1a_init();
    for (const auto& s : m.subnets) h = fnv1a(fnv1a(h, "subnet:"), s);
    for (const auto& host : m.hosts) {
        h = fnv1a(fnv1a(h, "host:"), host.id);
        h = fnv1a(h, host.subnet);
        for (const auto& s : host.services) h = fnv1a(h, s);
        for (const auto& v : host.vulns) {
            h = fnv1a(h, v.id);
            h = fnv1a(h, v.service);
            h = fnv1a(h, format_cvss(v.cvss));
            h = fnv1a(h, std::string(to_string(v.precondition)));
            h = fnv1a(h, std::string(to_string(v.postcondition)));
        }
        for (auto t : host.tags) h = fnv1a(h, std::string(to_string(t)));
    }
    for (const auto& r : m.firewall_rules) {
        h = fnv1a(fnv1a(h, "rule:"), r.src);
        h = fnv1a(h, r.dst);
        h = fnv1a(h, r.service);
        h = fnv1a(h, r.allow ? "allow" : "deny");
        h = fnv1a(h, r.monitored ? "mon" : "plain");
    }
    return h;
}

// ---------------------------------------------------------------------------
// Reachability analysis
//
// Single-hop rule evaluation: an entry (a, b, svc) answers whether traffic
// from a to service svc on b is permitted directly. Multi-hop attack paths
// are the attack-graph layer's concern, not reachability's.
// ---------------------------------------------------------------------------

struct ReachEntry {
    bool reachable = false;
    bool monitored = false;  // a monitored rule is on the path
};

struct ReachabilityMatrix {
    std::map<std::tuple<HostId, HostId, ServiceId>, ReachEntry> entries;

    bool reachable(const HostId& a, const HostId& b, const ServiceId& svc) const {
        auto it = entries.find({a, b, svc});
        return it != entries.end() && it->second.reachable;
    }
    bool monitored(const HostId& a, const HostId& b, const ServiceId& svc) const {
        auto it = entries.find({a, b, svc});
        return it != entries.end() && it->second.monitored;
    }
    bool reachable_any_service(const HostId& a, const HostId& b) const {
        for (auto it = entries.lower_bound({a, b, ServiceId{}}); it != entries.end(); ++it) {
            if (std::get<0>(it->first) != a || std::get<1>(it->first) != b) break;
            if (it->second.reachable) return true;
        }
        return false;
    }
};

inline ReachabilityMatrix compute_reachability(const NetworkModel& m) {
    ReachabilityMatrix out;
    for (const auto& a : m.hosts) {
        for (const auto& b : m.hosts) {
            for (const auto& svc : b.services) {
                ReachEntry e;
                if (a.subnet == b.subnet) {
                    e.reachable = true;  // intra-subnet traffic bypasses the firewall
                } else {
                    for (const auto& rule : m.firewall_rules) {
                        if (rule.matches(a.subnet, b.subnet, svc)) {
                            e.reachable = rule.allow;
                            e.monitored = rule.allow && rule.monitored;
                            break;  // first match wins
                        }
                    }
                }
                out.entries[{a.id, b.id, svc}] = e;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mutation events
// ---------------------------------------------------------------------------

enum class MutationKind { AddHost, RemoveHost, AddVuln, RemoveVuln, FlipFirewallRule };

inline const char* to_string(MutationKind k) {
    switch (k) {
        case MutationKind::AddHost: return "add_host";
        case MutationKind::RemoveHost: return "remove_host";
        case MutationKind::AddVuln: return "add_vuln";
        case MutationKind::RemoveVuln: return "remove_vuln";
        case MutationKind::FlipFirewallRule: return "flip_firewall_rule";
    }
    return "?";
}

constexpr int kMutationKindCount = 5;

// An event either carries a concrete payload (set explicitly by tests or
// scenario tooling) or a raw `pick` that selects an eligible entity at
// apply time. Stream-generated events use picks so a stream stays valid
// against whatever the model has evolved into.
struct MutationEvent {
    Tick at = 0;
    MutationKind kind = MutationKind::AddVuln;
    std::uint64_t pick = 0;

    std::optional<Host> new_host;           // AddHost
    std::optional<HostId> target_host;      // RemoveHost / AddVuln / RemoveVuln
    std::optional<Vulnerability> new_vuln;  // AddVuln
    std::optional<std::string> vuln_id;     // RemoveVuln
    std::optional<std::size_t> rule_index;  // FlipFirewallRule
};

namespace detail {

inline const std::vector<std::string>& cvss_templates() {
    static const std::vector<std::string> t = {
        "AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
        "AV:N/AC:H/PR:L/UI:N/S:U/C:L/I:L/A:N",
        "AV:A/AC:L/PR:N/UI:R/S:U/C:H/I:L/A:N",
        "AV:L/AC:L/PR:L/UI:N/S:U/C:H/I:H/A:H",
        "AV:N/AC:L/PR:L/UI:N/S:C/C:H/I:N/A:N",
    };
    return t;
}

inline Vulnerability synth_vuln(std::uint64_t pick, const ServiceId& svc) {
    const auto& templates = cvss_templates();
    Vulnerability v;
    v.id = "CVE-MUT-" + std::to_string(pick % 100000);
    v.service = svc;
    v.cvss = parse_cvss(templates[pick % templates.size()]);
    v.precondition = PrivilegeLevel::User;
    v.postcondition = (pick / 7) % 2 == 0 ? PrivilegeLevel::Root : PrivilegeLevel::User;
    return v;
}

}  // namespace detail

// Applies one event, returning a new model with the clock advanced to
// ev.at. Concrete payloads that reference missing entities (or remove an
// entry host) raise InvalidEventError. Pick-based events that find no
// eligible entity degrade to a clock-only advance.
inline NetworkModel apply_mutation(const NetworkModel& model, const MutationEvent& ev) {
    if (ev.at < model.clock)
        throw InvalidEventError("event at tick " + std::to_string(ev.at) +
                                " precedes model clock " + std::to_string(model.clock));
    NetworkModel next = model;
    next.clock = ev.at;

    switch (ev.kind) {
        case MutationKind::AddHost: {
            Host h;
            if (ev.new_host) {
                h = *ev.new_host;
                if (model.find_host(h.id))
                    throw InvalidEventError("add_host: duplicate host id " + h.id);
                if (std::find(model.subnets.begin(), model.subnets.end(), h.subnet) ==
                    model.subnets.end())
                    throw InvalidEventError("add_host: unknown subnet " + h.subnet);
            } else {
                if (model.subnets.empty()) return next;
                h.id = "mut-h" + std::to_string(ev.pick % 100000);
                if (model.find_host(h.id)) h.id += "x";
                if (model.find_host(h.id)) return next;
                h.subnet = model.subnets[ev.pick % model.subnets.size()];
                h.services = {"svc"};
                h.vulns = {detail::synth_vuln(ev.pick, "svc")};
            }
            next.hosts.push_back(h);
            break;
        }
        case MutationKind::RemoveHost: {
            HostId target;
            if (ev.target_host) {
                target = *ev.target_host;
                const Host* h = model.find_host(target);
                if (!h) throw InvalidEventError("remove_host: unknown host " + target);
                if (h->has_tag(HostTag::Entry))
                    throw InvalidEventError("remove_host: cannot remove entry host " + target);
            } else {
                std::vector<HostId> eligible;
                for (const auto& h : model.hosts)
                    if (!h.has_tag(HostTag::Entry)) eligible.push_back(h.id);
                if (eligible.empty()) return next;
                target = eligible[ev.pick % eligible.size()];
            }
            std::erase_if(next.hosts, [&](const Host& h) { return h.id == target; });
            break;
        }
        case MutationKind::AddVuln: {
            HostId target;
            Vulnerability v;
            if (ev.target_host && ev.new_vuln) {
                target = *ev.target_host;
                v = *ev.new_vuln;
                const Host* h = model.find_host(target);
                if (!h) throw InvalidEventError("add_vuln: unknown host " + target);
                if (!h->runs(v.service))
                    throw InvalidEventError("add_vuln: host " + target +
                                            " does not run service " + v.service);
            } else {
                std::vector<const Host*> eligible;
                for (const auto& h : model.hosts)
                    if (!h.services.empty()) eligible.push_back(&h);
                if (eligible.empty()) return next;
                const Host* h = eligible[ev.pick % eligible.size()];
                target = h->id;
                v = detail::synth_vuln(ev.pick, h->services[(ev.pick / 3) % h->services.size()]);
                for (const auto& existing : h->vulns)
                    if (existing.id == v.id) return next;
            }
            for (auto& h : next.hosts)
                if (h.id == target) h.vulns.push_back(v);
            break;
        }
        case MutationKind::RemoveVuln: {
            HostId target;
            std::string vid;
            if (ev.target_host && ev.vuln_id) {
                target = *ev.target_host;
                vid = *ev.vuln_id;
                const Host* h = model.find_host(target);
                if (!h) throw InvalidEventError("remove_vuln: unknown host " + target);
                bool found = false;
                for (const auto& v : h->vulns) found = found || v.id == vid;
                if (!found)
                    throw InvalidEventError("remove_vuln: no vuln " + vid + " on " + target);
            } else {
                std::vector<std::pair<HostId, std::string>> eligible;
                for (const auto& h : model.hosts)
                    for (const auto& v : h.vulns) eligible.emplace_back(h.id, v.id);
                if (eligible.empty()) return next;
                auto choice = eligible[ev.pick % eligible.size()];
                target = choice.first;
                vid = choice.second;
            }
            for (auto& h : next.hosts)
                if (h.id == target)
                    std::erase_if(h.vulns,
                                  [&](const Vulnerability& v) { return v.id == vid; });
            break;
        }
        case MutationKind::FlipFirewallRule: {
            std::size_t idx;
            if (ev.rule_index) {
                idx = *ev.rule_index;
                if (idx >= model.firewall_rules.size())
                    throw InvalidEventError("flip_firewall_rule: index out of range");
            } else {
                if (model.firewall_rules.empty()) return next;
                idx = static_cast<std::size_t>(ev.pick % model.firewall_rules.size());
            }
            next.firewall_rules[idx].allow = !next.firewall_rules[idx].allow;
            break;
        }
    }
    return next;
}

// Per-kind Poisson rates, events per tick.
struct MutationRates {
    double add_host = 0.0;
    double remove_host = 0.0;
    double add_vuln = 0.0;
    double remove_vuln = 0.0;
    double flip_firewall_rule = 0.0;

    double rate(MutationKind k) const {
        switch (k) {
            case MutationKind::AddHost: return add_host;
            case MutationKind::RemoveHost: return remove_host;
            case MutationKind::AddVuln: return add_vuln;
            case MutationKind::RemoveVuln: return remove_vuln;
            case MutationKind::FlipFirewallRule: return flip_firewall_rule;
        }
        return 0.0;
    }

    MutationRates scaled(double f) const {
        return {add_host * f, remove_host * f, add_vuln * f, remove_vuln * f,
                flip_firewall_rule * f};
    }

    bool all_zero() const {
        return add_host == 0.0 && remove_host == 0.0 && add_vuln == 0.0 &&
               remove_vuln == 0.0 && flip_firewall_rule == 0.0;
    }
};

// Seeded Poisson event stream over [0, horizon), sorted by tick.
// Each kind draws from its own substream so adding a kind does not
// perturb the others.
inline std::vector<MutationEvent> mutation_stream(std::uint64_t seed,
                                                  const MutationRates& rates,
                                                  Tick horizon) {
    std::vector<MutationEvent> events;
    for (int k = 0; k < kMutationKindCount; ++k) {
        auto kind = static_cast<MutationKind>(k);
        double rate = rates.rate(kind);
        if (rate <= 0.0) continue;
        Rng rng(seed * 1000003ULL + static_cast<std::uint64_t>(k) + 1);
        double t = rng.next_exponential(rate);
        while (t < static_cast<double>(horizon)) {
            MutationEvent ev;
            ev.at = static_cast<Tick>(t);
            ev.kind = kind;
            ev.pick = rng.next_u64();
            events.push_back(ev);
            t += rng.next_exponential(rate);
        }
    }
    std::stable_sort(events.begin(), events.end(),
                     [](const MutationEvent& a, const MutationEvent& b) {
                         if (a.at != b.at) return a.at < b.at;
                         return static_cast<int>(a.kind) < static_cast<int>(b.kind);
                     });
    return events;
}

}  // namespace agsim

#endif  // AGSIM_NETMODEL_HPP
