#ifndef AGSIM_MODELGEN_HPP
#define AGSIM_MODELGEN_HPP

#include <string>
#include <vector>

#include "agsim/netmodel.hpp"

namespace agsim {

// Parametric model families for growth studies and property tests.

// n hosts on one subnet, each running one service with one user-level
// vulnerability. Every host can attack every other, so compromise
// patterns enumerate subsets.
inline NetworkModel fully_connected_family(int n) {
    NetworkModel m;
    m.subnets = {"lan"};
    for (int i = 0; i < n; ++i) {
        Host h;
        h.id = "h" + std::to_string(i);
        h.subnet = "lan";
        h.services = {"svc"};
        Vulnerability v;
        v.id = "CVE-FC-" + std::to_string(i);
        v.service = "svc";
        v.cvss = parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
        v.precondition = PrivilegeLevel::User;
        v.postcondition = PrivilegeLevel::User;
        h.vulns = {v};
        if (i == 0) h.tags.insert(HostTag::Entry);
        if (i == n - 1) h.tags.insert(HostTag::CrownJewel);
        m.hosts.push_back(h);
    }
    return m;
}

// n hosts in a line of subnets, each only able to attack its successor.
// Host i carries one vulnerability requiring root on the previous
// foothold, so generation walks the chain one wave at a time.
inline NetworkModel chain_family(int n) {
    NetworkModel m;
    for (int i = 0; i < n; ++i) m.subnets.push_back("s" + std::to_string(i));
    for (int i = 0; i < n; ++i) {
        Host h;
        h.id = "h" + std::to_string(i);
        h.subnet = "s" + std::to_string(i);
        h.services = {"svc"};
        Vulnerability v;
        v.id = "CVE-CH-" + std::to_string(i);
        v.service = "svc";
        v.cvss = parse_cvss("AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
        v.precondition = i == 0 ? PrivilegeLevel::User : PrivilegeLevel::Root;
        v.postcondition = PrivilegeLevel::Root;
        h.vulns = {v};
        if (i == 0) h.tags.insert(HostTag::Entry);
        if (i == n - 1) h.tags.insert(HostTag::CrownJewel);
        m.hosts.push_back(h);
        if (i > 0) {
            FirewallRule r;
            r.src = "s" + std::to_string(i - 1);
            r.dst = "s" + std::to_string(i);
            r.service = "svc";
            r.allow = true;
            m.firewall_rules.push_back(r);
        }
    }
    return m;
}

// Degenerate family: one entry host regardless of n.
inline NetworkModel single_host_family(int) {
    NetworkModel m;
    m.subnets = {"lan"};
    Host h;
    h.id = "h0";
    h.subnet = "lan";
    h.services = {"svc"};
    h.tags.insert(HostTag::Entry);
    m.hosts.push_back(h);
    return m;
}

inline NetworkModel family_model(const std::string& family, int n) {
    if (family == "fully-connected") return fully_connected_family(n);
    if (family == "chain") return chain_family(n);
    if (family == "single-host") return single_host_family(n);
    throw ScenarioInvalidError("unknown model family: " + family);
}

// Seeded random model with up to max_hosts hosts spread over 1-3 subnets.
// Always valid: entry tagged, vulns bound to services.
inline NetworkModel random_model(std::uint64_t seed, int max_hosts = 8) {
    Rng rng(seed);
    NetworkModel m;
    int n_subnets = 1 + static_cast<int>(rng.next_below(3));
    for (int i = 0; i < n_subnets; ++i) m.subnets.push_back("s" + std::to_string(i));

    int n_hosts = 2 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(
                          std::max(1, max_hosts - 1))));
    const std::vector<ServiceId> service_pool = {"http", "ssh", "smb", "db"};
    for (int i = 0; i < n_hosts; ++i) {
        Host h;
        h.id = "h" + std::to_string(i);
        h.subnet = m.subnets[rng.next_below(m.subnets.size())];
        int n_svcs = 1 + static_cast<int>(rng.next_below(2));
        for (int s = 0; s < n_svcs; ++s) {
            ServiceId svc = service_pool[rng.next_below(service_pool.size())];
            if (!h.runs(svc)) h.services.push_back(svc);
        }
        int n_vulns = static_cast<int>(rng.next_below(3));
        for (int v = 0; v < n_vulns; ++v) {
            Vulnerability vuln = detail::synth_vuln(rng.next_u64(),
                                                    h.services[rng.next_below(h.services.size())]);
            vuln.id = "CVE-R-" + std::to_string(i) + "-" + std::to_string(v);
            vuln.precondition =
                rng.next_below(3) == 0 ? PrivilegeLevel::Root : PrivilegeLevel::User;
            h.vulns.push_back(vuln);
        }
        if (i == 0) {
            h.tags.insert(HostTag::Entry);
            if (h.vulns.empty())
                h.vulns.push_back(detail::synth_vuln(rng.next_u64(), h.services[0]));
        }
        m.hosts.push_back(h);
    }

    // random allow rules between subnet pairs, some monitored
    for (const auto& a : m.subnets) {
        for (const auto& b : m.subnets) {
            if (a == b) continue;
            if (rng.next_below(2) == 0) {
                FirewallRule r;
                r.src = a;
                r.dst = b;
                r.service = rng.next_below(3) == 0
                                ? "*"
                                : service_pool[rng.next_below(service_pool.size())];
                r.allow = true;
                r.monitored = rng.next_below(4) == 0;
                m.firewall_rules.push_back(r);
            }
        }
    }
    validate_model(m);
    return m;
}

}  // namespace agsim

#endif  // AGSIM_MODELGEN_HPP
