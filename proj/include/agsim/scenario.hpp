#ifndef AGSIM_SCENARIO_HPP
#define AGSIM_SCENARIO_HPP

#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "agsim/grounding.hpp"
#include "agsim/pipeline.hpp"

namespace agsim {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Strict helpers: unknown fields are rejected, types are checked
// ---------------------------------------------------------------------------

namespace scenario_detail {

inline void check_keys(const json& j, const std::string& ctx,
                       const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ScenarioInvalidError(ctx + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ScenarioInvalidError("unknown field '" + it.key() + "' in " + ctx);
}

inline const json& require(const json& j, const std::string& ctx, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end())
        throw ScenarioInvalidError(ctx + " is missing required field '" + key + "'");
    return *it;
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ScenarioInvalidError("field '" + key + "' has the wrong type");
    }
}

template <typename T>
T as(const json& j, const std::string& ctx) {
    try {
        return j.get<T>();
    } catch (const json::exception&) {
        throw ScenarioInvalidError(ctx + " has the wrong type");
    }
}

}  // namespace scenario_detail

// ---------------------------------------------------------------------------
// Network section
// ---------------------------------------------------------------------------

inline NetworkModel load_network(const json& j) {
    using namespace scenario_detail;
    check_keys(j, "network", {"subnets", "hosts", "firewall_rules"});
    NetworkModel m;
    for (const auto& s : require(j, "network", "subnets"))
        m.subnets.push_back(as<std::string>(s, "subnet id"));
    for (const auto& hj : require(j, "network", "hosts")) {
        check_keys(hj, "host", {"id", "subnet", "services", "vulns", "tags"});
        Host h;
        h.id = as<std::string>(require(hj, "host", "id"), "host id");
        h.subnet = as<std::string>(require(hj, "host", "subnet"), "host subnet");
        for (const auto& s : get_or<std::vector<json>>(hj, "services", {}))
            h.services.push_back(as<std::string>(s, "service id"));
        for (const auto& t : get_or<std::vector<json>>(hj, "tags", {}))
            h.tags.insert(host_tag_from_string(as<std::string>(t, "host tag")));
        if (hj.contains("vulns")) {
            for (const auto& vj : hj.at("vulns")) {
                check_keys(vj, "vuln",
                           {"id", "service", "cvss", "precondition", "postcondition"});
                Vulnerability v;
                v.id = as<std::string>(require(vj, "vuln", "id"), "vuln id");
                v.service = as<std::string>(require(vj, "vuln", "service"), "vuln service");
                try {
                    v.cvss = parse_cvss(
                        as<std::string>(require(vj, "vuln", "cvss"), "cvss vector"));
                } catch (const std::invalid_argument& e) {
                    throw ScenarioInvalidError("vuln " + v.id + ": " + e.what());
                }
                v.precondition =
                    privilege_from_string(get_or<std::string>(vj, "precondition", "user"));
                v.postcondition =
                    privilege_from_string(get_or<std::string>(vj, "postcondition", "root"));
                h.vulns.push_back(v);
            }
        }
        m.hosts.push_back(h);
    }
    for (const auto& rj : get_or<std::vector<json>>(j, "firewall_rules", {})) {
        check_keys(rj, "firewall_rule", {"src", "dst", "service", "action", "monitored"});
        FirewallRule r;
        r.src = as<std::string>(require(rj, "firewall_rule", "src"), "rule src");
        r.dst = as<std::string>(require(rj, "firewall_rule", "dst"), "rule dst");
        r.service = scenario_detail::get_or<std::string>(rj, "service", "*");
        std::string action =
            as<std::string>(require(rj, "firewall_rule", "action"), "rule action");
        if (action != "allow" && action != "deny")
            throw ScenarioInvalidError("rule action must be allow or deny, got " + action);
        r.allow = action == "allow";
        r.monitored = get_or<bool>(rj, "monitored", false);
        m.firewall_rules.push_back(r);
    }
    validate_model(m);
    return m;
}

// ---------------------------------------------------------------------------
// Full scenario
// ---------------------------------------------------------------------------

struct Scenario {
    int format_version = 1;
    std::string name;
    NetworkModel network;
    PipelineSpec pipeline;
    bool has_task = false;
    std::optional<GroundingConfig> grounding;
    std::vector<Tick> sweep_t_refresh;      // optional sweep grid
    std::vector<double> sweep_rate_scales;  // optional sweep grid
    std::vector<std::uint64_t> seeds = {1};
    std::string canonical_text;

    bool has_sweep() const { return !sweep_t_refresh.empty(); }

    std::uint64_t hash() const { return fnv1a(fnv1a_init(), canonical_text); }
};

inline Scenario load_scenario_json(const json& root) {
    using namespace scenario_detail;
    check_keys(root, "scenario",
               {"format_version", "name", "network", "generator", "terrain", "adversary",
                "task", "solver", "grounding", "seeds"});
    Scenario sc;
    sc.format_version = as<int>(require(root, "scenario", "format_version"), "format_version");
    if (sc.format_version != 1)
        throw ScenarioInvalidError("unsupported format_version " +
                                   std::to_string(sc.format_version));
    sc.name = get_or<std::string>(root, "name", "");
    sc.network = load_network(require(root, "scenario", "network"));
    sc.canonical_text = root.dump();

    if (root.contains("generator")) {
        const json& g = root.at("generator");
        check_keys(g, "generator", {"kind", "monotone", "max_hosts", "max_nodes"});
        std::string kind = get_or<std::string>(g, "kind", "exploit-dep");
        if (kind == "exploit-dep")
            sc.pipeline.generator.kind = AttackGraphKind::ExploitDependency;
        else if (kind == "state-enum")
            sc.pipeline.generator.kind = AttackGraphKind::StateEnumeration;
        else
            throw ScenarioInvalidError("generator kind must be exploit-dep or state-enum");
        sc.pipeline.generator.monotone = get_or<bool>(g, "monotone", true);
        sc.pipeline.generator.caps.max_hosts = get_or<int>(g, "max_hosts", 12);
        sc.pipeline.generator.caps.max_nodes =
            static_cast<std::size_t>(get_or<std::int64_t>(g, "max_nodes", 200000));
    }

    if (root.contains("terrain")) {
        const json& t = root.at("terrain");
        check_keys(t, "terrain",
                   {"obstacle_penalty", "key_terrain", "proximity_bonus", "concealment"});
        sc.pipeline.terrain.obstacle_penalty = get_or<double>(t, "obstacle_penalty", 0.0);
        sc.pipeline.terrain.proximity_bonus = get_or<double>(t, "proximity_bonus", 0.0);
        for (const auto& h : get_or<std::vector<json>>(t, "key_terrain", {}))
            sc.pipeline.terrain.key_terrain.insert(as<std::string>(h, "key_terrain host"));
        if (t.contains("concealment")) {
            if (!t.at("concealment").is_object())
                throw ScenarioInvalidError("terrain concealment must be an object");
            for (auto it = t.at("concealment").begin(); it != t.at("concealment").end(); ++it)
                sc.pipeline.terrain.concealment[it.key()] =
                    as<double>(it.value(), "concealment probability");
        }
        sc.pipeline.terrain.validate();
    }

    if (root.contains("adversary")) {
        const json& a = root.at("adversary");
        check_keys(a, "adversary", {"allowed_techniques", "skill", "infrastructure_entry"});
        if (a.contains("allowed_techniques")) {
            sc.pipeline.adversary.allowed_techniques.clear();
            for (const auto& t : a.at("allowed_techniques"))
                sc.pipeline.adversary.allowed_techniques.insert(
                    as<std::string>(t, "technique tag"));
        }
        sc.pipeline.adversary.skill = get_or<double>(a, "skill", 1.0);
        if (a.contains("infrastructure_entry"))
            sc.pipeline.adversary.infrastructure_entry =
                as<std::string>(a.at("infrastructure_entry"), "infrastructure_entry");
        sc.pipeline.adversary.validate();
    }

    if (root.contains("task")) {
        const json& t = root.at("task");
        check_keys(t, "task",
                   {"kind", "source", "target", "targets", "data_store", "exit_node",
                    "terminal_reward", "step_penalty", "goal_privilege"});
        TaskSpec& task = sc.pipeline.task;
        std::string kind = as<std::string>(require(t, "task", "kind"), "task kind");
        if (kind == "pathing") task.kind = TaskKind::Pathing;
        else if (kind == "crown_jewel") task.kind = TaskKind::CrownJewel;
        else if (kind == "exfiltration") task.kind = TaskKind::Exfiltration;
        else throw ScenarioInvalidError("task kind must be pathing, crown_jewel or exfiltration");

        task.source = get_or<std::string>(
            t, "source", effective_entry(sc.network, sc.pipeline.adversary));
        if (t.contains("target"))
            task.targets = {as<std::string>(t.at("target"), "task target")};
        for (const auto& h : get_or<std::vector<json>>(t, "targets", {}))
            task.targets.push_back(as<std::string>(h, "task target"));
        task.data_store = get_or<std::string>(t, "data_store", "");
        task.exit_node = get_or<std::string>(t, "exit_node", "");

        // defaults resolved from host tags
        if (task.kind == TaskKind::CrownJewel && task.targets.empty())
            task.targets = sc.network.hosts_with_tag(HostTag::CrownJewel);
        if (task.kind == TaskKind::Exfiltration) {
            if (task.data_store.empty()) {
                auto tagged = sc.network.hosts_with_tag(HostTag::DataStore);
                if (!tagged.empty()) task.data_store = tagged.front();
            }
            if (task.exit_node.empty()) {
                auto tagged = sc.network.hosts_with_tag(HostTag::ExitNode);
                if (!tagged.empty()) task.exit_node = tagged.front();
            }
        }
        task.goal_privilege = privilege_from_string(get_or<std::string>(
            t, "goal_privilege", task.kind == TaskKind::CrownJewel ? "root" : "user"));
        task.terminal_reward = get_or<double>(t, "terminal_reward", 10.0);
        task.step_penalty = get_or<double>(t, "step_penalty", -0.01);
        task.validate();
        sc.has_task = true;
    }

    if (root.contains("solver")) {
        const json& s = root.at("solver");
        check_keys(s, "solver", {"epsilon", "discount", "q_learning"});
        sc.pipeline.solver.epsilon = get_or<double>(s, "epsilon", 1e-6);
        sc.pipeline.solver.discount = get_or<double>(s, "discount", 0.95);
        if (sc.pipeline.solver.epsilon <= 0.0)
            throw ScenarioInvalidError("solver epsilon must be positive");
        if (!(sc.pipeline.solver.discount > 0.0 && sc.pipeline.solver.discount < 1.0))
            throw ScenarioInvalidError("solver discount must lie in (0,1)");
        if (s.contains("q_learning")) {
            const json& q = s.at("q_learning");
            check_keys(q, "q_learning",
                       {"enabled", "episodes", "alpha", "eps_start", "eps_end",
                        "eps_decay_fraction", "max_steps"});
            sc.pipeline.solver.run_q_learning = get_or<bool>(q, "enabled", true);
            sc.pipeline.solver.q_params.episodes = get_or<int>(q, "episodes", 2000);
            sc.pipeline.solver.q_params.alpha = get_or<double>(q, "alpha", 0.1);
            sc.pipeline.solver.q_params.eps_start = get_or<double>(q, "eps_start", 1.0);
            sc.pipeline.solver.q_params.eps_end = get_or<double>(q, "eps_end", 0.05);
            sc.pipeline.solver.q_params.eps_decay_fraction =
                get_or<double>(q, "eps_decay_fraction", 0.8);
            sc.pipeline.solver.q_params.max_steps = get_or<int>(q, "max_steps", 200);
        }
    }

    if (root.contains("grounding")) {
        const json& g = root.at("grounding");
        check_keys(g, "grounding",
                   {"t_agent", "t_refresh", "horizon", "refresh_delay", "rates", "seeds",
                    "sweep"});
        GroundingConfig cfg;
        cfg.t_agent = get_or<std::int64_t>(g, "t_agent", 1);
        cfg.t_refresh = get_or<std::int64_t>(g, "t_refresh", 10);
        cfg.horizon = get_or<std::int64_t>(g, "horizon", 100);
        cfg.refresh_delay = get_or<std::int64_t>(g, "refresh_delay", 0);
        if (g.contains("rates")) {
            const json& r = g.at("rates");
            check_keys(r, "rates",
                       {"add_host", "remove_host", "add_vuln", "remove_vuln",
                        "flip_firewall_rule"});
            cfg.rates.add_host = get_or<double>(r, "add_host", 0.0);
            cfg.rates.remove_host = get_or<double>(r, "remove_host", 0.0);
            cfg.rates.add_vuln = get_or<double>(r, "add_vuln", 0.0);
            cfg.rates.remove_vuln = get_or<double>(r, "remove_vuln", 0.0);
            cfg.rates.flip_firewall_rule = get_or<double>(r, "flip_firewall_rule", 0.0);
            for (int k = 0; k < kMutationKindCount; ++k)
                if (cfg.rates.rate(static_cast<MutationKind>(k)) < 0.0)
                    throw ScenarioInvalidError("mutation rates must be >= 0");
        }
        if (g.contains("seeds")) {
            cfg.seeds.clear();
            for (const auto& s : g.at("seeds"))
                cfg.seeds.push_back(as<std::uint64_t>(s, "grounding seed"));
        }
        if (g.contains("sweep")) {
            const json& sw = g.at("sweep");
            check_keys(sw, "sweep", {"t_refresh", "rate_scale"});
            for (const auto& v : get_or<std::vector<json>>(sw, "t_refresh", {}))
                sc.sweep_t_refresh.push_back(as<std::int64_t>(v, "sweep t_refresh"));
            for (const auto& v : get_or<std::vector<json>>(sw, "rate_scale", {}))
                sc.sweep_rate_scales.push_back(as<double>(v, "sweep rate_scale"));
            if (sc.sweep_t_refresh.empty() != sc.sweep_rate_scales.empty())
                throw ScenarioInvalidError("sweep needs both t_refresh and rate_scale grids");
        }
        cfg.validate();
        sc.grounding = cfg;
    }

    if (root.contains("seeds")) {
        sc.seeds.clear();
        for (const auto& s : root.at("seeds"))
            sc.seeds.push_back(as<std::uint64_t>(s, "seed"));
        if (sc.seeds.empty()) throw ScenarioInvalidError("seeds must be nonempty");
    }
    return sc;
}

inline Scenario load_scenario_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioInvalidError(std::string("scenario is not valid JSON: ") + e.what());
    }
    return load_scenario_json(root);
}

inline Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioInvalidError("cannot open scenario file " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_scenario_text(text);
}

}  // namespace agsim

#endif  // AGSIM_SCENARIO_HPP
