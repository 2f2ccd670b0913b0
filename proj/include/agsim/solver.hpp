#ifndef AGSIM_SOLVER_HPP
#define AGSIM_SOLVER_HPP

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "agsim/mdp.hpp"

namespace agsim {

struct ValueFunction {
    std::map<StateId, double> v;

    double at(StateId s) const {
        auto it = v.find(s);
        return it == v.end() ? 0.0 : it->second;
    }
};

// π: state -> action; only defined where the state has admissible actions
using Policy = std::map<StateId, ActionId>;

struct QTable {
    std::map<std::pair<StateId, ActionId>, double> q;

    double at(StateId s, ActionId a) const {
        auto it = q.find({s, a});
        return it == q.end() ? 0.0 : it->second;
    }
};

// ---------------------------------------------------------------------------
// Value iteration (synchronous sweeps). Residuals shrink by at least the
// discount factor each sweep, so convergence is unconditional for
// discount < 1, which the MDP constructor enforces.
// ---------------------------------------------------------------------------

struct VIResult {
    ValueFunction value;
    Policy policy;
    std::vector<double> residuals;  // one per sweep
    int sweeps = 0;
};

namespace detail {

inline double q_value(const LayeredMdp& m, const SaEntry& e, const ValueFunction& vf) {
    double q = m.expected_reward(e);
    for (const auto& t : e.transitions) q += m.discount * t.prob * vf.at(t.succ);
    return q;
}

// argmax over the row; ties go to the lowest action id (rows are sorted)
inline const SaEntry* greedy_entry(const std::vector<SaEntry>& row, const LayeredMdp& m,
                                   const ValueFunction& vf) {
    const SaEntry* best = nullptr;
    double best_q = 0.0;
    for (const auto& e : row) {
        double q = q_value(m, e, vf);
        if (!best || q > best_q) {
            best = &e;
            best_q = q;
        }
    }
    return best;
}

}  // namespace detail

inline VIResult value_iteration(const LayeredMdp& m, double epsilon,
                                int max_sweeps = 1000000,
                                const ValueFunction* warm = nullptr) {
    if (epsilon <= 0.0) throw Error("value_iteration epsilon must be positive");
    VIResult res;
    for (StateId s : m.states)
        res.value.v[s] = warm && !m.is_terminal(s) ? warm->at(s) : 0.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        ValueFunction next = res.value;
        double residual = 0.0;
        for (StateId s : m.states) {
            if (m.is_terminal(s)) continue;  // terminals keep value 0
            const auto& row = m.actions_at(s);
            if (row.empty()) continue;
            double best = detail::q_value(m, row.front(), res.value);
            for (std::size_t i = 1; i < row.size(); ++i)
                best = std::max(best, detail::q_value(m, row[i], res.value));
            residual = std::max(residual, std::abs(best - res.value.at(s)));
            next.v[s] = best;
        }
        res.value = std::move(next);
        res.residuals.push_back(residual);
        res.sweeps = sweep + 1;
        if (residual < epsilon) break;
    }
    for (StateId s : m.states) {
        if (m.is_terminal(s)) continue;
        const auto& row = m.actions_at(s);
        if (row.empty()) continue;
        res.policy[s] = detail::greedy_entry(row, m, res.value)->action;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Tabular Q-learning with epsilon-greedy exploration. Deterministic for a
// fixed seed.
// ---------------------------------------------------------------------------

struct QLearnParams {
    int episodes = 2000;
    double alpha = 0.1;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_decay_fraction = 0.8;  // linear decay over this share of episodes
    int max_steps = 200;
};

struct QLearnResult {
    QTable q;
    std::vector<double> returns;  // discounted return per training episode
};

namespace detail {

inline double epsilon_at(const QLearnParams& p, int episode) {
    double span = p.eps_decay_fraction * p.episodes;
    if (span <= 0.0) return p.eps_end;
    double f = static_cast<double>(episode) / span;
    if (f >= 1.0) return p.eps_end;
    return p.eps_start + f * (p.eps_end - p.eps_start);
}

inline const SaEntry* greedy_by_q(const std::vector<SaEntry>& row, StateId s,
                                  const QTable& q) {
    const SaEntry* best = nullptr;
    double best_q = 0.0;
    for (const auto& e : row) {
        double val = q.at(s, e.action);
        if (!best || val > best_q) {
            best = &e;
            best_q = val;
        }
    }
    return best;
}

inline StateId sample_successor(const SaEntry& e, Rng& rng) {
    double u = rng.next_double();
    double acc = 0.0;
    for (const auto& t : e.transitions) {
        acc += t.prob;
        if (u < acc) return t.succ;
    }
    return e.transitions.back().succ;
}

inline double best_next_q(const LayeredMdp& m, StateId s, const QTable& q) {
    if (m.is_terminal(s)) return 0.0;
    const auto& row = m.actions_at(s);
    if (row.empty()) return 0.0;
    double best = q.at(s, row.front().action);
    for (std::size_t i = 1; i < row.size(); ++i)
        best = std::max(best, q.at(s, row[i].action));
    return best;
}

}  // namespace detail

inline QLearnResult q_learning(const LayeredMdp& m, const QLearnParams& params,
                               std::uint64_t seed, const QTable& initial = {}) {
    QLearnResult res;
    res.q = initial;
    Rng rng(seed);
    for (int episode = 0; episode < params.episodes; ++episode) {
        double eps = detail::epsilon_at(params, episode);
        StateId s = m.initial_state;
        double ret = 0.0;
        double gamma_t = 1.0;
        for (int step = 0; step < params.max_steps; ++step) {
            if (m.is_terminal(s)) break;
            const auto& row = m.actions_at(s);
            if (row.empty()) break;
            const SaEntry* e;
            if (rng.next_double() < eps)
                e = &row[rng.next_below(row.size())];
            else
                e = detail::greedy_by_q(row, s, res.q);
            StateId succ = detail::sample_successor(*e, rng);
            double r = e->base_reward + m.entry_bonus(succ);
            double target = r + m.discount * detail::best_next_q(m, succ, res.q);
            double& q = res.q.q[{s, e->action}];
            q += params.alpha * (target - q);
            ret += gamma_t * r;
            gamma_t *= m.discount;
            s = succ;
        }
        res.returns.push_back(ret);
    }
    return res;
}

inline Policy greedy_policy(const LayeredMdp& m, const QTable& q) {
    Policy pi;
    for (StateId s : m.states) {
        if (m.is_terminal(s)) continue;
        const auto& row = m.actions_at(s);
        if (row.empty()) continue;
        pi[s] = detail::greedy_by_q(row, s, q)->action;
    }
    return pi;
}

// ---------------------------------------------------------------------------
// Brute-force oracle: depth-limited expectimax with memoization. Exact on
// small MDPs; refuses anything beyond desk scale.
// ---------------------------------------------------------------------------

inline double brute_force_return(const LayeredMdp& m, int horizon) {
    if (m.states.size() > 50)
        throw OracleScaleExceededError("expectimax oracle capped at 50 states, got " +
                                       std::to_string(m.states.size()));
    if (horizon > 20)
        throw OracleScaleExceededError("expectimax oracle capped at horizon 20, got " +
                                       std::to_string(horizon));
    std::map<std::pair<StateId, int>, double> memo;
    auto rec = [&](auto&& self, StateId s, int depth) -> double {
        if (depth == 0 || m.is_terminal(s)) return 0.0;
        const auto& row = m.actions_at(s);
        if (row.empty()) return 0.0;
        auto it = memo.find({s, depth});
        if (it != memo.end()) return it->second;
        double best = 0.0;
        bool first = true;
        for (const auto& e : row) {
            double q = m.expected_reward(e);
            for (const auto& t : e.transitions)
                q += m.discount * t.prob * self(self, t.succ, depth - 1);
            if (first || q > best) best = q;
            first = false;
        }
        memo[{s, depth}] = best;
        return best;
    };
    return rec(rec, m.initial_state, horizon);
}

// ---------------------------------------------------------------------------
// Rollouts
// ---------------------------------------------------------------------------

struct EpisodeTrace {
    std::vector<StateId> states;     // s1, s2, ...
    std::vector<ActionId> actions;   // a1, a2, ...
    std::vector<double> rewards;     // r2, r3, ...
    std::uint64_t seed = 0;
    double total_return = 0.0;       // discounted
    bool reached_terminal = false;
};

inline EpisodeTrace rollout(const LayeredMdp& m, const Policy& pi, std::uint64_t seed,
                            int horizon) {
    EpisodeTrace trace;
    trace.seed = seed;
    Rng rng(seed);
    StateId s = m.initial_state;
    trace.states.push_back(s);
    double gamma_t = 1.0;
    for (int step = 0; step < horizon; ++step) {
        if (m.is_terminal(s)) {
            trace.reached_terminal = true;
            break;
        }
        auto it = pi.find(s);
        if (it == pi.end()) break;
        const SaEntry* e = m.find_entry(s, it->second);
        if (!e) break;
        StateId succ = detail::sample_successor(*e, rng);
        double r = e->base_reward + m.entry_bonus(succ);
        trace.actions.push_back(e->action);
        trace.rewards.push_back(r);
        trace.total_return += gamma_t * r;
        gamma_t *= m.discount;
        s = succ;
        trace.states.push_back(s);
    }
    if (m.is_terminal(s)) trace.reached_terminal = true;
    return trace;
}

// ---------------------------------------------------------------------------
// Warm-start transfer: copy Q values into a new task MDP wherever the
// state map lands on an admissible pair; everything else starts at zero.
// States are matched by canonical key when no explicit map is given,
// actions always by key.
// ---------------------------------------------------------------------------

inline std::map<StateId, StateId> shared_state_map(const LayeredMdp& src,
                                                   const LayeredMdp& dst) {
    std::map<std::string, StateId> dst_by_key;
    for (StateId s : dst.states) dst_by_key[dst.state_keys[static_cast<std::size_t>(s)]] = s;
    std::map<StateId, StateId> out;
    for (StateId s : src.states) {
        auto it = dst_by_key.find(src.state_keys[static_cast<std::size_t>(s)]);
        if (it != dst_by_key.end()) out[s] = it->second;
    }
    return out;
}

inline QTable warm_start(const QTable& q_src, const LayeredMdp& m_src,
                         const LayeredMdp& m_dst,
                         std::optional<std::map<StateId, StateId>> state_map = {}) {
    std::map<StateId, StateId> map =
        state_map ? *state_map : shared_state_map(m_src, m_dst);
    std::map<std::string, ActionId> dst_actions;
    for (const auto& a : m_dst.actions) dst_actions[a.key] = a.id;

    QTable out;
    for (const auto& [sa, val] : q_src.q) {
        auto ms = map.find(sa.first);
        if (ms == map.end()) continue;
        const auto& src_action = m_src.actions[static_cast<std::size_t>(sa.second)];
        auto ma = dst_actions.find(src_action.key);
        if (ma == dst_actions.end()) continue;
        if (!m_dst.find_entry(ms->second, ma->second)) continue;
        out.q[{ms->second, ma->second}] = val;
    }
    return out;
}

// First training episode whose return reaches the threshold; episode count
// when none does.
inline int episodes_to_threshold(const std::vector<double>& returns, double threshold) {
    for (std::size_t i = 0; i < returns.size(); ++i)
        if (returns[i] >= threshold) return static_cast<int>(i);
    return static_cast<int>(returns.size());
}

// ---------------------------------------------------------------------------
// Reward-loop detection: walk the policy's success path from the initial
// state; report true when it revisits a state having accumulated positive
// reward since the first visit, i.e. the policy harvests a reward cycle.
// ---------------------------------------------------------------------------

inline bool detect_cycle_exploit(const LayeredMdp& m, const Policy& pi, int horizon) {
    std::map<StateId, std::pair<int, double>> first_seen;  // state -> (step, cum reward)
    StateId s = m.initial_state;
    double cum = 0.0;
    for (int step = 0; step < horizon; ++step) {
        auto seen = first_seen.find(s);
        if (seen != first_seen.end())
            return cum - seen->second.second > 1e-9;
        first_seen[s] = {step, cum};
        if (m.is_terminal(s)) return false;
        auto it = pi.find(s);
        if (it == pi.end()) return false;
        const SaEntry* e = m.find_entry(s, it->second);
        if (!e) return false;
        cum += e->base_reward + m.entry_bonus(e->success_state);
        s = e->success_state;
    }
    return false;
}

// States reachable from the initial state when following the policy
// (both success and failure outcomes of the chosen action).
inline std::set<StateId> policy_reachable_states(const LayeredMdp& m, const Policy& pi) {
    std::set<StateId> seen{m.initial_state};
    std::deque<StateId> q{m.initial_state};
    while (!q.empty()) {
        StateId s = q.front();
        q.pop_front();
        if (m.is_terminal(s)) continue;
        auto it = pi.find(s);
        if (it == pi.end()) continue;
        const SaEntry* e = m.find_entry(s, it->second);
        if (!e) continue;
        for (const auto& t : e->transitions)
            if (t.prob > 0.0 && seen.insert(t.succ).second) q.push_back(t.succ);
    }
    return seen;
}

}  // namespace agsim

#endif  // AGSIM_SOLVER_HPP
