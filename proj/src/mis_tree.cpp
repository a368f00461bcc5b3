#include "agmcts/mis_tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace agmcts {

NodeId MisTree::add_root(ParticleBelief belief, int depth, bool terminal) {
    MisStateNode s;
    s.depth = depth;
    s.terminal = terminal;
    s.belief = std::move(belief);
    states.push_back(std::move(s));
    return static_cast<NodeId>(states.size() - 1);
}

NodeId MisTree::add_action(NodeId state, const Action& a) {
    MisActionNode node;
    node.parent = state;
    node.action = a;
    actions.push_back(std::move(node));
    const auto id = static_cast<NodeId>(actions.size() - 1);
    auto& s = states[state];
    s.actions.push_back(id);
    s.folded_visits.push_back(0);
    s.folded_q.push_back(0.0);
    return id;
}

std::size_t MisTree::add_child(NodeId action, ChildEdge edge, ParticleBelief belief, int depth,
                               bool terminal, double leaf_value) {
    MisStateNode s;
    s.parent = action;
    s.depth = depth;
    s.terminal = terminal;
    s.value = leaf_value;
    s.belief = std::move(belief);
    states.push_back(std::move(s));
    edge.state = static_cast<NodeId>(states.size() - 1);
    edge.folded_count = 0;
    edge.folded_value = 0.0;
    auto& node = actions[action];
    node.children.push_back(std::move(edge));
    return node.children.size() - 1;
}

double MisTree::q_value(const MisActionNode& node) const {
    return node.reward_est + discount_ * node.future_value;
}

double MisTree::q_value(NodeId action) const { return q_value(actions[action]); }

void MisTree::fold(MisActionNode& node, double log_weight, std::int64_t n_old, double v_old,
                   std::int64_t n_new, double v_new, double reward_old, double reward_new) {
    const std::int64_t dn = n_new - n_old;
    node.visits += dn;
    if (log_weight == kNegInf) return;  // zero-weight child contributes nothing

    auto acc = LseAccumulator::from_log(node.log_eta, node.log_eta == kNegInf ? 0 : 1);
    if (dn != 0) acc.add(log_weight + std::log(std::abs(static_cast<double>(dn))), dn > 0 ? 1 : -1);
    if (acc.sign() <= 0) {
        node.log_eta = kNegInf;
        node.future_value = 0.0;
        node.reward_est = 0.0;
        return;
    }
    const double l_old = node.log_eta;
    const double l_new = acc.log_magnitude();
    const double keep = l_old == kNegInf ? 0.0 : std::exp(l_old - l_new);
    const double w = std::exp(log_weight - l_new);
    const double dv = static_cast<double>(n_new) * v_new - static_cast<double>(n_old) * v_old;
    const double dr = static_cast<double>(n_new) * reward_new - static_cast<double>(n_old) * reward_old;
    node.log_eta = l_new;
    node.future_value = keep * node.future_value + w * dv;
    node.reward_est = keep * node.reward_est + w * dr;
}

void MisTree::action_backprop(NodeId action, std::size_t edge_idx) {
    auto& node = actions[action];
    auto& edge = node.children.at(edge_idx);
    const auto& child = states[edge.state];
    const std::int64_t n_new = child.visits + 1;
    const double v_new = child.value;
    if (n_new == edge.folded_count && v_new == edge.folded_value) return;
    fold(node, edge.log_weight(), edge.folded_count, edge.folded_value, n_new, v_new, edge.reward,
         edge.reward);
    edge.folded_count = n_new;
    edge.folded_value = v_new;
}

void MisTree::state_backprop(NodeId state, std::size_t idx) {
    auto& s = states[state];
    const auto& a = actions[s.actions.at(idx)];
    const std::int64_t n_old = s.folded_visits[idx];
    const double q_old = s.folded_q[idx];
    const std::int64_t n_new = a.visits;
    const double q_new = q_value(a);
    if (n_new == n_old && q_new == q_old) return;
    const std::int64_t total = s.visits + (n_new - n_old);
    if (total <= 0) {
        s.value = 0.0;
    } else {
        s.value = (static_cast<double>(s.visits) * s.value + static_cast<double>(n_new) * q_new -
                   static_cast<double>(n_old) * q_old) /
                  static_cast<double>(total);
    }
    s.visits = total;
    s.folded_visits[idx] = n_new;
    s.folded_q[idx] = q_new;
}

void MisTree::terminal_state_backprop(NodeId state, double v, std::int64_t count) {
    auto& s = states[state];
    const std::int64_t n = s.visits + count;
    s.value += static_cast<double>(count) / static_cast<double>(n + 1) * (v - s.value);
    s.visits = n;
}

void MisTree::kill_subtree(NodeId state) {
    std::vector<NodeId> stack{state};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        auto& s = states[id];
        s.alive = false;
        for (NodeId a : s.actions) {
            auto& node = actions[a];
            for (auto& e : node.children) stack.push_back(e.state);
            node.children.clear();
            node.children.shrink_to_fit();
        }
        s.belief = {};
    }
}

void MisTree::remove_child(NodeId action, std::size_t edge_idx) {
    auto& node = actions[action];
    const double l_before = node.log_eta;
    {
        auto& edge = node.children.at(edge_idx);
        fold(node, edge.log_weight(), edge.folded_count, edge.folded_value, 0, 0.0, edge.reward,
             0.0);
        kill_subtree(edge.state);
    }
    node.children.erase(node.children.begin() + static_cast<std::ptrdiff_t>(edge_idx));
    if (node.children.empty()) {
        node.visits = 0;
        node.log_eta = kNegInf;
        node.future_value = 0.0;
        node.reward_est = 0.0;
        return;
    }
    if (node.log_eta == kNegInf || node.log_eta - l_before < std::log(kRecomputeRatio)) {
        rebuild_estimates(action);
    }
}

void MisTree::rebuild_estimates(NodeId action) {
    auto& node = actions[action];
    std::vector<double> logs;
    logs.reserve(node.children.size());
    std::int64_t visits = 0;
    for (const auto& e : node.children) {
        visits += e.folded_count;
        logs.push_back(e.folded_count > 0
                           ? e.log_weight() + std::log(static_cast<double>(e.folded_count))
                           : kNegInf);
    }
    node.visits = visits;
    const double l = log_sum_exp(logs);
    if (!std::isfinite(l)) {
        node.log_eta = kNegInf;
        node.future_value = 0.0;
        node.reward_est = 0.0;
        return;
    }
    double v = 0.0;
    double r = 0.0;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        if (logs[i] == kNegInf) continue;
        const double w = std::exp(logs[i] - l);
        v += w * node.children[i].folded_value;
        r += w * node.children[i].reward;
    }
    node.log_eta = l;
    node.future_value = v;
    node.reward_est = r;
}

SnmisValues MisTree::snmis_recompute(NodeId action) const {
    const auto& node = actions[action];
    if (node.children.empty()) throw TreeError("snmis_recompute on an action without children");
    std::vector<double> logs;
    logs.reserve(node.children.size());
    for (const auto& e : node.children) {
        const double n = static_cast<double>(states[e.state].visits + 1);
        logs.push_back(e.log_weight() + std::log(n));
    }
    const double l = log_sum_exp(logs);
    if (!std::isfinite(l)) throw TreeError("all importance weights are zero");
    SnmisValues out{l, 0.0, 0.0};
    for (std::size_t i = 0; i < logs.size(); ++i) {
        const double w = std::exp(logs[i] - l);
        out.future_value += w * states[node.children[i].state].value;
        out.reward_est += w * node.children[i].reward;
    }
    return out;
}

WeightsSummary MisTree::action_update(NodeId action, const Action& a_new, const TargetFn& target) {
    auto& node = actions[action];
    WeightsSummary out;
    for (auto& e : node.children) {
        target(e, a_new);
        e.has_score = false;
        out.log_weights.push_back(e.log_weight());
        out.max_log_weight = std::max(out.max_log_weight, e.log_weight());
    }
    node.action = a_new;
    rebuild_estimates(action);
    return out;
}

WeightsSummary MisTree::action_update_linearized(NodeId action, const Vec& delta,
                                                 const RewardFn& reward) {
    auto& node = actions[action];
    for (const auto& e : node.children) {
        if (!e.has_score) throw TreeError("missing-gradient-cache");
    }
    const Action a_new = node.action + delta;
    WeightsSummary out;
    for (auto& e : node.children) {
        e.log_target += e.score.dot(delta);
        e.has_score = false;
        if (reward) reward(e, a_new);
        out.log_weights.push_back(e.log_weight());
        out.max_log_weight = std::max(out.max_log_weight, e.log_weight());
    }
    node.action = a_new;
    rebuild_estimates(action);
    return out;
}

PruneResult MisTree::prune_and_flag_children(NodeId action, double t_del, double t_add) {
    PruneResult out;
    const double log_del = t_del > 0.0 ? std::log(t_del) : kNegInf;
    const double log_add = t_add > 0.0 ? std::log(t_add) : kNegInf;
    auto& node = actions[action];
    for (std::size_t i = node.children.size(); i-- > 0;) {
        if (node.children[i].log_weight() < log_del) {
            out.deleted.push_back(node.children[i].state);
            remove_child(action, i);
        }
    }
    std::reverse(out.deleted.begin(), out.deleted.end());
    bool all_low = true;
    for (const auto& e : actions[action].children) {
        if (!(e.log_weight() < log_add)) {
            all_low = false;
            break;
        }
    }
    out.force_sample = all_low;
    return out;
}

std::size_t MisTree::edge_index(NodeId action, NodeId child) const {
    const auto& c = actions[action].children;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i].state == child) return i;
    }
    throw TreeError("state is not a child of the action node");
}

std::size_t MisTree::action_index(NodeId state, NodeId action) const {
    const auto& a = states[state].actions;
    const auto it = std::find(a.begin(), a.end(), action);
    if (it == a.end()) throw TreeError("action is not a child of the state node");
    return static_cast<std::size_t>(it - a.begin());
}

void MisTree::propagate_to_root(NodeId state) {
    NodeId s = state;
    while (states[s].parent != kNoNode) {
        const NodeId a = states[s].parent;
        action_backprop(a, edge_index(a, s));
        const NodeId ps = actions[a].parent;
        state_backprop(ps, action_index(ps, a));
        s = ps;
    }
}

std::vector<std::string> MisTree::check_invariants() const {
    std::vector<std::string> out;
    auto fail = [&](const std::string& what, std::size_t id) {
        out.push_back(what + " at node " + std::to_string(id));
    };
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        if (!s.alive || s.actions.empty()) continue;
        std::int64_t sum = 0;
        for (std::size_t k = 0; k < s.actions.size(); ++k) {
            const auto& a = actions[s.actions[k]];
            sum += a.visits;
            if (s.folded_visits[k] != a.visits) fail("stale action fold", i);
        }
        if (sum != s.visits) fail("n(s) != sum n(s,a)", i);
    }
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const auto& a = actions[i];
        if (a.parent == kNoNode || !states[a.parent].alive) continue;
        std::int64_t sum = 0;
        bool supported = false;
        for (const auto& e : a.children) {
            sum += e.folded_count;
            if (e.folded_count != states[e.state].visits + 1) fail("stale child fold", i);
            if (e.log_weight() > kNegInf) supported = true;
        }
        if (sum != a.visits) fail("n(s,a) != sum n(s')+1", i);
        if (supported && !std::isfinite(a.log_eta)) fail("eta = 0 with live children", i);
        if (!std::isfinite(a.reward_est) || !std::isfinite(a.future_value)) {
            fail("non-finite estimate", i);
        }
    }
    return out;
}

std::string MisTree::dump() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        if (!s.alive) continue;
        os << "S " << i << " parent=" << s.parent << " n=" << s.visits << " V=" << s.value
           << " depth=" << s.depth << (s.terminal ? " terminal" : "") << '\n';
        for (NodeId a : s.actions) {
            const auto& node = actions[a];
            os << "  A " << a << " n=" << node.visits << " Q=" << q_value(node)
               << " log_eta=" << node.log_eta << " a=[";
            for (Eigen::Index k = 0; k < node.action.size(); ++k) {
                os << (k ? "," : "") << node.action[k];
            }
            os << "]\n";
            for (const auto& e : node.children) {
                os << "    -> S " << e.state << " log_w=" << e.log_weight()
                   << " r=" << e.reward << " folded=(" << e.folded_count << ","
                   << e.folded_value << ")\n";
            }
        }
    }
    return os.str();
}

}  // namespace agmcts
