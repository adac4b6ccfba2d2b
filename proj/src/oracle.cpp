#include "inferum/oracle.hpp"

#include <limits>
#include <unordered_map>

#include "inferum/registry.hpp"

namespace inferum {

namespace {

struct Node {
    StatePtr state;
    double return_so_far;
};

void enumerate_joint(int num_agents, int action_count, std::vector<JointAction>& out) {
    JointAction a;
    a.per_agent.assign(num_agents, 0);
    while (true) {
        out.push_back(a);
        int i = 0;
        while (i < num_agents) {
            if (++a.per_agent[i] < action_count)
                break;
            a.per_agent[i] = 0;
            ++i;
        }
        if (i == num_agents)
            return;
    }
}

} // namespace

double oracle_best_return(const Environment& env, const InstanceSpec& instance, long max_nodes) {
    std::vector<JointAction> joint_actions;
    enumerate_joint(env.descriptor().num_agents, env.descriptor().action_count, joint_actions);

    std::unordered_map<std::string, Node> layer;
    {
        auto [state, obs] = env.reset(instance);
        (void)obs;
        std::string k = state->key();
        layer.emplace(std::move(k), Node{std::move(state), 0.0});
    }

    double best_final = -std::numeric_limits<double>::infinity();
    bool any_final = false;
    long expansions = 0;

    while (!layer.empty()) {
        std::unordered_map<std::string, Node> next;
        for (auto& [key, node] : layer) {
            (void)key;
            for (const auto& action : joint_actions) {
                if (++expansions > max_nodes)
                    throw budget_exceeded_error("oracle_best_return: exceeded max_nodes = " +
                                                std::to_string(max_nodes));
                auto [ns, out] = env.step(*node.state, action);
                const double acc = node.return_so_far + out.reward;
                if (out.done) {
                    if (!any_final || acc > best_final) {
                        best_final = acc;
                        any_final = true;
                    }
                    continue;
                }
                std::string nk = ns->key();
                auto it = next.find(nk);
                if (it == next.end())
                    next.emplace(std::move(nk), Node{std::move(ns), acc});
                else if (acc > it->second.return_so_far)
                    it->second.return_so_far = acc;
            }
        }
        layer = std::move(next);
    }

    if (!any_final)
        throw std::logic_error("oracle_best_return: no terminal state reached");
    return best_final;
}

double oracle_best_return(const InstanceSpec& instance, long max_nodes) {
    return oracle_best_return(*lookup_task(instance.task_id), instance, max_nodes);
}

} // namespace inferum
