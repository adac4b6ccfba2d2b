#include "inferum/connector.hpp"

#include <algorithm>
#include <unordered_map>

#include "inferum/rng.hpp"

namespace inferum {

namespace {

struct ConnectorState final : EnvState {
    std::vector<Cell> heads;
    std::vector<Cell> goals;
    std::vector<uint8_t> connected;
    std::vector<uint8_t> blocked; // grid cells turned into obstacles (laid paths)
    int t = 0;
    bool done = false;

    std::unique_ptr<EnvState> clone() const override {
        return std::make_unique<ConnectorState>(*this);
    }

    std::string key() const override {
        std::string k;
        k.reserve(blocked.size() + heads.size() * 6 + 8);
        for (const auto& h : heads) {
            k += static_cast<char>('0' + h.row);
            k += static_cast<char>('0' + h.col);
        }
        for (uint8_t c : connected)
            k += static_cast<char>('0' + c);
        for (uint8_t b : blocked)
            k += static_cast<char>('0' + b);
        k += '|';
        k += std::to_string(t);
        return k;
    }

    bool terminal() const override { return done; }
    int step_count() const override { return t; }
};

class ConnectorEnv final : public Environment {
public:
    ConnectorEnv(std::string task_id, const ConnectorConfig& cfg) : cfg_(cfg) {
        if (cfg.grid_size < 4)
            throw std::invalid_argument("connector: grid_size must be >= 4");
        if (cfg.num_agents < 1)
            throw std::invalid_argument("connector: num_agents must be >= 1");
        if (cfg.num_agents > cfg.grid_size)
            throw std::invalid_argument("connector: num_agents must be <= grid_size");
        if (2 * cfg.num_agents > cfg.grid_size * cfg.grid_size)
            throw std::invalid_argument("connector: starts+goals do not fit on the grid");
        if (cfg.fov_radius < 1)
            throw std::invalid_argument("connector: fov_radius must be >= 1");
        if (cfg.horizon < 1)
            throw std::invalid_argument("connector: horizon must be >= 1");
        if (!cfg.starts.empty() || !cfg.goals.empty()) {
            if (static_cast<int>(cfg.starts.size()) != cfg.num_agents ||
                static_cast<int>(cfg.goals.size()) != cfg.num_agents)
                throw std::invalid_argument("connector: fixed layout must list one start and one goal per agent");
            for (const auto& c : cfg.starts)
                check_cell(c);
            for (const auto& c : cfg.goals)
                check_cell(c);
        }

        const int window = 2 * cfg.fov_radius + 1;
        desc_.task_id = std::move(task_id);
        desc_.num_agents = cfg.num_agents;
        desc_.action_count = 5;
        desc_.obs_dim = window * window + 4;
        desc_.horizon = cfg.horizon;
        desc_.discount = 0.99;
        desc_.validate();
    }

    const EnvDescriptor& descriptor() const override { return desc_; }

    std::pair<StatePtr, JointObservation> reset(const InstanceSpec& instance) const override {
        if (instance.task_id != desc_.task_id)
            throw std::invalid_argument("connector: unknown task_id '" + instance.task_id + "'");
        auto st = std::make_unique<ConnectorState>();
        const ConnectorLayout lay = layout(instance);
        st->heads = lay.starts;
        st->goals = lay.goals;
        st->connected.assign(cfg_.num_agents, 0);
        st->blocked.assign(cfg_.grid_size * cfg_.grid_size, 0);
        JointObservation obs = observe_state(*st);
        return {std::move(st), std::move(obs)};
    }

    std::pair<StatePtr, StepOutcome> step(const EnvState& state,
                                          const JointAction& action) const override {
        const auto& s = static_cast<const ConnectorState&>(state);
        if (s.done)
            throw std::logic_error("connector: step on terminal state");
        if (static_cast<int>(action.per_agent.size()) != cfg_.num_agents)
            throw std::invalid_argument("connector: joint action arity mismatch");
        for (int a : action.per_agent)
            if (a < 0 || a >= desc_.action_count)
                throw std::invalid_argument("connector: action index out of range");

        auto ns = std::make_unique<ConnectorState>(s);
        const int n = cfg_.num_agents;

        // Proposed targets against start-of-step occupancy.
        std::vector<Cell> target(n);
        std::vector<uint8_t> moving(n, 0);
        for (int i = 0; i < n; ++i) {
            target[i] = s.heads[i];
            if (s.connected[i])
                continue;
            Cell c = moved(s.heads[i], action.per_agent[i]);
            if (c == s.heads[i])
                continue;
            if (!in_grid(c) || s.blocked[idx(c)])
                continue;
            bool head_clash = false;
            for (int j = 0; j < n; ++j)
                if (j != i && s.heads[j] == c)
                    head_clash = true;
            if (head_clash)
                continue;
            target[i] = c;
            moving[i] = 1;
        }

        // Two movers claiming one cell block each other.
        for (int i = 0; i < n; ++i) {
            if (!moving[i])
                continue;
            for (int j = i + 1; j < n; ++j) {
                if (moving[j] && target[j] == target[i]) {
                    moving[i] = 0;
                    moving[j] = 0;
                    target[i] = s.heads[i];
                    target[j] = s.heads[j];
                }
            }
        }

        double reward = 0.0;
        for (int i = 0; i < n; ++i) {
            if (s.connected[i])
                continue;
            reward += kConnectorStepPenalty;
            if (moving[i]) {
                ns->blocked[idx(s.heads[i])] = 1; // trail becomes a wall
                ns->heads[i] = target[i];
                if (target[i] == s.goals[i]) {
                    ns->connected[i] = 1;
                    ns->blocked[idx(target[i])] = 1;
                    reward += kConnectorConnectReward;
                }
            }
        }

        ns->t = s.t + 1;
        const bool all_connected =
            std::all_of(ns->connected.begin(), ns->connected.end(), [](uint8_t c) { return c != 0; });
        ns->done = all_connected || ns->t >= cfg_.horizon;

        StepOutcome out;
        out.reward = reward;
        out.done = ns->done;
        if (ns->done)
            out.win = all_connected;
        out.next_obs = observe_state(*ns);
        return {std::move(ns), std::move(out)};
    }

    JointObservation observe(const EnvState& state) const override {
        return observe_state(static_cast<const ConnectorState&>(state));
    }

    ConnectorLayout layout(const InstanceSpec& instance) const {
        if (!cfg_.starts.empty())
            return {cfg_.starts, cfg_.goals};
        // Sample 2N distinct cells: N starts then N goals.
        Rng rng(derive_seed(stream_tag(desc_.task_id), stream_tag("layout"), instance.instance_seed));
        const int cells = cfg_.grid_size * cfg_.grid_size;
        std::vector<int> picked;
        picked.reserve(2 * cfg_.num_agents);
        while (static_cast<int>(picked.size()) < 2 * cfg_.num_agents) {
            int c = rng.next_int(cells);
            if (std::find(picked.begin(), picked.end(), c) == picked.end())
                picked.push_back(c);
        }
        ConnectorLayout lay;
        for (int i = 0; i < cfg_.num_agents; ++i) {
            lay.starts.push_back({picked[i] / cfg_.grid_size, picked[i] % cfg_.grid_size});
            int g = picked[cfg_.num_agents + i];
            lay.goals.push_back({g / cfg_.grid_size, g % cfg_.grid_size});
        }
        return lay;
    }

private:
    int idx(const Cell& c) const { return c.row * cfg_.grid_size + c.col; }
    bool in_grid(const Cell& c) const {
        return c.row >= 0 && c.row < cfg_.grid_size && c.col >= 0 && c.col < cfg_.grid_size;
    }
    void check_cell(const Cell& c) const {
        if (!in_grid(c))
            throw std::invalid_argument("connector: layout cell outside the grid");
    }

    static Cell moved(Cell c, int action) {
        switch (action) {
        case kConnectorUp: return {c.row - 1, c.col};
        case kConnectorDown: return {c.row + 1, c.col};
        case kConnectorLeft: return {c.row, c.col - 1};
        case kConnectorRight: return {c.row, c.col + 1};
        default: return c;
        }
    }

    // Per agent: (2r+1)^2 window centered on the head (1 = wall/trail/other
    // head/out of bounds, -1 = own goal if visible and free, 0 = open), then
    // own (x, y) and goal (x, y), normalized by grid_size - 1.
    JointObservation observe_state(const ConnectorState& s) const {
        const int n = cfg_.num_agents;
        const int r = cfg_.fov_radius;
        const double scale = 1.0 / (cfg_.grid_size - 1);
        JointObservation obs;
        obs.per_agent.resize(n);
        for (int i = 0; i < n; ++i) {
            auto& v = obs.per_agent[i];
            v.reserve(desc_.obs_dim);
            const Cell h = s.heads[i];
            for (int dr = -r; dr <= r; ++dr) {
                for (int dc = -r; dc <= r; ++dc) {
                    Cell c{h.row + dr, h.col + dc};
                    double val = 0.0;
                    if (!in_grid(c) || s.blocked[idx(c)]) {
                        val = 1.0;
                    } else {
                        for (int j = 0; j < n; ++j)
                            if (j != i && s.heads[j] == c)
                                val = 1.0;
                        if (val == 0.0 && c == s.goals[i])
                            val = -1.0;
                    }
                    v.push_back(val);
                }
            }
            v.push_back(h.col * scale);
            v.push_back(h.row * scale);
            v.push_back(s.goals[i].col * scale);
            v.push_back(s.goals[i].row * scale);
        }
        return obs;
    }

    ConnectorConfig cfg_;
    EnvDescriptor desc_;
};

} // namespace

EnvPtr make_connector(const std::string& task_id, const ConnectorConfig& cfg) {
    return std::make_shared<ConnectorEnv>(task_id, cfg);
}

ConnectorLayout connector_layout(const Environment& env, const InstanceSpec& instance) {
    const auto* ce = dynamic_cast<const ConnectorEnv*>(&env);
    if (!ce)
        throw std::invalid_argument("connector_layout: not a connector environment");
    return ce->layout(instance);
}

} // namespace inferum
