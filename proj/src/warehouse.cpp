#include "inferum/warehouse.hpp"

#include <algorithm>

#include "inferum/rng.hpp"

namespace inferum {

namespace {

constexpr int kDirRow[4] = {-1, 0, 1, 0};
constexpr int kDirCol[4] = {0, 1, 0, -1};

struct WarehouseState final : EnvState {
    std::vector<Cell> agents;
    std::vector<int> dirs;
    std::vector<uint8_t> carrying;
    std::vector<Cell> shelves; // still on the floor
    Cell goal{0, 0};
    int shelves_remaining = 0; // floor + carried
    int t = 0;
    bool done = false;
    bool any_delivery = false;

    std::unique_ptr<EnvState> clone() const override {
        return std::make_unique<WarehouseState>(*this);
    }

    std::string key() const override {
        std::string k;
        for (size_t i = 0; i < agents.size(); ++i) {
            k += static_cast<char>('0' + agents[i].row);
            k += static_cast<char>('0' + agents[i].col);
            k += static_cast<char>('0' + dirs[i]);
            k += static_cast<char>('0' + carrying[i]);
        }
        k += '|';
        for (const auto& s : shelves) {
            k += static_cast<char>('0' + s.row);
            k += static_cast<char>('0' + s.col);
        }
        k += '|';
        k += any_delivery ? '1' : '0';
        k += std::to_string(t);
        return k;
    }

    bool terminal() const override { return done; }
    int step_count() const override { return t; }
};

class WarehouseEnv final : public Environment {
public:
    WarehouseEnv(std::string task_id, const WarehouseConfig& cfg) : cfg_(cfg) {
        if (cfg.grid_size < 3)
            throw std::invalid_argument("warehouse: grid_size must be >= 3");
        if (cfg.num_agents < 1 || cfg.num_shelves < 1)
            throw std::invalid_argument("warehouse: need at least one agent and one shelf");
        if (cfg.num_agents + cfg.num_shelves + 1 > cfg.grid_size * cfg.grid_size)
            throw std::invalid_argument("warehouse: agents, shelves and goal do not fit on the grid");
        if (cfg.horizon < 1)
            throw std::invalid_argument("warehouse: horizon must be >= 1");
        const bool fixed = !cfg.agent_starts.empty() || !cfg.shelf_cells.empty() || cfg.goal_cell.row >= 0;
        if (fixed) {
            if (static_cast<int>(cfg.agent_starts.size()) != cfg.num_agents ||
                static_cast<int>(cfg.agent_dirs.size()) != cfg.num_agents ||
                static_cast<int>(cfg.shelf_cells.size()) != cfg.num_shelves || cfg.goal_cell.row < 0)
                throw std::invalid_argument("warehouse: fixed layout must list agents, dirs, shelves and goal");
        }

        desc_.task_id = std::move(task_id);
        desc_.num_agents = cfg.num_agents;
        desc_.action_count = 5;
        desc_.obs_dim = 9 * 2 + 2 + 4 + 1 + 2; // 3x3 window x {shelf, agent} + pos + dir one-hot + carry + goal
        desc_.horizon = cfg.horizon;
        desc_.discount = 0.99;
        desc_.validate();
    }

    const EnvDescriptor& descriptor() const override { return desc_; }

    std::pair<StatePtr, JointObservation> reset(const InstanceSpec& instance) const override {
        if (instance.task_id != desc_.task_id)
            throw std::invalid_argument("warehouse: unknown task_id '" + instance.task_id + "'");
        auto st = std::make_unique<WarehouseState>();
        if (!cfg_.agent_starts.empty()) {
            st->agents = cfg_.agent_starts;
            st->dirs = cfg_.agent_dirs;
            st->shelves = cfg_.shelf_cells;
            st->goal = cfg_.goal_cell;
        } else {
            Rng rng(derive_seed(stream_tag(desc_.task_id), stream_tag("layout"), instance.instance_seed));
            const int cells = cfg_.grid_size * cfg_.grid_size;
            std::vector<int> picked;
            const int need = cfg_.num_agents + cfg_.num_shelves + 1;
            while (static_cast<int>(picked.size()) < need) {
                int c = rng.next_int(cells);
                if (std::find(picked.begin(), picked.end(), c) == picked.end())
                    picked.push_back(c);
            }
            for (int i = 0; i < cfg_.num_agents; ++i) {
                st->agents.push_back({picked[i] / cfg_.grid_size, picked[i] % cfg_.grid_size});
                st->dirs.push_back(rng.next_int(4));
            }
            for (int i = 0; i < cfg_.num_shelves; ++i) {
                int c = picked[cfg_.num_agents + i];
                st->shelves.push_back({c / cfg_.grid_size, c % cfg_.grid_size});
            }
            int g = picked[need - 1];
            st->goal = {g / cfg_.grid_size, g % cfg_.grid_size};
        }
        st->carrying.assign(cfg_.num_agents, 0);
        st->shelves_remaining = cfg_.num_shelves;
        JointObservation obs = observe_state(*st);
        return {std::move(st), std::move(obs)};
    }

    std::pair<StatePtr, StepOutcome> step(const EnvState& state,
                                          const JointAction& action) const override {
        const auto& s = static_cast<const WarehouseState&>(state);
        if (s.done)
            throw std::logic_error("warehouse: step on terminal state");
        if (static_cast<int>(action.per_agent.size()) != cfg_.num_agents)
            throw std::invalid_argument("warehouse: joint action arity mismatch");
        for (int a : action.per_agent)
            if (a < 0 || a >= desc_.action_count)
                throw std::invalid_argument("warehouse: action index out of range");

        auto ns = std::make_unique<WarehouseState>(s);
        const int n = cfg_.num_agents;
        double reward = 0.0;

        // Movement first, resolved against start-of-step occupancy.
        std::vector<Cell> target(n);
        std::vector<uint8_t> moving(n, 0);
        for (int i = 0; i < n; ++i) {
            target[i] = s.agents[i];
            if (action.per_agent[i] != kWarehouseForward)
                continue;
            Cell c{s.agents[i].row + kDirRow[s.dirs[i]], s.agents[i].col + kDirCol[s.dirs[i]]};
            if (!in_grid(c))
                continue;
            bool occupied = false;
            for (int j = 0; j < n; ++j)
                if (j != i && s.agents[j] == c)
                    occupied = true;
            if (occupied)
                continue;
            if (s.carrying[i] && shelf_at(s, c) >= 0)
                continue; // a carried shelf cannot pass over a floor shelf
            target[i] = c;
            moving[i] = 1;
        }
        for (int i = 0; i < n; ++i) {
            if (!moving[i])
                continue;
            for (int j = i + 1; j < n; ++j) {
                if (moving[j] && target[j] == target[i]) {
                    moving[i] = 0;
                    moving[j] = 0;
                    target[i] = s.agents[i];
                    target[j] = s.agents[j];
                }
            }
        }
        for (int i = 0; i < n; ++i)
            ns->agents[i] = target[i];

        // Rotations and toggles.
        for (int i = 0; i < n; ++i) {
            switch (action.per_agent[i]) {
            case kWarehouseRotateLeft:
                ns->dirs[i] = (ns->dirs[i] + 3) % 4;
                break;
            case kWarehouseRotateRight:
                ns->dirs[i] = (ns->dirs[i] + 1) % 4;
                break;
            case kWarehouseToggle: {
                const Cell here = ns->agents[i];
                if (!ns->carrying[i]) {
                    int sh = shelf_at(*ns, here);
                    if (sh >= 0) {
                        ns->shelves.erase(ns->shelves.begin() + sh);
                        ns->carrying[i] = 1;
                    }
                } else if (here == ns->goal) {
                    ns->carrying[i] = 0;
                    ns->shelves_remaining -= 1;
                    ns->any_delivery = true;
                    reward += 1.0;
                } else if (shelf_at(*ns, here) < 0) {
                    ns->carrying[i] = 0;
                    ns->shelves.push_back(here);
                }
                break;
            }
            default:
                break;
            }
        }

        ns->t = s.t + 1;
        ns->done = ns->shelves_remaining == 0 || ns->t >= cfg_.horizon;

        StepOutcome out;
        out.reward = reward;
        out.done = ns->done;
        if (ns->done)
            out.win = ns->any_delivery;
        out.next_obs = observe_state(*ns);
        return {std::move(ns), std::move(out)};
    }

    JointObservation observe(const EnvState& state) const override {
        return observe_state(static_cast<const WarehouseState&>(state));
    }

private:
    bool in_grid(const Cell& c) const {
        return c.row >= 0 && c.row < cfg_.grid_size && c.col >= 0 && c.col < cfg_.grid_size;
    }

    static int shelf_at(const WarehouseState& s, const Cell& c) {
        for (size_t i = 0; i < s.shelves.size(); ++i)
            if (s.shelves[i] == c)
                return static_cast<int>(i);
        return -1;
    }

    // Per agent: 3x3 window as two channels (floor shelf, other agent; walls
    // show up in the agent channel), own (x, y), facing one-hot, carry flag,
    // goal (x, y). Coordinates normalized by grid_size - 1.
    JointObservation observe_state(const WarehouseState& s) const {
        const int n = cfg_.num_agents;
        const double scale = 1.0 / (cfg_.grid_size - 1);
        JointObservation obs;
        obs.per_agent.resize(n);
        for (int i = 0; i < n; ++i) {
            auto& v = obs.per_agent[i];
            v.reserve(desc_.obs_dim);
            const Cell me = s.agents[i];
            for (int dr = -1; dr <= 1; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    Cell c{me.row + dr, me.col + dc};
                    double shelf = 0.0, agent = 0.0;
                    if (!in_grid(c)) {
                        agent = 1.0;
                    } else {
                        if (shelf_at(s, c) >= 0)
                            shelf = 1.0;
                        for (int j = 0; j < n; ++j)
                            if (j != i && s.agents[j] == c)
                                agent = 1.0;
                    }
                    v.push_back(shelf);
                    v.push_back(agent);
                }
            }
            v.push_back(me.col * scale);
            v.push_back(me.row * scale);
            for (int d = 0; d < 4; ++d)
                v.push_back(s.dirs[i] == d ? 1.0 : 0.0);
            v.push_back(s.carrying[i] ? 1.0 : 0.0);
            v.push_back(s.goal.col * scale);
            v.push_back(s.goal.row * scale);
        }
        return obs;
    }

    WarehouseConfig cfg_;
    EnvDescriptor desc_;
};

} // namespace

EnvPtr make_warehouse(const std::string& task_id, const WarehouseConfig& cfg) {
    return std::make_shared<WarehouseEnv>(task_id, cfg);
}

} // namespace inferum
