#pragma once

#include <optional>
#include <vector>

#include "inferum/env.hpp"

namespace inferum {

struct Cell {
    int row = 0;
    int col = 0;

    bool operator==(const Cell& o) const { return row == o.row && col == o.col; }
};

// Path-routing gridworld. Each agent walks from a start cell to a goal cell;
// every cell it leaves becomes a permanent obstacle for everyone, so paths
// must be planned jointly. Actions per agent: up, down, left, right, no-op.
//
// Reward per step, shared by the team: -0.03 for every agent not yet
// connected at the start of the step, +1 for every agent reaching its goal
// this step. An episode ends when all agents are connected or at the horizon;
// win means all connected.
struct ConnectorConfig {
    int grid_size = 6;
    int num_agents = 1;
    int fov_radius = 2; // field-of-view half-width
    int horizon = 12;

    // Fixed layout for crafted scenarios; when empty the layout is sampled
    // from the instance seed.
    std::vector<Cell> starts;
    std::vector<Cell> goals;
};

struct ConnectorLayout {
    std::vector<Cell> starts;
    std::vector<Cell> goals;
};

inline constexpr int kConnectorUp = 0;
inline constexpr int kConnectorDown = 1;
inline constexpr int kConnectorLeft = 2;
inline constexpr int kConnectorRight = 3;
inline constexpr int kConnectorNoop = 4;

inline constexpr double kConnectorStepPenalty = -0.03;
inline constexpr double kConnectorConnectReward = 1.0;

EnvPtr make_connector(const std::string& task_id, const ConnectorConfig& cfg);

// Layout the environment will use for an instance (introspection for tests
// and tooling).
ConnectorLayout connector_layout(const Environment& env, const InstanceSpec& instance);

} // namespace inferum
