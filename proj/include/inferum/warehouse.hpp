#pragma once

#include <vector>

#include "inferum/connector.hpp" // Cell
#include "inferum/env.hpp"

namespace inferum {

// Shelf-delivery gridworld with a deliberately sparse reward. Agents face a
// direction and act with {forward, rotate-left, rotate-right, toggle-load,
// no-op}. Toggling on a shelf cell picks the shelf up, toggling on the goal
// cell while loaded delivers it (+1, shelf consumed), toggling elsewhere
// while loaded puts the shelf down. Every other step is worth 0.
//
// Episode ends when every shelf has been delivered or at the horizon; win
// means at least one delivery.
struct WarehouseConfig {
    int grid_size = 5;
    int num_agents = 1;
    int num_shelves = 1;
    int horizon = 20;

    // Fixed layout for crafted scenarios; sampled from the instance seed when
    // empty. Directions: 0 up, 1 right, 2 down, 3 left.
    std::vector<Cell> agent_starts;
    std::vector<int> agent_dirs;
    std::vector<Cell> shelf_cells;
    Cell goal_cell{-1, -1};
};

inline constexpr int kWarehouseForward = 0;
inline constexpr int kWarehouseRotateLeft = 1;
inline constexpr int kWarehouseRotateRight = 2;
inline constexpr int kWarehouseToggle = 3;
inline constexpr int kWarehouseNoop = 4;

EnvPtr make_warehouse(const std::string& task_id, const WarehouseConfig& cfg);

} // namespace inferum
