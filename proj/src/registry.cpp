#include "inferum/registry.hpp"

#include <map>
#include <mutex>
#include <regex>

#include "inferum/connector.hpp"
#include "inferum/warehouse.hpp"

namespace inferum {

namespace {

std::mutex g_mutex;
std::map<std::string, EnvPtr>& table() {
    static std::map<std::string, EnvPtr> t;
    return t;
}

EnvPtr build_from_pattern(const std::string& id) {
    static const std::regex conn_re(R"(connector-(\d+)x(\d+)-(\d+)ag)");
    static const std::regex wh_re(R"(warehouse-(\d+)x(\d+)-(\d+)ag(-(\d+)sh)?(-sparse)?)");
    std::smatch m;
    if (std::regex_match(id, m, conn_re)) {
        if (m[1].str() != m[2].str())
            throw std::invalid_argument("task '" + id + "': connector grids are square");
        ConnectorConfig cfg;
        cfg.grid_size = std::stoi(m[1].str());
        cfg.num_agents = std::stoi(m[3].str());
        cfg.horizon = 2 * cfg.grid_size;
        return make_connector(id, cfg);
    }
    if (std::regex_match(id, m, wh_re)) {
        if (m[1].str() != m[2].str())
            throw std::invalid_argument("task '" + id + "': warehouse grids are square");
        WarehouseConfig cfg;
        cfg.grid_size = std::stoi(m[1].str());
        cfg.num_agents = std::stoi(m[3].str());
        cfg.num_shelves = m[5].matched ? std::stoi(m[5].str()) : cfg.num_agents;
        cfg.horizon = 4 * cfg.grid_size;
        return make_warehouse(id, cfg);
    }
    return nullptr;
}

} // namespace

EnvPtr lookup_task(const std::string& task_id) {
    {
        std::lock_guard<std::mutex> lock(g_mutex);
        auto it = table().find(task_id);
        if (it != table().end())
            return it->second;
    }
    EnvPtr env = build_from_pattern(task_id);
    if (!env)
        throw std::invalid_argument("unknown task_id '" + task_id + "'");
    std::lock_guard<std::mutex> lock(g_mutex);
    table().emplace(task_id, env);
    return table()[task_id];
}

void register_task(const std::string& task_id, EnvPtr env) {
    if (!env)
        throw std::invalid_argument("register_task: null environment");
    if (env->descriptor().task_id != task_id)
        throw std::invalid_argument("register_task: descriptor task_id mismatch for '" + task_id + "'");
    std::lock_guard<std::mutex> lock(g_mutex);
    table()[task_id] = std::move(env);
}

bool task_registered(const std::string& task_id) {
    {
        std::lock_guard<std::mutex> lock(g_mutex);
        if (table().count(task_id))
            return true;
    }
    try {
        return build_from_pattern(task_id) != nullptr;
    } catch (const std::invalid_argument&) {
        return false;
    }
}

} // namespace inferum
