#pragma once

#include <string>

#include "inferum/env.hpp"

namespace inferum {

// Environments are looked up by task_id. Built-in patterns:
//
//   connector-<S>x<S>-<N>ag            e.g. connector-6x6-2ag
//   warehouse-<S>x<S>-<N>ag[-<K>sh][-sparse]
//
// Connector defaults: fov_radius 2, horizon 2*S. Warehouse defaults: one
// shelf per agent unless <K>sh is given, horizon 4*S; the -sparse suffix is
// accepted for naming compatibility (the reward is sparse either way).
// Custom configurations can be registered programmatically (harness configs
// do this for explicit task definitions).
EnvPtr lookup_task(const std::string& task_id);

void register_task(const std::string& task_id, EnvPtr env);

bool task_registered(const std::string& task_id);

} // namespace inferum
