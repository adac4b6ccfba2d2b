#pragma once

#include "inferum/env.hpp"

namespace inferum {

// Maximum achievable undiscounted return, by exhaustive layered search over
// joint-action sequences with state deduplication. Exact for every instance
// it completes; throws budget_exceeded_error once more than max_nodes
// (state, joint-action) expansions would be needed. Independent ground truth
// for tests: it never touches policies or search strategies.
double oracle_best_return(const Environment& env, const InstanceSpec& instance, long max_nodes);

// Registry-lookup convenience.
double oracle_best_return(const InstanceSpec& instance, long max_nodes);

} // namespace inferum
