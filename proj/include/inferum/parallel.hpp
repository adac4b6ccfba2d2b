#pragma once

#include <cstddef>
#include <functional>

namespace inferum {

// Serial keeps a reference execution path: identical results are guaranteed
// because workers only write to disjoint, index-addressed slots and all
// reductions happen afterwards in index order.
enum class Exec { Serial, Parallel };

// Worker cap: min(INFERUM_WORKERS, OpenMP max threads), at least 1.
int max_workers();

// Override the worker cap programmatically (benchmarks, tests). n <= 0 resets
// to the environment-derived default.
void set_max_workers(int n);

// Runs body(i) for i in [0, n). Parallel mode uses OpenMP when compiled in;
// exceptions thrown by body are captured and the first one rethrown after
// the loop joins.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  Exec mode = Exec::Parallel);

} // namespace inferum
