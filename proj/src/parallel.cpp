#include "inferum/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace inferum {

namespace {

std::atomic<int> g_worker_override{0};

int env_worker_limit() {
    const char* s = std::getenv("INFERUM_WORKERS");
    if (!s || !*s)
        return 0;
    int v = std::atoi(s);
    return v > 0 ? v : 0;
}

} // namespace

int max_workers() {
    int hw = 1;
#ifdef _OPENMP
    hw = omp_get_max_threads();
#endif
    int cap = g_worker_override.load();
    if (cap <= 0)
        cap = env_worker_limit();
    if (cap > 0 && cap < hw)
        hw = cap;
    return hw < 1 ? 1 : hw;
}

void set_max_workers(int n) { g_worker_override.store(n > 0 ? n : 0); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, Exec mode) {
    if (n == 0)
        return;
    const int workers = max_workers();
    if (mode == Exec::Serial || workers <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
#ifdef _OPENMP
    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    }
    if (first_error)
        std::rethrow_exception(first_error);
#else
    for (std::size_t i = 0; i < n; ++i)
        body(i);
#endif
}

} // namespace inferum
