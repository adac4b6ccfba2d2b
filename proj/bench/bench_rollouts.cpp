// Throughput comparison between the serial reference path and the OpenMP
// path for the two batch kernels that dominate run time: episode rollouts
// and policy-gradient accumulation.

#include <chrono>
#include <cstdio>

#include "inferum/parallel.hpp"
#include "inferum/registry.hpp"
#include "inferum/rollout.hpp"

using namespace inferum;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double time_rollouts(const Environment& env, const PolicyParams& params, Exec mode, int batch,
                     int reps) {
    InstanceSpec inst{env.descriptor().task_id, 17};
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r)
        rollout_batch(env, inst, params, {}, 1.0, derive_seed(42, r), batch, mode);
    return seconds_since(t0);
}

double time_gradients(const Environment& env, const PolicyParams& params, Exec mode, int batch,
                      int reps) {
    InstanceSpec inst{env.descriptor().task_id, 17};
    auto trajs = rollout_batch(env, inst, params, {}, 1.0, 42, batch, Exec::Serial);
    std::vector<std::vector<double>> grads(batch);
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) {
        parallel_for(
            batch,
            [&](std::size_t b) {
                grads[b].assign(params.theta.size(), 0.0);
                std::vector<double> adv(trajs[b].steps.size(), 1.0);
                accumulate_policy_gradient(params, trajs[b], {}, adv, 0.0, grads[b]);
            },
            mode);
    }
    return seconds_since(t0);
}

} // namespace

int main() {
    EnvPtr env = lookup_task("connector-6x6-2ag");
    PolicyArch arch;
    arch.obs_dim = env->descriptor().obs_dim;
    arch.action_count = env->descriptor().action_count;
    arch.num_agents = env->descriptor().num_agents;
    PolicyParams params = policy_init(arch, Rng(7));

    const int batch = 64;
    const int reps = 20;
    std::printf("workers available: %d\n", max_workers());
    std::printf("%-24s %10s %10s %8s\n", "kernel", "serial(s)", "openmp(s)", "speedup");

    const double rs = time_rollouts(*env, params, Exec::Serial, batch, reps);
    const double rp = time_rollouts(*env, params, Exec::Parallel, batch, reps);
    std::printf("%-24s %10.3f %10.3f %8.2fx\n", "rollout_batch x64", rs, rp, rs / rp);

    const double gs = time_gradients(*env, params, Exec::Serial, batch, reps);
    const double gp = time_gradients(*env, params, Exec::Parallel, batch, reps);
    std::printf("%-24s %10.3f %10.3f %8.2fx\n", "policy_gradient x64", gs, gp, gs / gp);

    return 0;
}
