#include "inferum/rollout.hpp"

namespace inferum {

Trajectory rollout(const Environment& env, const InstanceSpec& instance,
                   const PolicyParams& params, const LatentVector& latent, double temperature,
                   Rng rng, bool greedy) {
    Trajectory traj;
    auto [state, obs] = env.reset(instance);
    while (!state->terminal()) {
        JointAction action = greedy ? greedy_joint(params, obs, latent)
                                    : sample_joint(params, obs, latent, temperature, rng).first;
        auto [next_state, outcome] = env.step(*state, action);
        traj.steps.push_back({std::move(obs), std::move(action), outcome.reward});
        traj.undiscounted_return += outcome.reward;
        obs = std::move(outcome.next_obs);
        state = std::move(next_state);
        if (outcome.done) {
            traj.win = outcome.win;
            break;
        }
    }
    return traj;
}

std::vector<Trajectory> rollout_batch(const Environment& env, const InstanceSpec& instance,
                                      const PolicyParams& params, const LatentVector& latent,
                                      double temperature, uint64_t seed, int count, Exec mode) {
    std::vector<Trajectory> out(count);
    parallel_for(
        static_cast<std::size_t>(count),
        [&](std::size_t i) {
            out[i] = rollout(env, instance, params, latent, temperature,
                             Rng(derive_seed(seed, i)));
        },
        mode);
    return out;
}

std::vector<Trajectory> rollout_batch_latents(const Environment& env, const InstanceSpec& instance,
                                              const PolicyParams& params,
                                              const std::vector<LatentVector>& latents,
                                              double temperature, uint64_t seed, Exec mode) {
    std::vector<Trajectory> out(latents.size());
    parallel_for(
        latents.size(),
        [&](std::size_t i) {
            out[i] = rollout(env, instance, params, latents[i], temperature,
                             Rng(derive_seed(seed, i)));
        },
        mode);
    return out;
}

Trajectory complete_greedy(const Environment& env, const EnvState& state,
                           std::vector<TrajectoryStep> prefix_steps, double prefix_return,
                           const PolicyParams& params, const LatentVector& latent) {
    Trajectory traj;
    traj.steps = std::move(prefix_steps);
    traj.undiscounted_return = prefix_return;
    StatePtr cur = state.clone();
    JointObservation obs = env.observe(*cur);
    while (!cur->terminal()) {
        JointAction action = greedy_joint(params, obs, latent);
        auto [next_state, outcome] = env.step(*cur, action);
        traj.steps.push_back({std::move(obs), std::move(action), outcome.reward});
        traj.undiscounted_return += outcome.reward;
        obs = std::move(outcome.next_obs);
        cur = std::move(next_state);
        if (outcome.done) {
            traj.win = outcome.win;
            break;
        }
    }
    return traj;
}

} // namespace inferum
