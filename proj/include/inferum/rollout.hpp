#pragma once

#include "inferum/env.hpp"
#include "inferum/parallel.hpp"
#include "inferum/policy.hpp"

namespace inferum {

// One full episode. greedy ignores temperature and rng.
Trajectory rollout(const Environment& env, const InstanceSpec& instance,
                   const PolicyParams& params, const LatentVector& latent, double temperature,
                   Rng rng, bool greedy = false);

// count independent episodes; attempt i draws from Rng(derive_seed(seed, i)),
// so the result does not depend on worker count or B beyond the attempt
// index. Results are returned in attempt order.
std::vector<Trajectory> rollout_batch(const Environment& env, const InstanceSpec& instance,
                                      const PolicyParams& params, const LatentVector& latent,
                                      double temperature, uint64_t seed, int count,
                                      Exec mode = Exec::Parallel);

// Same, with one latent per attempt.
std::vector<Trajectory> rollout_batch_latents(const Environment& env, const InstanceSpec& instance,
                                              const PolicyParams& params,
                                              const std::vector<LatentVector>& latents,
                                              double temperature, uint64_t seed,
                                              Exec mode = Exec::Parallel);

// Greedy continuation from a mid-episode state, appended to an existing
// prefix. prefix_return is the return already collected along the prefix.
Trajectory complete_greedy(const Environment& env, const EnvState& state,
                           std::vector<TrajectoryStep> prefix_steps, double prefix_return,
                           const PolicyParams& params, const LatentVector& latent);

} // namespace inferum
