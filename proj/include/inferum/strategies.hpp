#pragma once

#include <string>
#include <vector>

#include "inferum/cmaes.hpp"
#include "inferum/env.hpp"
#include "inferum/policy.hpp"

namespace inferum {

// Outcome of one budgeted search. curve holds one (cumulative attempts,
// best-so-far return) point per round; best_return always equals the last
// curve value. wall_seconds is informational and excluded from determinism
// guarantees.
struct SearchResult {
    Trajectory best_trajectory;
    double best_return = 0.0;
    long attempts_used = 0;
    int rounds_used = 0;
    std::vector<std::pair<long, double>> curve;
    double wall_seconds = 0.0;
    int skipped_updates = 0; // fine-tuning rounds whose gradient was not finite
};

struct StrategyConfig {
    std::string name = "stochastic"; // stochastic | sgbs | finetune | compass

    double temperature = 1.0; // stochastic sampling temperature

    // sgbs
    int expansion_factor = 4;
    int beam_width = 0; // 0 derives max(1, parallel_attempts / expansion_factor)
    TopkMode expansion_mode = TopkMode::ExactTopK;

    // finetune
    double lr = 0.001;
    double entropy_coef = 0.0;

    // compass (population size is always the budget's parallel_attempts)
    double sigma0 = 1.0;
    double cov_lr_scale = 1.0;
    int num_elites = 0; // 0 derives parallel_attempts / 2
};

// Round-indexed stream derivations, shared by all strategies. Exposed so
// tests and external tooling can reproduce a search from its seed.
uint64_t strategy_round_seed(uint64_t seed, int round);   // rollout streams
uint64_t compass_ask_seed(uint64_t seed, int round);      // CMA-ES sampling

// Rounds of parallel_attempts independent stochastic rollouts; best kept.
SearchResult search_stochastic(const Environment& env, const PolicyParams& params,
                               const InstanceSpec& instance, const SearchBudget& budget,
                               double temperature, uint64_t seed);

// Simulation-guided beam search: each round advances the beam one step;
// every node expands into expansion_factor children (exact top-k of the
// factored policy, or sampled), each child is scored by the return of its
// greedy completion, and the beam is pruned to beam_width.
SearchResult search_sgbs(const Environment& env, const PolicyParams& params,
                         const InstanceSpec& instance, const SearchBudget& budget,
                         int expansion_factor, int beam_width, TopkMode expansion_mode,
                         uint64_t seed);

// Policy-gradient adaptation on the fixed instance: per round, a batch of
// stochastic rollouts from a working copy of theta, a REINFORCE step with the
// round-mean return as baseline. The input checkpoint is never mutated.
// final_params, when given, receives the adapted working copy.
SearchResult search_finetune(const Environment& env, const PolicyParams& params,
                             const InstanceSpec& instance, const SearchBudget& budget, double lr,
                             double entropy_coef, double temperature, uint64_t seed,
                             PolicyParams* final_params = nullptr);

// Latent-space search on a latent-conditioned policy: per round, CMA-ES
// proposes parallel_attempts latent vectors, each is rolled out once
// (stochastic, temperature 1), returns feed the CMA-ES update.
SearchResult search_compass(const Environment& env, const PolicyParams& params,
                            const InstanceSpec& instance, const SearchBudget& budget,
                            const StrategyConfig& cfg, uint64_t seed);

// Uniform dispatch enforcing the budget contract: in seconds mode a round
// starts only while elapsed time is under the limit (whole-round semantics,
// so attempt counts stay multiples of the batch); in rounds mode exactly
// budget.rounds rounds run and the result is bit-deterministic in seed.
SearchResult run_budgeted(const StrategyConfig& cfg, const Environment& env,
                          const PolicyParams& params, const InstanceSpec& instance,
                          const SearchBudget& budget, uint64_t seed);

} // namespace inferum
