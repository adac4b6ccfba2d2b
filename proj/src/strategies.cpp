#include "inferum/strategies.hpp"

#include <chrono>
#include <cmath>

#include "inferum/parallel.hpp"
#include "inferum/rollout.hpp"

namespace inferum {

namespace {

using Clock = std::chrono::steady_clock;

struct RoundLoop {
    explicit RoundLoop(const SearchBudget& budget)
        : budget_(budget), start_(Clock::now()) {}

    // Whole-round semantics: in seconds mode a round may start only while
    // the elapsed time is below the limit.
    bool another(int round) const {
        if (budget_.kind == SearchBudget::Kind::Rounds)
            return round < budget_.rounds;
        return elapsed() < budget_.seconds;
    }

    double elapsed() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    SearchBudget budget_;
    Clock::time_point start_;
};

LatentVector neutral_latent(const PolicyParams& params) {
    return LatentVector(params.arch.latent_dim, 0.0);
}

void track_best(SearchResult& result, Trajectory&& traj, bool& any) {
    const double r = traj.undiscounted_return;
    if (!any || r > result.best_return) {
        result.best_return = r;
        result.best_trajectory = std::move(traj);
        any = true;
    }
}

void finish(SearchResult& result, const RoundLoop& loop) {
    result.wall_seconds = loop.elapsed();
}

} // namespace

uint64_t strategy_round_seed(uint64_t seed, int round) {
    return derive_seed(seed, stream_tag("round"), static_cast<uint64_t>(round));
}

uint64_t compass_ask_seed(uint64_t seed, int round) {
    return derive_seed(seed, stream_tag("ask"), static_cast<uint64_t>(round));
}

SearchResult search_stochastic(const Environment& env, const PolicyParams& params,
                               const InstanceSpec& instance, const SearchBudget& budget,
                               double temperature, uint64_t seed) {
    if (!(temperature > 0.0))
        throw std::invalid_argument("search_stochastic: temperature must be positive");
    const LatentVector z = neutral_latent(params);
    SearchResult result;
    RoundLoop loop(budget);
    bool any = false;
    for (int round = 0; loop.another(round); ++round) {
        auto trajs = rollout_batch(env, instance, params, z, temperature,
                                   strategy_round_seed(seed, round), budget.parallel_attempts);
        for (auto& t : trajs)
            track_best(result, std::move(t), any);
        result.attempts_used += budget.parallel_attempts;
        result.rounds_used = round + 1;
        result.curve.emplace_back(result.attempts_used, result.best_return);
    }
    finish(result, loop);
    return result;
}

SearchResult search_sgbs(const Environment& env, const PolicyParams& params,
                         const InstanceSpec& instance, const SearchBudget& budget,
                         int expansion_factor, int beam_width, TopkMode expansion_mode,
                         uint64_t seed) {
    if (expansion_factor < 1)
        throw std::invalid_argument("search_sgbs: expansion_factor must be >= 1");
    if (beam_width <= 0)
        beam_width = std::max(1, budget.parallel_attempts / std::max(1, expansion_factor));
    if (static_cast<long>(expansion_factor) * beam_width > budget.parallel_attempts)
        throw std::invalid_argument(
            "search_sgbs: expansion_factor * beam_width exceeds parallel_attempts");
    if (expansion_mode == TopkMode::ExactTopK) {
        double joint = 1.0;
        for (int i = 0; i < params.arch.num_agents; ++i)
            joint *= params.arch.action_count;
        if (joint > static_cast<double>(1 << 20))
            throw std::invalid_argument(
                "search_sgbs: joint action space too large for exact-topk; use sampled expansion");
    }

    struct BeamNode {
        StatePtr state;
        std::vector<TrajectoryStep> prefix;
        double prefix_return = 0.0;
        double simulated_return = 0.0; // full-trajectory score of this node
    };

    const LatentVector z = neutral_latent(params);
    SearchResult result;
    RoundLoop loop(budget);
    bool any = false;

    std::vector<BeamNode> beam;
    {
        auto [state, obs] = env.reset(instance);
        (void)obs;
        beam.push_back({std::move(state), {}, 0.0, 0.0});
    }

    for (int round = 0; loop.another(round) && !beam.empty(); ++round) {
        struct Child {
            BeamNode node;
            Trajectory full;
            bool terminal = false;
        };
        // Expansion is cheap; the simulations below dominate, so children are
        // collected per node and simulated in one parallel batch.
        std::vector<Child> children;
        for (size_t nidx = 0; nidx < beam.size(); ++nidx) {
            auto& node = beam[nidx];
            const JointObservation obs = env.observe(*node.state);
            Rng expand_rng(derive_seed(strategy_round_seed(seed, round), stream_tag("expand"),
                                       static_cast<uint64_t>(nidx)));
            const auto actions =
                topk_joint(params, obs, z, expansion_factor, expansion_mode,
                           expansion_mode == TopkMode::Sampled ? &expand_rng : nullptr);
            for (const auto& action : actions) {
                auto [ns, outcome] = env.step(*node.state, action);
                Child c;
                c.node.prefix = node.prefix;
                c.node.prefix.push_back({obs, action, outcome.reward});
                c.node.prefix_return = node.prefix_return + outcome.reward;
                c.terminal = outcome.done;
                if (outcome.done) {
                    c.full.steps = c.node.prefix;
                    c.full.undiscounted_return = c.node.prefix_return;
                    c.full.win = outcome.win;
                }
                c.node.state = std::move(ns);
                children.push_back(std::move(c));
            }
        }
        parallel_for(children.size(), [&](std::size_t i) {
            auto& c = children[i];
            if (!c.terminal)
                c.full = complete_greedy(env, *c.node.state, c.node.prefix, c.node.prefix_return,
                                         params, z);
            c.node.simulated_return = c.full.undiscounted_return;
        });

        for (auto& c : children)
            track_best(result, std::move(c.full), any);
        result.attempts_used += static_cast<long>(children.size());
        result.rounds_used = round + 1;
        result.curve.emplace_back(result.attempts_used, result.best_return);

        // Prune: keep the beam_width best non-terminal children, stable on
        // ties so the search is deterministic.
        std::vector<int> idx;
        for (size_t i = 0; i < children.size(); ++i)
            if (!children[i].terminal)
                idx.push_back(static_cast<int>(i));
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
            return children[a].node.simulated_return > children[b].node.simulated_return;
        });
        if (static_cast<int>(idx.size()) > beam_width)
            idx.resize(beam_width);
        std::vector<BeamNode> next;
        next.reserve(idx.size());
        for (int i : idx)
            next.push_back(std::move(children[i].node));
        beam = std::move(next);
    }
    finish(result, loop);
    return result;
}

SearchResult search_finetune(const Environment& env, const PolicyParams& params,
                             const InstanceSpec& instance, const SearchBudget& budget, double lr,
                             double entropy_coef, double temperature, uint64_t seed,
                             PolicyParams* final_params) {
    if (!(temperature > 0.0))
        throw std::invalid_argument("search_finetune: temperature must be positive");
    const LatentVector z = neutral_latent(params);
    PolicyParams working = params; // the checkpoint itself is never touched
    SearchResult result;
    RoundLoop loop(budget);
    bool any = false;
    const int batch = budget.parallel_attempts;
    std::vector<std::vector<double>> grads(batch);

    for (int round = 0; loop.another(round); ++round) {
        auto trajs = rollout_batch(env, instance, working, z, temperature,
                                   strategy_round_seed(seed, round), batch);

        double baseline = 0.0;
        for (const auto& t : trajs)
            baseline += t.undiscounted_return;
        baseline /= batch;

        // Whole-trajectory REINFORCE with the round mean as baseline.
        parallel_for(batch, [&](std::size_t b) {
            grads[b].assign(working.theta.size(), 0.0);
            const double adv = trajs[b].undiscounted_return - baseline;
            std::vector<double> advantages(trajs[b].steps.size(), adv);
            accumulate_policy_gradient(working, trajs[b], z, advantages, entropy_coef, grads[b]);
        });
        std::vector<double> grad(working.theta.size(), 0.0);
        bool finite = true;
        for (int b = 0; b < batch; ++b)
            for (size_t i = 0; i < grad.size(); ++i)
                grad[i] += grads[b][i] / batch;
        for (double g : grad)
            if (!std::isfinite(g))
                finite = false;
        if (finite)
            for (size_t i = 0; i < working.theta.size(); ++i)
                working.theta[i] += lr * grad[i];
        else
            result.skipped_updates += 1;

        for (auto& t : trajs)
            track_best(result, std::move(t), any);
        result.attempts_used += batch;
        result.rounds_used = round + 1;
        result.curve.emplace_back(result.attempts_used, result.best_return);
    }
    if (final_params)
        *final_params = std::move(working);
    finish(result, loop);
    return result;
}

SearchResult search_compass(const Environment& env, const PolicyParams& params,
                            const InstanceSpec& instance, const SearchBudget& budget,
                            const StrategyConfig& cfg, uint64_t seed) {
    if (params.arch.latent_dim < 1)
        throw std::invalid_argument("search_compass: policy must be latent-conditioned "
                                    "(latent_dim > 0); train a compass checkpoint first");
    if (budget.parallel_attempts < 2)
        throw std::invalid_argument("search_compass: needs parallel_attempts >= 2");

    CmaState cma = cma_init(params.arch.latent_dim, budget.parallel_attempts, cfg.num_elites,
                            cfg.sigma0, cfg.cov_lr_scale);
    SearchResult result;
    RoundLoop loop(budget);
    bool any = false;

    for (int round = 0; loop.another(round); ++round) {
        std::vector<std::vector<double>> candidates;
        try {
            Rng ask_rng(compass_ask_seed(seed, round));
            candidates = cma_ask(cma, ask_rng);
        } catch (const degenerate_covariance_error&) {
            cma = cma_repair(cma);
            Rng ask_rng(compass_ask_seed(seed, round));
            candidates = cma_ask(cma, ask_rng); // a second failure propagates
        }

        auto trajs = rollout_batch_latents(env, instance, params, candidates, cfg.temperature,
                                           strategy_round_seed(seed, round));

        std::vector<double> fitnesses(trajs.size());
        for (size_t i = 0; i < trajs.size(); ++i)
            fitnesses[i] = trajs[i].undiscounted_return;
        for (auto& t : trajs)
            track_best(result, std::move(t), any);
        result.attempts_used += budget.parallel_attempts;
        result.rounds_used = round + 1;
        result.curve.emplace_back(result.attempts_used, result.best_return);

        cma = cma_tell(cma, candidates, fitnesses, /*maximize=*/true);
    }
    finish(result, loop);
    return result;
}

SearchResult run_budgeted(const StrategyConfig& cfg, const Environment& env,
                          const PolicyParams& params, const InstanceSpec& instance,
                          const SearchBudget& budget, uint64_t seed) {
    SearchResult result;
    if (cfg.name == "stochastic") {
        result = search_stochastic(env, params, instance, budget, cfg.temperature, seed);
    } else if (cfg.name == "sgbs") {
        result = search_sgbs(env, params, instance, budget, cfg.expansion_factor, cfg.beam_width,
                             cfg.expansion_mode, seed);
    } else if (cfg.name == "finetune") {
        result = search_finetune(env, params, instance, budget, cfg.lr, cfg.entropy_coef,
                                 cfg.temperature, seed);
    } else if (cfg.name == "compass") {
        result = search_compass(env, params, instance, budget, cfg, seed);
    } else {
        throw std::invalid_argument("run_budgeted: unknown strategy '" + cfg.name + "'");
    }
    // Attempt accounting audit.
    if (result.attempts_used >
        static_cast<long>(result.rounds_used) * budget.parallel_attempts)
        throw std::logic_error("run_budgeted: attempt accounting violated");
    return result;
}

} // namespace inferum
