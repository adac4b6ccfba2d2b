#include "inferum/training.hpp"

#include <cmath>
#include <fstream>

#include "inferum/registry.hpp"
#include "inferum/rollout.hpp"

namespace inferum {

namespace {

// Discounted reward-to-go per step.
std::vector<double> returns_to_go(const Trajectory& traj, double discount) {
    std::vector<double> g(traj.steps.size(), 0.0);
    double acc = 0.0;
    for (int t = static_cast<int>(traj.steps.size()) - 1; t >= 0; --t) {
        acc = traj.steps[t].reward + discount * acc;
        g[t] = acc;
    }
    return g;
}

double mean_entropy_sample(const PolicyParams& params, const std::vector<Trajectory>& trajs,
                           const LatentVector& latent, int max_trajs) {
    double h = 0.0;
    long count = 0;
    const int lim = std::min<int>(max_trajs, static_cast<int>(trajs.size()));
    for (int b = 0; b < lim; ++b) {
        for (const auto& step : trajs[b].steps) {
            const auto dist = forward(params, step.obs, latent);
            for (const auto& logits : dist.per_agent_logits)
                h += distribution_entropy(logits);
            count += dist.per_agent_logits.size();
        }
    }
    return count > 0 ? h / static_cast<double>(count) : 0.0;
}

void check_finite(const std::vector<double>& v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw training_diverged_error(std::string("training diverged: non-finite ") + what);
}

void sgd_step(PolicyParams& params, const std::vector<double>& grad, double lr) {
    check_finite(grad, "gradient");
    for (size_t i = 0; i < params.theta.size(); ++i)
        params.theta[i] += lr * grad[i];
    check_finite(params.theta, "parameters");
}

} // namespace

LatentVector sample_latent_prior(int latent_dim, Rng& rng) {
    LatentVector z(latent_dim);
    for (double& v : z)
        v = rng.next_uniform(-1.0, 1.0);
    return z;
}

TrainResult train_base(const std::string& task_id, const TrainConfig& cfg) {
    if (!(cfg.lr >= 0.0))
        throw std::invalid_argument("train_base: lr must be non-negative");
    if (!(cfg.discount >= 0.0 && cfg.discount <= 1.0))
        throw std::invalid_argument("train_base: discount must be in [0,1]");
    if (cfg.batch_instances < 1)
        throw std::invalid_argument("train_base: batch_instances must be >= 1");

    EnvPtr env = lookup_task(task_id);
    const auto& desc = env->descriptor();
    PolicyArch arch;
    arch.obs_dim = desc.obs_dim;
    arch.action_count = desc.action_count;
    arch.num_agents = desc.num_agents;
    arch.latent_dim = 0;
    arch.hidden_sizes = cfg.hidden_sizes;

    TrainResult result;
    result.params = policy_init(arch, Rng(derive_seed(cfg.seed, stream_tag("init"))));

    const int batch = cfg.batch_instances;
    long env_steps = 0;
    long iter = 0;
    std::vector<Trajectory> trajs(batch);
    std::vector<std::vector<double>> grads(batch);

    while (env_steps < cfg.total_env_steps) {
        // Rollouts: stream per (seed, iter, slot) so batch parallelism never
        // changes the result.
        parallel_for(batch, [&](std::size_t b) {
            InstanceSpec inst{task_id, derive_seed(cfg.seed, stream_tag("instance"), iter, b)};
            trajs[b] = rollout(*env, inst, result.params, {}, 1.0,
                               Rng(derive_seed(cfg.seed, stream_tag("rollout"), iter, b)));
        });

        double baseline = 0.0, mean_return = 0.0;
        std::vector<std::vector<double>> togo(batch);
        for (int b = 0; b < batch; ++b) {
            togo[b] = returns_to_go(trajs[b], cfg.discount);
            baseline += togo[b].empty() ? 0.0 : togo[b][0];
            mean_return += trajs[b].undiscounted_return;
            env_steps += trajs[b].length();
        }
        baseline /= batch;
        mean_return /= batch;
        if (!std::isfinite(mean_return))
            throw training_diverged_error("training diverged: non-finite return");

        parallel_for(batch, [&](std::size_t b) {
            grads[b].assign(result.params.theta.size(), 0.0);
            auto adv = togo[b];
            for (double& a : adv)
                a -= baseline;
            accumulate_policy_gradient(result.params, trajs[b], {}, adv, cfg.entropy_coef,
                                       grads[b]);
        });
        std::vector<double> grad(result.params.theta.size(), 0.0);
        for (int b = 0; b < batch; ++b) // reduce in slot order: deterministic
            for (size_t i = 0; i < grad.size(); ++i)
                grad[i] += grads[b][i] / batch;

        const double entropy = mean_entropy_sample(result.params, trajs, {}, 4);
        sgd_step(result.params, grad, cfg.lr);

        ++iter;
        result.curve.push_back({iter, env_steps, mean_return, entropy});
    }
    return result;
}

TrainResult train_compass(const PolicyParams& base, const std::string& task_id,
                          const CompassTrainConfig& cfg, CompassDiagnostics* diag) {
    if (base.arch.latent_dim != 0)
        throw std::invalid_argument("train_compass: base policy must not be latent-conditioned");
    if (cfg.latent_samples < 1)
        throw std::invalid_argument("train_compass: latent_samples must be >= 1");
    if (cfg.instances_batch < 1)
        throw std::invalid_argument("train_compass: instances_batch must be >= 1");
    if (cfg.latent_dim < 1)
        throw std::invalid_argument("train_compass: latent_dim must be >= 1");

    EnvPtr env = lookup_task(task_id);
    TrainResult result;
    result.params = reincarnate(base, cfg.latent_dim, cfg.noise_amplitude,
                                Rng(derive_seed(cfg.seed, stream_tag("reincarnate"))));

    const int ib = cfg.instances_batch;
    const int ls = cfg.latent_samples;
    const double discount = env->descriptor().discount;
    long env_steps = 0;
    long iter = 0;
    std::vector<Trajectory> trajs(ib * ls);
    std::vector<LatentVector> latents(ib * ls);
    std::vector<std::vector<double>> grads(ib);

    while (env_steps < cfg.total_env_steps) {
        parallel_for(static_cast<std::size_t>(ib) * ls, [&](std::size_t k) {
            const std::size_t b = k / ls;
            const std::size_t j = k % ls;
            Rng zrng(derive_seed(cfg.seed, stream_tag("latent"), iter, b, j));
            latents[k] = sample_latent_prior(cfg.latent_dim, zrng);
            InstanceSpec inst{task_id, derive_seed(cfg.seed, stream_tag("cinstance"), iter, b)};
            trajs[k] = rollout(*env, inst, result.params, latents[k], 1.0,
                               Rng(derive_seed(cfg.seed, stream_tag("crollout"), iter, b, j)));
        });

        // Best latent per instance (ties toward the lowest latent index). The
        // baseline is the instance's own mean over latent samples, so the
        // selected trajectory is always reinforced, never punished for
        // belonging to a hard instance.
        std::vector<int> selected(ib, 0);
        std::vector<double> baselines(ib, 0.0);
        double mean_best = 0.0;
        for (int b = 0; b < ib; ++b) {
            int best = 0;
            double mean_inst = 0.0;
            for (int j = 0; j < ls; ++j) {
                const double r = trajs[b * ls + j].undiscounted_return;
                mean_inst += r;
                if (r > trajs[b * ls + best].undiscounted_return)
                    best = j;
            }
            selected[b] = best;
            baselines[b] = mean_inst / ls;
            mean_best += trajs[b * ls + best].undiscounted_return;
        }
        for (const auto& t : trajs)
            env_steps += t.length();
        mean_best /= ib;
        if (!std::isfinite(mean_best))
            throw training_diverged_error("training diverged: non-finite return");

        if (diag && iter == 0) {
            diag->first_iter_returns.assign(ib, std::vector<double>(ls, 0.0));
            for (int b = 0; b < ib; ++b)
                for (int j = 0; j < ls; ++j)
                    diag->first_iter_returns[b][j] = trajs[b * ls + j].undiscounted_return;
            diag->first_iter_selected = selected;
        }

        parallel_for(ib, [&](std::size_t b) {
            grads[b].assign(result.params.theta.size(), 0.0);
            const auto& traj = trajs[b * ls + selected[b]];
            auto adv = returns_to_go(traj, discount);
            for (double& a : adv)
                a -= baselines[b];
            accumulate_policy_gradient(result.params, traj, latents[b * ls + selected[b]], adv,
                                       0.0, grads[b]);
        });
        std::vector<double> grad(result.params.theta.size(), 0.0);
        for (int b = 0; b < ib; ++b)
            for (size_t i = 0; i < grad.size(); ++i)
                grad[i] += grads[b][i] / ib;

        const double entropy = mean_entropy_sample(result.params, trajs, latents[0], 2);
        sgd_step(result.params, grad, cfg.lr);

        ++iter;
        result.curve.push_back({iter, env_steps, mean_best, entropy});
    }
    return result;
}

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw std::runtime_error("write_curve_csv: cannot open '" + path + "'");
    f << "iter,env_steps,mean_return,entropy\n";
    char buf[128];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof(buf), "%ld,%ld,%.17g,%.17g\n", p.iter, p.env_steps,
                      p.mean_return, p.entropy);
        f << buf;
    }
}

} // namespace inferum
