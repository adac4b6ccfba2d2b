#pragma once

#include <string>
#include <vector>

#include "inferum/parallel.hpp"
#include "inferum/policy.hpp"

namespace inferum {

// Base-policy trainer: REINFORCE over the task's instance distribution with
// a per-batch mean-return baseline and optional entropy bonus, plain SGD.
struct TrainConfig {
    long total_env_steps = 150000;
    int batch_instances = 64;
    double lr = 0.003;
    double discount = 0.99;
    double entropy_coef = 0.0;
    uint64_t seed = 0;
    std::vector<int> hidden_sizes{64, 256, 64};
};

struct CurvePoint {
    long iter = 0;
    long env_steps = 0;
    double mean_return = 0.0; // undiscounted
    double entropy = 0.0;     // mean policy entropy on a batch subsample
};

struct TrainResult {
    PolicyParams params;
    std::vector<CurvePoint> curve;
};

TrainResult train_base(const std::string& task_id, const TrainConfig& cfg);

// Latent-specialization phase: reincarnates the base policy, then per
// iteration samples instances and latent vectors from the uniform [-1, 1]
// prior, rolls out every (instance, latent) pair and applies the policy
// gradient only through the best-return latent of each instance.
struct CompassTrainConfig {
    int instances_batch = 16;
    int latent_samples = 16; // >= 2; 1 degenerates to plain fine-tuning
    int latent_dim = 8;
    double lr = 0.001;
    long total_env_steps = 200000;
    uint64_t seed = 0;
    double noise_amplitude = 0.01; // reincarnation init range
};

// First-iteration instrumentation for tests: the full return matrix and
// which latent index was selected per instance.
struct CompassDiagnostics {
    std::vector<std::vector<double>> first_iter_returns;
    std::vector<int> first_iter_selected;
};

TrainResult train_compass(const PolicyParams& base, const std::string& task_id,
                          const CompassTrainConfig& cfg, CompassDiagnostics* diag = nullptr);

// Latent prior draw: entries uniform in [-1, 1].
LatentVector sample_latent_prior(int latent_dim, Rng& rng);

void write_curve_csv(const std::string& path, const std::vector<CurvePoint>& curve);

} // namespace inferum
