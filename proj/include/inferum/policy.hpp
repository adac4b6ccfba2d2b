#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "inferum/rng.hpp"
#include "inferum/types.hpp"

namespace inferum {

// Shared-weight feedforward joint policy. Every agent runs the same network
// on [own observation || agent-id one-hot || latent]; hidden layers are tanh,
// the head emits one logit per action. The joint distribution factorizes over
// agents.
struct PolicyArch {
    int obs_dim = 1;
    int action_count = 2;
    int num_agents = 1;
    int latent_dim = 0;
    std::vector<int> hidden_sizes{64, 256, 64};

    int input_dim() const { return obs_dim + num_agents + latent_dim; }

    long param_count() const {
        long total = 0;
        int in = input_dim();
        for (int h : hidden_sizes) {
            total += static_cast<long>(h) * in + h;
            in = h;
        }
        total += static_cast<long>(action_count) * in + action_count;
        return total;
    }

    void validate() const;

    bool operator==(const PolicyArch& o) const = default;
};

// Flat parameter vector over the layer layout: for each layer, row-major
// weights (out x in) followed by biases. This layout is part of the
// checkpoint format.
struct PolicyParams {
    PolicyArch arch;
    std::vector<double> theta;
    int version = 1;
};

struct JointDistribution {
    std::vector<std::vector<double>> per_agent_logits; // num_agents x action_count
};

using LatentVector = std::vector<double>; // empty means "no latent"

// Random initialization: weights uniform in +-1/sqrt(fan_in), biases zero.
PolicyParams policy_init(const PolicyArch& arch, Rng rng);

// Per-agent logits; deterministic. latent must be empty iff latent_dim == 0.
JointDistribution forward(const PolicyParams& params, const JointObservation& obs,
                          const LatentVector& latent = {});

std::vector<double> softmax(const std::vector<double>& logits, double temperature = 1.0);

double distribution_entropy(const std::vector<double>& logits);

// Joint sample at the given temperature; returns the summed per-agent
// log-probability of the sampled action (at that temperature).
std::pair<JointAction, double> sample_joint(const PolicyParams& params, const JointObservation& obs,
                                            const LatentVector& latent, double temperature, Rng& rng);

// Per-agent argmax; ties break toward the lowest action index.
JointAction greedy_joint(const PolicyParams& params, const JointObservation& obs,
                         const LatentVector& latent = {});

enum class TopkMode { ExactTopK, Sampled };

// The k highest-probability joint actions of the factored policy, exactly,
// via best-first expansion over per-agent sorted logits (ExactTopK), or k
// stochastic samples deduplicated and padded by resampling (Sampled; rng
// required). Exact mode orders ties deterministically and throws when k
// exceeds the joint action space.
std::vector<JointAction> topk_joint(const PolicyParams& params, const JointObservation& obs,
                                    const LatentVector& latent, int k,
                                    TopkMode mode = TopkMode::ExactTopK, Rng* rng = nullptr);

// Exact gradient of sum_t advantages[t] * log pi(a_t | o_t) w.r.t. theta,
// by reverse-mode accumulation through the network. Same length as theta.
std::vector<double> grad_logprob(const PolicyParams& params, const Trajectory& trajectory,
                                 const LatentVector& latent, const std::vector<double>& advantages);

// grad_logprob plus entropy_coef * grad of sum_t entropy(pi(.|o_t)),
// accumulated into grad (training hot path; grad must be theta-sized).
void accumulate_policy_gradient(const PolicyParams& params, const Trajectory& trajectory,
                                const LatentVector& latent, const std::vector<double>& advantages,
                                double entropy_coef, std::vector<double>& grad);

// Widens the first layer to accept a latent input. Original weights are
// preserved exactly and new weights are uniform in +-noise_amplitude, so the
// widened policy computes the original function at z = 0.
PolicyParams reincarnate(const PolicyParams& params, int latent_dim, double noise_amplitude,
                         Rng rng);

} // namespace inferum
