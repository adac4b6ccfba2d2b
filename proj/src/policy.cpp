#include "inferum/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_set>

namespace inferum {

namespace {

struct LayerView {
    long w_off;
    long b_off;
    int in;
    int out;
};

std::vector<LayerView> layer_views(const PolicyArch& arch) {
    std::vector<LayerView> layers;
    long off = 0;
    int in = arch.input_dim();
    for (int h : arch.hidden_sizes) {
        layers.push_back({off, off + static_cast<long>(h) * in, in, h});
        off += static_cast<long>(h) * in + h;
        in = h;
    }
    layers.push_back({off, off + static_cast<long>(arch.action_count) * in, in, arch.action_count});
    return layers;
}

// x = [obs_i || onehot(i) || z]
void agent_input(const PolicyArch& arch, const std::vector<double>& obs_i, int agent,
                 const LatentVector& latent, std::vector<double>& x) {
    x.assign(arch.input_dim(), 0.0);
    std::copy(obs_i.begin(), obs_i.end(), x.begin());
    x[arch.obs_dim + agent] = 1.0;
    for (int j = 0; j < arch.latent_dim; ++j)
        x[arch.obs_dim + arch.num_agents + j] = latent[j];
}

void check_inputs(const PolicyParams& params, const JointObservation& obs,
                  const LatentVector& latent) {
    const auto& arch = params.arch;
    if (static_cast<long>(params.theta.size()) != arch.param_count())
        throw std::invalid_argument("policy: theta length does not match arch");
    if (static_cast<int>(obs.per_agent.size()) != arch.num_agents)
        throw std::invalid_argument("policy: observation has wrong number of agents");
    for (const auto& o : obs.per_agent)
        if (static_cast<int>(o.size()) != arch.obs_dim)
            throw std::invalid_argument("policy: observation dimension mismatch");
    if (static_cast<int>(latent.size()) != arch.latent_dim)
        throw std::invalid_argument(arch.latent_dim == 0
                                        ? "policy: latent given to a latent-free policy"
                                        : "policy: latent dimension mismatch");
}

// Forward for one agent; optionally records post-activation values per layer
// (inputs first, logits last) for the backward pass.
std::vector<double> agent_forward(const PolicyParams& params, const std::vector<LayerView>& layers,
                                  const std::vector<double>& x,
                                  std::vector<std::vector<double>>* acts = nullptr) {
    const double* th = params.theta.data();
    std::vector<double> cur = x;
    if (acts)
        acts->push_back(cur);
    for (size_t l = 0; l < layers.size(); ++l) {
        const auto& L = layers[l];
        std::vector<double> next(L.out);
        for (int o = 0; o < L.out; ++o) {
            const double* w = th + L.w_off + static_cast<long>(o) * L.in;
            double acc = th[L.b_off + o];
            for (int i = 0; i < L.in; ++i)
                acc += w[i] * cur[i];
            next[o] = acc;
        }
        if (l + 1 < layers.size())
            for (double& v : next)
                v = std::tanh(v);
        cur = std::move(next);
        if (acts)
            acts->push_back(cur);
    }
    return cur;
}

void agent_backward(const PolicyParams& params, const std::vector<LayerView>& layers,
                    const std::vector<std::vector<double>>& acts, std::vector<double> dlogits,
                    std::vector<double>& grad) {
    const double* th = params.theta.data();
    std::vector<double> dcur = std::move(dlogits);
    for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
        const auto& L = layers[l];
        const auto& input = acts[l];
        for (int o = 0; o < L.out; ++o) {
            double* gw = grad.data() + L.w_off + static_cast<long>(o) * L.in;
            const double d = dcur[o];
            for (int i = 0; i < L.in; ++i)
                gw[i] += d * input[i];
            grad[L.b_off + o] += d;
        }
        if (l == 0)
            break;
        std::vector<double> dprev(L.in, 0.0);
        for (int o = 0; o < L.out; ++o) {
            const double* w = th + L.w_off + static_cast<long>(o) * L.in;
            const double d = dcur[o];
            for (int i = 0; i < L.in; ++i)
                dprev[i] += d * w[i];
        }
        // input of layer l is tanh output of layer l-1
        for (int i = 0; i < L.in; ++i)
            dprev[i] *= 1.0 - input[i] * input[i];
        dcur = std::move(dprev);
    }
}

} // namespace

void PolicyArch::validate() const {
    if (obs_dim < 1 || action_count < 2 || num_agents < 1 || latent_dim < 0)
        throw std::invalid_argument("PolicyArch: invalid dimensions");
    for (int h : hidden_sizes)
        if (h < 1)
            throw std::invalid_argument("PolicyArch: hidden sizes must be positive");
}

PolicyParams policy_init(const PolicyArch& arch, Rng rng) {
    arch.validate();
    PolicyParams p;
    p.arch = arch;
    p.theta.assign(arch.param_count(), 0.0);
    for (const auto& L : layer_views(arch)) {
        const double s = 1.0 / std::sqrt(static_cast<double>(L.in));
        for (long i = 0; i < static_cast<long>(L.out) * L.in; ++i)
            p.theta[L.w_off + i] = rng.next_uniform(-s, s);
    }
    return p;
}

JointDistribution forward(const PolicyParams& params, const JointObservation& obs,
                          const LatentVector& latent) {
    check_inputs(params, obs, latent);
    const auto layers = layer_views(params.arch);
    JointDistribution dist;
    dist.per_agent_logits.resize(params.arch.num_agents);
    std::vector<double> x;
    for (int i = 0; i < params.arch.num_agents; ++i) {
        agent_input(params.arch, obs.per_agent[i], i, latent, x);
        dist.per_agent_logits[i] = agent_forward(params, layers, x);
    }
    return dist;
}

std::vector<double> softmax(const std::vector<double>& logits, double temperature) {
    if (!(temperature > 0.0))
        throw std::invalid_argument("softmax: temperature must be positive");
    double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp((logits[i] - mx) / temperature);
        sum += p[i];
    }
    for (double& v : p)
        v /= sum;
    return p;
}

double distribution_entropy(const std::vector<double>& logits) {
    const auto p = softmax(logits);
    double h = 0.0;
    for (double v : p)
        if (v > 0.0)
            h -= v * std::log(v);
    return h;
}

std::pair<JointAction, double> sample_joint(const PolicyParams& params, const JointObservation& obs,
                                            const LatentVector& latent, double temperature,
                                            Rng& rng) {
    if (!(temperature > 0.0))
        throw std::invalid_argument("sample_joint: temperature must be positive");
    const auto dist = forward(params, obs, latent);
    JointAction action;
    action.per_agent.reserve(params.arch.num_agents);
    double logprob = 0.0;
    for (const auto& logits : dist.per_agent_logits) {
        const auto p = softmax(logits, temperature);
        const double u = rng.next_double();
        double acc = 0.0;
        int chosen = static_cast<int>(p.size()) - 1;
        for (size_t a = 0; a < p.size(); ++a) {
            acc += p[a];
            if (u < acc) {
                chosen = static_cast<int>(a);
                break;
            }
        }
        action.per_agent.push_back(chosen);
        logprob += std::log(std::max(p[chosen], 1e-300));
    }
    return {std::move(action), logprob};
}

JointAction greedy_joint(const PolicyParams& params, const JointObservation& obs,
                         const LatentVector& latent) {
    const auto dist = forward(params, obs, latent);
    JointAction action;
    action.per_agent.reserve(params.arch.num_agents);
    for (const auto& logits : dist.per_agent_logits) {
        int best = 0;
        for (size_t a = 1; a < logits.size(); ++a)
            if (logits[a] > logits[best])
                best = static_cast<int>(a);
        action.per_agent.push_back(best);
    }
    return action;
}

std::vector<JointAction> topk_joint(const PolicyParams& params, const JointObservation& obs,
                                    const LatentVector& latent, int k, TopkMode mode, Rng* rng) {
    if (k < 1)
        throw std::invalid_argument("topk_joint: k must be >= 1");
    const int n = params.arch.num_agents;
    const int a_count = params.arch.action_count;

    if (mode == TopkMode::Sampled) {
        if (!rng)
            throw std::invalid_argument("topk_joint: sampled mode needs an rng");
        std::vector<JointAction> out;
        std::unordered_set<std::string> seen;
        const long max_draws = 64L * k;
        std::vector<JointAction> overflow;
        for (long d = 0; d < max_draws && static_cast<int>(out.size()) < k; ++d) {
            auto [act, lp] = sample_joint(params, obs, latent, 1.0, *rng);
            (void)lp;
            std::string key(act.per_agent.begin(), act.per_agent.end());
            if (seen.insert(std::move(key)).second)
                out.push_back(std::move(act));
            else
                overflow.push_back(std::move(act));
        }
        for (size_t i = 0; static_cast<int>(out.size()) < k; ++i)
            out.push_back(overflow[i % overflow.size()]);
        return out;
    }

    double joint_space = 1.0;
    for (int i = 0; i < n; ++i)
        joint_space *= a_count;
    if (static_cast<double>(k) > joint_space)
        throw std::invalid_argument("topk_joint: k exceeds the joint action space in exact mode");

    const auto dist = forward(params, obs, latent);

    // Per-agent action order by descending logit, ties toward lower index.
    std::vector<std::vector<int>> order(n);
    std::vector<std::vector<double>> score(n); // log-probs in that order
    for (int i = 0; i < n; ++i) {
        order[i].resize(a_count);
        std::iota(order[i].begin(), order[i].end(), 0);
        const auto& lg = dist.per_agent_logits[i];
        std::stable_sort(order[i].begin(), order[i].end(),
                         [&lg](int a, int b) { return lg[a] > lg[b]; });
        const auto p = softmax(lg);
        score[i].resize(a_count);
        for (int r = 0; r < a_count; ++r)
            score[i][r] = std::log(std::max(p[order[i][r]], 1e-300));
    }

    // Best-first over rank tuples; ties resolved by lexicographic rank order.
    struct Item {
        double sum;
        std::vector<int> ranks;
    };
    auto worse = [](const Item& a, const Item& b) {
        if (a.sum != b.sum)
            return a.sum < b.sum;
        return a.ranks > b.ranks;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(worse)> heap(worse);
    std::unordered_set<std::string> visited;
    auto push = [&](std::vector<int> ranks) {
        std::string key(ranks.begin(), ranks.end());
        if (!visited.insert(std::move(key)).second)
            return;
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += score[i][ranks[i]];
        heap.push({s, std::move(ranks)});
    };
    push(std::vector<int>(n, 0));

    std::vector<JointAction> out;
    out.reserve(k);
    while (static_cast<int>(out.size()) < k) {
        Item it = heap.top();
        heap.pop();
        JointAction act;
        act.per_agent.resize(n);
        for (int i = 0; i < n; ++i)
            act.per_agent[i] = order[i][it.ranks[i]];
        out.push_back(std::move(act));
        for (int i = 0; i < n; ++i) {
            if (it.ranks[i] + 1 < a_count) {
                auto nr = it.ranks;
                nr[i] += 1;
                push(std::move(nr));
            }
        }
    }
    return out;
}

std::vector<double> grad_logprob(const PolicyParams& params, const Trajectory& trajectory,
                                 const LatentVector& latent,
                                 const std::vector<double>& advantages) {
    std::vector<double> grad(params.theta.size(), 0.0);
    accumulate_policy_gradient(params, trajectory, latent, advantages, 0.0, grad);
    return grad;
}

void accumulate_policy_gradient(const PolicyParams& params, const Trajectory& trajectory,
                                const LatentVector& latent, const std::vector<double>& advantages,
                                double entropy_coef, std::vector<double>& grad) {
    if (advantages.size() != trajectory.steps.size())
        throw std::invalid_argument("policy gradient: one advantage per step required");
    if (grad.size() != params.theta.size())
        throw std::invalid_argument("policy gradient: grad buffer has wrong size");
    const auto layers = layer_views(params.arch);
    const int n = params.arch.num_agents;
    std::vector<double> x;
    for (size_t t = 0; t < trajectory.steps.size(); ++t) {
        const auto& step = trajectory.steps[t];
        check_inputs(params, step.obs, latent);
        if (static_cast<int>(step.action.per_agent.size()) != n)
            throw std::invalid_argument("policy gradient: action arity mismatch");
        const double adv = advantages[t];
        for (int i = 0; i < n; ++i) {
            const int a = step.action.per_agent[i];
            if (a < 0 || a >= params.arch.action_count)
                throw std::invalid_argument("policy gradient: action index out of range");
            if (adv == 0.0 && entropy_coef == 0.0)
                continue;
            agent_input(params.arch, step.obs.per_agent[i], i, latent, x);
            std::vector<std::vector<double>> acts;
            const auto logits = agent_forward(params, layers, x, &acts);
            const auto p = softmax(logits);
            std::vector<double> dlogits(p.size(), 0.0);
            for (size_t j = 0; j < p.size(); ++j)
                dlogits[j] = adv * ((static_cast<int>(j) == a ? 1.0 : 0.0) - p[j]);
            if (entropy_coef != 0.0) {
                double h = 0.0;
                for (double v : p)
                    if (v > 0.0)
                        h -= v * std::log(v);
                for (size_t j = 0; j < p.size(); ++j)
                    if (p[j] > 0.0)
                        dlogits[j] += entropy_coef * (-p[j] * (std::log(p[j]) + h));
            }
            acts.pop_back(); // logits are not an input to any layer
            agent_backward(params, layers, acts, std::move(dlogits), grad);
        }
    }
}

PolicyParams reincarnate(const PolicyParams& params, int latent_dim, double noise_amplitude,
                         Rng rng) {
    if (params.arch.latent_dim != 0)
        throw std::invalid_argument("reincarnate: policy is already latent-conditioned");
    if (latent_dim < 1)
        throw std::invalid_argument("reincarnate: latent_dim must be >= 1");
    if (noise_amplitude < 0.0)
        throw std::invalid_argument("reincarnate: noise_amplitude must be >= 0");

    PolicyParams out;
    out.arch = params.arch;
    out.arch.latent_dim = latent_dim;
    out.version = params.version;
    out.theta.reserve(out.arch.param_count());

    const auto old_layers = layer_views(params.arch);
    const auto& L0 = old_layers[0];
    // First layer rows gain latent_dim new columns at the end of the input.
    for (int o = 0; o < L0.out; ++o) {
        const double* w = params.theta.data() + L0.w_off + static_cast<long>(o) * L0.in;
        out.theta.insert(out.theta.end(), w, w + L0.in);
        for (int j = 0; j < latent_dim; ++j)
            out.theta.push_back(rng.next_uniform(-noise_amplitude, noise_amplitude));
    }
    // Everything after the first weight block is unchanged.
    out.theta.insert(out.theta.end(), params.theta.begin() + L0.b_off, params.theta.end());

    if (static_cast<long>(out.theta.size()) != out.arch.param_count())
        throw std::logic_error("reincarnate: parameter layout mismatch");
    return out;
}

} // namespace inferum
