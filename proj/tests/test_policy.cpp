#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "inferum/policy.hpp"

using namespace inferum;

namespace {

JointObservation random_obs(const PolicyArch& arch, Rng& rng) {
    JointObservation obs;
    obs.per_agent.resize(arch.num_agents);
    for (auto& v : obs.per_agent) {
        v.resize(arch.obs_dim);
        for (double& x : v)
            x = rng.next_uniform(-1, 1);
    }
    return obs;
}

PolicyArch tiny_arch(int obs = 5, int actions = 3, int agents = 2, int latent = 0,
                     std::vector<int> hidden = {8, 7}) {
    PolicyArch a;
    a.obs_dim = obs;
    a.action_count = actions;
    a.num_agents = agents;
    a.latent_dim = latent;
    a.hidden_sizes = std::move(hidden);
    return a;
}

// log pi(traj) weighted by advantages, for finite differencing.
double weighted_logprob(const PolicyParams& params, const Trajectory& traj,
                        const LatentVector& latent, const std::vector<double>& adv) {
    double total = 0.0;
    for (size_t t = 0; t < traj.steps.size(); ++t) {
        const auto dist = forward(params, traj.steps[t].obs, latent);
        for (int i = 0; i < params.arch.num_agents; ++i) {
            const auto p = softmax(dist.per_agent_logits[i]);
            total += adv[t] * std::log(p[traj.steps[t].action.per_agent[i]]);
        }
    }
    return total;
}

Trajectory random_traj(const PolicyArch& arch, int len, Rng& rng) {
    Trajectory traj;
    for (int t = 0; t < len; ++t) {
        TrajectoryStep step;
        step.obs = random_obs(arch, rng);
        for (int i = 0; i < arch.num_agents; ++i)
            step.action.per_agent.push_back(rng.next_int(arch.action_count));
        step.reward = rng.next_uniform(-1, 1);
        traj.steps.push_back(std::move(step));
    }
    return traj;
}

// All joint actions with their exact probabilities, by brute force.
std::vector<std::pair<double, std::vector<int>>> enumerate_joint_probs(
    const PolicyParams& params, const JointObservation& obs, const LatentVector& latent) {
    const auto dist = forward(params, obs, latent);
    const int n = params.arch.num_agents;
    const int a_count = params.arch.action_count;
    std::vector<std::vector<double>> probs(n);
    for (int i = 0; i < n; ++i)
        probs[i] = softmax(dist.per_agent_logits[i]);
    std::vector<std::pair<double, std::vector<int>>> out;
    std::vector<int> idx(n, 0);
    while (true) {
        double p = 1.0;
        for (int i = 0; i < n; ++i)
            p *= probs[i][idx[i]];
        out.push_back({p, idx});
        int i = 0;
        while (i < n && ++idx[i] == a_count) {
            idx[i] = 0;
            ++i;
        }
        if (i == n)
            break;
    }
    return out;
}

} // namespace

TEST_CASE("zero weights give uniform distributions") {
    PolicyArch arch = tiny_arch();
    PolicyParams p;
    p.arch = arch;
    p.theta.assign(arch.param_count(), 0.0);
    Rng rng(3);
    const auto obs = random_obs(arch, rng);
    const auto dist = forward(p, obs);
    for (const auto& logits : dist.per_agent_logits)
        for (double l : logits)
            CHECK(l == 0.0);
}

TEST_CASE("softmax normalizes to 1 within 1e-12") {
    Rng rng(5);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> logits(4);
        for (double& l : logits)
            l = rng.next_uniform(-20, 20);
        const auto p = softmax(logits);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    }
}

TEST_CASE("greedy takes the argmax, ties to the lowest index") {
    PolicyArch arch = tiny_arch(2, 3, 1, 0, {});
    // No hidden layers: logits = W obs + b; use bias-only weights.
    PolicyParams p;
    p.arch = arch;
    p.theta.assign(arch.param_count(), 0.0);
    // bias entries are the last action_count values
    const long bias_off = arch.param_count() - arch.action_count;
    p.theta[bias_off + 0] = 0.1;
    p.theta[bias_off + 1] = 0.9;
    p.theta[bias_off + 2] = 0.3;
    JointObservation obs;
    obs.per_agent = {{0.0, 0.0}};
    CHECK(greedy_joint(p, obs).per_agent[0] == 1);

    p.theta[bias_off + 1] = 0.1;
    p.theta[bias_off + 2] = 0.1; // all equal
    CHECK(greedy_joint(p, obs).per_agent[0] == 0);

    // Shift invariance: adding a constant to one agent's logits.
    for (int a = 0; a < 3; ++a)
        p.theta[bias_off + a] += 17.0;
    CHECK(greedy_joint(p, obs).per_agent[0] == 0);
}

TEST_CASE("tiny temperature matches greedy") {
    PolicyArch arch = tiny_arch();
    PolicyParams p = policy_init(arch, Rng(11));
    Rng orng(2);
    const auto obs = random_obs(arch, orng);
    const auto g = greedy_joint(p, obs);
    Rng srng(3);
    const auto [a, lp] = sample_joint(p, obs, {}, 1e-6, srng);
    (void)lp;
    CHECK(a.per_agent == g.per_agent);
    Rng bad(0);
    CHECK_THROWS_AS(sample_joint(p, obs, {}, 0.0, bad), std::invalid_argument);
}

TEST_CASE("sampling frequencies match softmax within 3 sigma") {
    PolicyArch arch = tiny_arch(2, 3, 1, 0, {});
    PolicyParams p;
    p.arch = arch;
    p.theta.assign(arch.param_count(), 0.0);
    const long bias_off = arch.param_count() - arch.action_count;
    p.theta[bias_off + 0] = 0.2;
    p.theta[bias_off + 1] = -0.4;
    p.theta[bias_off + 2] = 1.1;
    JointObservation obs;
    obs.per_agent = {{0.0, 0.0}};
    const auto probs = softmax({0.2, -0.4, 1.1});

    const int n = 100000;
    std::vector<int> counts(3, 0);
    Rng rng(1234);
    for (int i = 0; i < n; ++i)
        counts[sample_joint(p, obs, {}, 1.0, rng).first.per_agent[0]] += 1;
    for (int a = 0; a < 3; ++a) {
        const double freq = counts[a] / static_cast<double>(n);
        const double sigma = std::sqrt(probs[a] * (1 - probs[a]) / n);
        CHECK(std::abs(freq - probs[a]) < 3 * sigma + 1e-9);
    }
}

TEST_CASE("sampled logprob equals the summed per-agent log probabilities") {
    PolicyArch arch = tiny_arch();
    PolicyParams p = policy_init(arch, Rng(42));
    Rng orng(7);
    const auto obs = random_obs(arch, orng);
    Rng srng(8);
    const auto [a, lp] = sample_joint(p, obs, {}, 1.0, srng);
    const auto dist = forward(p, obs);
    double expect = 0.0;
    for (int i = 0; i < arch.num_agents; ++i)
        expect += std::log(softmax(dist.per_agent_logits[i])[a.per_agent[i]]);
    CHECK(lp == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("topk exact: two-agent worked example") {
    PolicyArch arch = tiny_arch(1, 2, 2, 0, {});
    PolicyParams p;
    p.arch = arch;
    p.theta.assign(arch.param_count(), 0.0);
    // input = [obs, onehot0, onehot1]; weights map one-hot to per-agent logits.
    // W is 2x3 row-major, bias 2. Agent probs: a1=(0.9,0.1), a2=(0.6,0.4).
    const double l1 = std::log(0.9 / 0.1); // logit gap for agent 1
    const double l2 = std::log(0.6 / 0.4);
    // logit(action 0) - logit(action 1) = gap, via the one-hot column.
    p.theta[0 * 3 + 1] = l1; // W[0][onehot0]
    p.theta[0 * 3 + 2] = l2; // W[0][onehot1]
    JointObservation obs;
    obs.per_agent = {{0.0}, {0.0}};
    const auto top2 = topk_joint(p, obs, {}, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].per_agent == std::vector<int>{0, 0}); // p = 0.54
    CHECK(top2[1].per_agent == std::vector<int>{0, 1}); // p = 0.36

    CHECK(topk_joint(p, obs, {}, 1)[0].per_agent == greedy_joint(p, obs).per_agent);
    CHECK_THROWS_AS(topk_joint(p, obs, {}, 5), std::invalid_argument);
}

TEST_CASE("topk exact equals brute-force enumeration") {
    Rng master(99);
    for (int rep = 0; rep < 10; ++rep) {
        const int agents = 1 + master.next_int(4);
        const int actions = 2 + master.next_int(3); // joint space <= 5^4? no: <= 4^4
        PolicyArch arch = tiny_arch(3, actions, agents, 0, {6});
        PolicyParams p = policy_init(arch, Rng(master.next_u64()));
        Rng orng(master.next_u64());
        const auto obs = random_obs(arch, orng);

        auto all = enumerate_joint_probs(p, obs, {});
        std::stable_sort(all.begin(), all.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        const int k = static_cast<int>(all.size());
        const auto top = topk_joint(p, obs, {}, k);
        REQUIRE(static_cast<int>(top.size()) == k);
        // Compare probabilities (ordering of exact ties may differ).
        const auto dist = forward(p, obs);
        std::vector<std::vector<double>> probs(agents);
        for (int i = 0; i < agents; ++i)
            probs[i] = softmax(dist.per_agent_logits[i]);
        for (int r = 0; r < k; ++r) {
            double q = 1.0;
            for (int i = 0; i < agents; ++i)
                q *= probs[i][top[r].per_agent[i]];
            CHECK(q == doctest::Approx(all[r].first).epsilon(1e-9));
        }
        // And the sets must match exactly.
        std::set<std::vector<int>> s1, s2;
        for (const auto& [q, idx] : all)
            s1.insert(idx);
        for (const auto& a : top)
            s2.insert(a.per_agent);
        CHECK(s1 == s2);
    }
}

TEST_CASE("topk sampled mode returns k actions deterministically") {
    PolicyArch arch = tiny_arch(4, 4, 2, 0, {8});
    PolicyParams p = policy_init(arch, Rng(5));
    Rng orng(6);
    const auto obs = random_obs(arch, orng);
    Rng r1(77), r2(77);
    const auto a = topk_joint(p, obs, {}, 6, TopkMode::Sampled, &r1);
    const auto b = topk_joint(p, obs, {}, 6, TopkMode::Sampled, &r2);
    REQUIRE(a.size() == 6);
    for (size_t i = 0; i < a.size(); ++i)
        CHECK(a[i].per_agent == b[i].per_agent);
    CHECK_THROWS_AS(topk_joint(p, obs, {}, 2, TopkMode::Sampled, nullptr),
                    std::invalid_argument);
}

TEST_CASE("grad_logprob: zero advantages give a zero vector") {
    PolicyArch arch = tiny_arch();
    PolicyParams p = policy_init(arch, Rng(21));
    Rng rng(22);
    const auto traj = random_traj(arch, 3, rng);
    const auto g = grad_logprob(p, traj, {}, {0.0, 0.0, 0.0});
    for (double v : g)
        CHECK(v == 0.0);
}

TEST_CASE("grad_logprob matches central finite differences") {
    Rng master(31337);
    for (int rep = 0; rep < 20; ++rep) {
        const int latent = rep % 3 == 0 ? 3 : 0;
        PolicyArch arch = tiny_arch(4 + rep % 3, 2 + rep % 3, 1 + rep % 2, latent, {6, 5});
        PolicyParams p = policy_init(arch, Rng(master.next_u64()));
        Rng rng(master.next_u64());
        const auto traj = random_traj(arch, 2, rng);
        LatentVector z(latent);
        for (double& v : z)
            v = rng.next_uniform(-1, 1);
        std::vector<double> adv{rng.next_uniform(-2, 2), rng.next_uniform(-2, 2)};

        const auto g = grad_logprob(p, traj, z, adv);
        const double eps = 1e-5;
        double num = 0.0, den = 0.0;
        for (size_t i = 0; i < p.theta.size(); ++i) {
            PolicyParams pp = p, pm = p;
            pp.theta[i] += eps;
            pm.theta[i] -= eps;
            const double fd =
                (weighted_logprob(pp, traj, z, adv) - weighted_logprob(pm, traj, z, adv)) /
                (2 * eps);
            num += (fd - g[i]) * (fd - g[i]);
            den += fd * fd;
        }
        CHECK(std::sqrt(num) <= 1e-4 * std::max(std::sqrt(den), 1e-12));
    }
}

TEST_CASE("zero-init single-step gradient is onehot minus uniform at the output bias") {
    PolicyArch arch = tiny_arch(3, 4, 1, 0, {5});
    PolicyParams p;
    p.arch = arch;
    p.theta.assign(arch.param_count(), 0.0);
    Trajectory traj;
    TrajectoryStep step;
    step.obs.per_agent = {{0.3, -0.2, 0.5}};
    step.action.per_agent = {2};
    traj.steps.push_back(step);
    const auto g = grad_logprob(p, traj, {}, {1.0});
    const long bias_off = arch.param_count() - arch.action_count;
    for (int a = 0; a < 4; ++a) {
        const double expect = (a == 2 ? 1.0 : 0.0) - 0.25;
        CHECK(g[bias_off + a] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("reincarnation preserves the base function at z = 0") {
    PolicyArch arch = tiny_arch(6, 3, 2, 0, {10, 8});
    PolicyParams base = policy_init(arch, Rng(8));
    PolicyParams wide = reincarnate(base, 4, 0.01, Rng(9));
    CHECK(wide.arch.latent_dim == 4);
    CHECK_THROWS_AS(reincarnate(wide, 4, 0.01, Rng(10)), std::invalid_argument);

    Rng orng(12);
    LatentVector z0(4, 0.0);
    for (int rep = 0; rep < 20; ++rep) {
        const auto obs = random_obs(arch, orng);
        const auto a = forward(base, obs);
        const auto b = forward(wide, obs, z0);
        for (int i = 0; i < arch.num_agents; ++i)
            for (int k = 0; k < arch.action_count; ++k)
                CHECK(a.per_agent_logits[i][k] == b.per_agent_logits[i][k]);
    }

    // New first-layer weights live in +-amplitude; a nonzero latent changes
    // the output.
    LatentVector z1(4, 1.0);
    const auto obs = random_obs(arch, orng);
    const auto a = forward(wide, obs, z0);
    const auto b = forward(wide, obs, z1);
    bool any_diff = false;
    for (int i = 0; i < arch.num_agents; ++i)
        for (int k = 0; k < arch.action_count; ++k)
            if (a.per_agent_logits[i][k] != b.per_agent_logits[i][k])
                any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("reincarnation growth stays under 2% for the default arch") {
    PolicyArch arch; // default hidden sizes
    arch.obs_dim = 29;
    arch.action_count = 5;
    arch.num_agents = 2;
    PolicyParams base = policy_init(arch, Rng(3));
    PolicyParams wide = reincarnate(base, 8, 0.01, Rng(4));
    const double growth = static_cast<double>(wide.theta.size() - base.theta.size()) /
                          static_cast<double>(base.theta.size());
    CHECK(growth <= 0.02);
    CHECK(growth > 0.0);
}
