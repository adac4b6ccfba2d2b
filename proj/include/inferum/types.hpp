#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace inferum {

// Static description of a task: sizes the policy needs plus the horizon and
// training discount. Dynamics live behind the Environment interface.
struct EnvDescriptor {
    std::string task_id;
    int num_agents = 1;
    int action_count = 2;   // uniform across agents
    int obs_dim = 1;        // flattened per-agent observation length
    int horizon = 1;
    double discount = 0.99; // training only; inference scoring is undiscounted

    void validate() const {
        if (num_agents < 1)
            throw std::invalid_argument("EnvDescriptor: num_agents must be >= 1");
        if (action_count < 2)
            throw std::invalid_argument("EnvDescriptor: action_count must be >= 2");
        if (obs_dim < 1)
            throw std::invalid_argument("EnvDescriptor: obs_dim must be >= 1");
        if (horizon < 1)
            throw std::invalid_argument("EnvDescriptor: horizon must be >= 1");
        if (!(discount >= 0.0 && discount <= 1.0))
            throw std::invalid_argument("EnvDescriptor: discount must be in [0,1]");
    }
};

// A seeded problem instance. (task_id, instance_seed) fully determines the
// initial state and all environment stochasticity.
struct InstanceSpec {
    std::string task_id;
    uint64_t instance_seed = 0;
};

struct JointObservation {
    std::vector<std::vector<double>> per_agent; // num_agents x obs_dim
};

struct JointAction {
    std::vector<int> per_agent; // each < action_count

    bool operator==(const JointAction& o) const { return per_agent == o.per_agent; }
};

struct StepOutcome {
    JointObservation next_obs;
    double reward = 0.0; // shared team reward
    bool done = false;
    std::optional<bool> win; // set only when done, for tasks that define success
};

struct TrajectoryStep {
    JointObservation obs;
    JointAction action;
    double reward = 0.0;
};

// One full attempt. undiscounted_return is maintained by the rollout code and
// always equals the sum of step rewards.
struct Trajectory {
    std::vector<TrajectoryStep> steps;
    double undiscounted_return = 0.0;
    std::optional<bool> win;

    int length() const { return static_cast<int>(steps.size()); }
};

// Undiscounted sum of step rewards; the score a search maximizes. The
// training discount is never applied here.
double trajectory_return(const Trajectory& t);

// Dual budget: compute capacity (parallel attempts per round) plus either a
// wall-clock limit or a deterministic round count.
struct SearchBudget {
    enum class Kind { Rounds, Seconds };

    int parallel_attempts = 1;
    Kind kind = Kind::Rounds;
    int rounds = 1;
    double seconds = 0.0;

    static SearchBudget for_rounds(int parallel, int rounds) {
        if (parallel < 1)
            throw std::invalid_argument("SearchBudget: parallel_attempts must be >= 1");
        if (rounds < 1)
            throw std::invalid_argument("SearchBudget: rounds must be >= 1");
        SearchBudget b;
        b.parallel_attempts = parallel;
        b.kind = Kind::Rounds;
        b.rounds = rounds;
        return b;
    }

    static SearchBudget for_seconds(int parallel, double seconds) {
        if (parallel < 1)
            throw std::invalid_argument("SearchBudget: parallel_attempts must be >= 1");
        if (!(seconds > 0.0))
            throw std::invalid_argument("SearchBudget: seconds must be > 0");
        SearchBudget b;
        b.parallel_attempts = parallel;
        b.kind = Kind::Seconds;
        b.seconds = seconds;
        return b;
    }
};

struct budget_exceeded_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct training_diverged_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct degenerate_covariance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace inferum
