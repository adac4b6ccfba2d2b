#pragma once

#include <memory>
#include <string>
#include <utility>

#include "inferum/types.hpp"

namespace inferum {

// Opaque, cloneable environment state. Cloning lets tree search branch from a
// partial solution without replaying its prefix. key() is a canonical
// serialization used by exhaustive search to deduplicate states.
class EnvState {
public:
    virtual ~EnvState() = default;
    virtual std::unique_ptr<EnvState> clone() const = 0;
    virtual std::string key() const = 0;
    virtual bool terminal() const = 0;
    virtual int step_count() const = 0;
};

using StatePtr = std::unique_ptr<EnvState>;

// Environments are immutable-after-construction values; stepping never
// mutates the input state, it produces a new one. Safe to share across
// workers.
class Environment {
public:
    virtual ~Environment() = default;

    virtual const EnvDescriptor& descriptor() const = 0;

    // Deterministic function of (task_id, instance_seed).
    virtual std::pair<StatePtr, JointObservation> reset(const InstanceSpec& instance) const = 0;

    // Deterministic given (state, action). Throws if state is terminal or an
    // action index is out of range. done is forced true at step == horizon.
    virtual std::pair<StatePtr, StepOutcome> step(const EnvState& state,
                                                  const JointAction& action) const = 0;

    virtual JointObservation observe(const EnvState& state) const = 0;
};

using EnvPtr = std::shared_ptr<const Environment>;

} // namespace inferum
