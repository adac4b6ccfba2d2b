#include "inferum/types.hpp"

namespace inferum {

double trajectory_return(const Trajectory& t) {
    double sum = 0.0;
    for (const auto& s : t.steps)
        sum += s.reward;
    return sum;
}

} // namespace inferum
