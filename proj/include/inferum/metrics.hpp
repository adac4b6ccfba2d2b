#pragma once

#include <functional>
#include <string>
#include <vector>

#include "inferum/parallel.hpp"
#include "inferum/rng.hpp"

namespace inferum {

// Per-task collection of per-seed scalars (returns or 0/1 win indicators).
struct TaskSample {
    enum class Kind { Return, WinRate };

    std::string task_id;
    std::vector<double> values;
    Kind kind = Kind::Return;
};

struct NormalizationBounds {
    std::string task_id;
    double min_return = 0.0;
    double max_return = 1.0;
};

// Interquartile mean: mean of the middle 50% after sorting, with linear
// weights at the quartile cut points when n is not divisible by 4. Requires
// at least 4 values. Zero-weight tails are skipped entirely, so corrupting
// the extremes (even to +-inf) cannot leak into the result.
double iqm(const std::vector<double>& values);

// Aggregate over tasks used for cross-task reporting: IQM of the pooled
// per-seed values.
double pooled_iqm(const std::vector<TaskSample>& samples);

using Statistic = std::function<double(const std::vector<TaskSample>&)>;

// Percentile bootstrap interval of `statistic`, resampling with replacement
// within each task (stratum). Deterministic in seed; replicates run in
// parallel on independent substreams.
std::pair<double, double> stratified_bootstrap_ci(const std::vector<TaskSample>& samples,
                                                  const Statistic& statistic, int n_boot,
                                                  double level, uint64_t seed,
                                                  Exec mode = Exec::Parallel);

// (v - min) / (max - min), clipped to [0, 1].
double normalize(double value, const NormalizationBounds& bounds);

} // namespace inferum
