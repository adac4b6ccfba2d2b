#include "inferum/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace inferum {

double iqm(const std::vector<double>& values) {
    const int n = static_cast<int>(values.size());
    if (n < 4)
        throw std::invalid_argument("iqm: need at least 4 values");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double lo = 0.25 * n;
    const double hi = 0.75 * n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = std::min(hi, i + 1.0) - std::max(lo, static_cast<double>(i));
        if (w > 0.0) {
            num += w * sorted[i];
            den += w;
        }
    }
    return num / den;
}

double pooled_iqm(const std::vector<TaskSample>& samples) {
    std::vector<double> pooled;
    for (const auto& s : samples)
        pooled.insert(pooled.end(), s.values.begin(), s.values.end());
    return iqm(pooled);
}

namespace {

double percentile(std::vector<double>& sorted_values, double p) {
    const size_t n = sorted_values.size();
    const double h = p * (n - 1);
    const size_t lo = static_cast<size_t>(std::floor(h));
    const size_t hi = std::min(lo + 1, n - 1);
    const double frac = h - lo;
    return (1.0 - frac) * sorted_values[lo] + frac * sorted_values[hi];
}

} // namespace

std::pair<double, double> stratified_bootstrap_ci(const std::vector<TaskSample>& samples,
                                                  const Statistic& statistic, int n_boot,
                                                  double level, uint64_t seed, Exec mode) {
    if (n_boot < 100)
        throw std::invalid_argument("stratified_bootstrap_ci: n_boot must be >= 100");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("stratified_bootstrap_ci: level must be in (0,1)");
    if (samples.empty())
        throw std::invalid_argument("stratified_bootstrap_ci: no samples");
    for (const auto& s : samples)
        if (s.values.empty())
            throw std::invalid_argument("stratified_bootstrap_ci: empty stratum '" + s.task_id +
                                        "'");

    std::vector<double> stats(n_boot);
    parallel_for(
        n_boot,
        [&](std::size_t r) {
            std::vector<TaskSample> resampled = samples;
            for (size_t s = 0; s < samples.size(); ++s) {
                Rng rng(derive_seed(seed, stream_tag("boot"), r, s));
                const auto& src = samples[s].values;
                auto& dst = resampled[s].values;
                for (size_t i = 0; i < src.size(); ++i)
                    dst[i] = src[rng.next_int(static_cast<int>(src.size()))];
            }
            stats[r] = statistic(resampled);
        },
        mode);

    std::sort(stats.begin(), stats.end());
    const double alpha = (1.0 - level) / 2.0;
    return {percentile(stats, alpha), percentile(stats, 1.0 - alpha)};
}

double normalize(double value, const NormalizationBounds& bounds) {
    if (!(bounds.min_return < bounds.max_return))
        throw std::invalid_argument("normalize: degenerate bounds for '" + bounds.task_id + "'");
    const double v = (value - bounds.min_return) / (bounds.max_return - bounds.min_return);
    return std::clamp(v, 0.0, 1.0);
}

} // namespace inferum
