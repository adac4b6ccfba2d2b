#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "inferum/metrics.hpp"
#include "inferum/strategies.hpp"

namespace inferum {

inline constexpr const char* kCodeVersion = "inferum 0.1.0";

// One axis value of the budget grid: a deterministic round count ("r8") or a
// wall-clock limit in seconds ("s30").
struct LimitSpec {
    SearchBudget::Kind kind = SearchBudget::Kind::Rounds;
    int rounds = 1;
    double seconds = 0.0;

    std::string str() const;
    static LimitSpec parse(const std::string& text);
    SearchBudget budget(int parallel) const;
    uint64_t hash() const;
    double magnitude() const {
        return kind == SearchBudget::Kind::Rounds ? static_cast<double>(rounds) : seconds;
    }

    bool operator==(const LimitSpec& o) const { return str() == o.str(); }
};

struct GridSpec {
    std::vector<std::string> tasks;
    std::vector<StrategyConfig> strategies;
    std::vector<int> budgets_parallel;
    std::vector<LimitSpec> budgets_limit;
    int seeds = 128;
    uint64_t master_seed = 0;
    // task -> {"base": path, "compass": path}. The compass strategy runs on
    // the compass checkpoint, every other strategy on base.
    std::map<std::string, std::map<std::string, std::string>> checkpoints;

    void validate() const;
};

struct EvalRow {
    std::string task_id;
    std::string strategy;
    int parallel = 0;
    LimitSpec limit;
    int seed = 0;
    double best_return = 0.0;
    int win = 0;
    long attempts_used = 0;
    double wall_seconds = 0.0;

    std::string key() const;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    std::string config_digest;
    std::string code_version = kCodeVersion;
    std::map<std::string, std::string> checkpoint_digests; // path -> digest
    std::vector<std::string> errors;                       // "cell key: message"
};

// Runs the full cross product with per-cell seeded reproducibility. Cells
// whose key is present in resume_from are copied instead of re-run; failures
// are recorded per cell and the run continues.
EvalReport run_grid(const GridSpec& spec, const EvalReport* resume_from = nullptr,
                    std::ostream* progress = nullptr);

// CSV embeds provenance as leading '#' comment lines; both formats round-trip
// through read_report.
void write_report_csv(const std::string& path, const EvalReport& report);
void write_report_json(const std::string& path, const EvalReport& report);
EvalReport read_report(const std::string& path);

struct ReportOptions {
    std::map<std::string, NormalizationBounds> bounds; // per task; identity when
                                                       // absent and single-task
    int n_boot = 1000;
    double level = 0.95;
    uint64_t seed = 1789;
    double mono_tolerance = 0.02;
    std::string scaling_limit; // empty: largest limit in the report
};

struct MonotonicityAudit {
    long violations = 0;
    long adjacent_pairs = 0;
};

// Writes summary.csv, contour_<task>.csv, scaling.csv and monotonicity.csv
// under outdir. Returns the aggregate monotonicity audit (count of adjacent
// contour cells whose mean normalized performance drops by more than
// mono_tolerance as budget grows). Throws on an empty report.
MonotonicityAudit write_report_outputs(const EvalReport& report, const std::string& outdir,
                                       const ReportOptions& options);

} // namespace inferum
