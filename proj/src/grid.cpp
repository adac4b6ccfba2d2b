#include "inferum/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "inferum/checkpoint.hpp"
#include "inferum/parallel.hpp"
#include "inferum/registry.hpp"

namespace inferum {

namespace {

using nlohmann::json;

std::string fmt_double(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string LimitSpec::str() const {
    if (kind == SearchBudget::Kind::Rounds)
        return "r" + std::to_string(rounds);
    return "s" + fmt_double(seconds, "%g");
}

LimitSpec LimitSpec::parse(const std::string& text) {
    if (text.size() < 2 || (text[0] != 'r' && text[0] != 's'))
        throw std::invalid_argument("limit '" + text + "': expected r<rounds> or s<seconds>");
    LimitSpec l;
    try {
        if (text[0] == 'r') {
            l.kind = SearchBudget::Kind::Rounds;
            l.rounds = std::stoi(text.substr(1));
        } else {
            l.kind = SearchBudget::Kind::Seconds;
            l.seconds = std::stod(text.substr(1));
        }
    } catch (const std::exception&) {
        throw std::invalid_argument("limit '" + text + "': malformed number");
    }
    if (l.kind == SearchBudget::Kind::Rounds && l.rounds < 1)
        throw std::invalid_argument("limit '" + text + "': rounds must be >= 1");
    if (l.kind == SearchBudget::Kind::Seconds && !(l.seconds > 0.0))
        throw std::invalid_argument("limit '" + text + "': seconds must be > 0");
    return l;
}

SearchBudget LimitSpec::budget(int parallel) const {
    return kind == SearchBudget::Kind::Rounds ? SearchBudget::for_rounds(parallel, rounds)
                                              : SearchBudget::for_seconds(parallel, seconds);
}

uint64_t LimitSpec::hash() const { return stream_tag(str()); }

void GridSpec::validate() const {
    if (tasks.empty() || strategies.empty() || budgets_parallel.empty() || budgets_limit.empty())
        throw std::invalid_argument("grid: tasks, strategies, budgets_parallel and budgets_limit "
                                    "must be non-empty");
    if (seeds < 1)
        throw std::invalid_argument("grid: seeds must be >= 1");
    for (int p : budgets_parallel)
        if (p < 1)
            throw std::invalid_argument("grid: parallel attempts must be >= 1");
    for (const auto& task : tasks) {
        auto it = checkpoints.find(task);
        if (it == checkpoints.end())
            throw std::invalid_argument("grid: no checkpoints configured for task '" + task + "'");
        for (const auto& strat : strategies) {
            const std::string role = strat.name == "compass" ? "compass" : "base";
            if (!it->second.count(role))
                throw std::invalid_argument("grid: task '" + task + "' needs a '" + role +
                                            "' checkpoint for strategy '" + strat.name + "'");
        }
    }
}

std::string EvalRow::key() const {
    return task_id + "|" + strategy + "|" + std::to_string(parallel) + "|" + limit.str() + "|" +
           std::to_string(seed);
}

EvalReport run_grid(const GridSpec& spec, const EvalReport* resume_from, std::ostream* progress) {
    spec.validate();

    // Load every referenced checkpoint once, up front.
    std::map<std::string, PolicyParams> loaded;
    std::map<std::string, std::string> digests;
    for (const auto& task : spec.tasks) {
        for (const auto& [role, path] : spec.checkpoints.at(task)) {
            (void)role;
            if (!loaded.count(path)) {
                loaded.emplace(path, load_checkpoint(path).params);
                digests.emplace(path, file_digest(path));
            }
        }
    }

    std::map<std::string, const EvalRow*> done;
    if (resume_from)
        for (const auto& row : resume_from->rows)
            done.emplace(row.key(), &row);

    struct Cell {
        std::string task;
        const StrategyConfig* strat;
        int parallel;
        LimitSpec limit;
        int seed_idx;
    };
    std::vector<Cell> cells;
    for (const auto& task : spec.tasks)
        for (const auto& strat : spec.strategies)
            for (int parallel : spec.budgets_parallel)
                for (const auto& limit : spec.budgets_limit)
                    for (int k = 0; k < spec.seeds; ++k)
                        cells.push_back({task, &strat, parallel, limit, k});

    EvalReport report;
    report.checkpoint_digests = digests;
    report.rows.resize(cells.size());
    std::vector<uint8_t> ok(cells.size(), 0);
    std::mutex err_mutex;
    std::atomic<long> completed{0};

    parallel_for(cells.size(), [&](std::size_t i) {
        const Cell& c = cells[i];
        EvalRow row;
        row.task_id = c.task;
        row.strategy = c.strat->name;
        row.parallel = c.parallel;
        row.limit = c.limit;
        row.seed = c.seed_idx;
        if (auto it = done.find(row.key()); it != done.end()) {
            report.rows[i] = *it->second;
            ok[i] = 1;
            return;
        }
        try {
            EnvPtr env = lookup_task(c.task);
            const std::string role = c.strat->name == "compass" ? "compass" : "base";
            const PolicyParams& params = loaded.at(spec.checkpoints.at(c.task).at(role));

            // Per-seed streams deliberately ignore the budget axes: seed k of
            // a task runs the same instance at every (parallel, limit) cell,
            // and a strategy's attempt streams extend as the budget grows, so
            // per-seed performance is monotone along both axes.
            const uint64_t eval_seed = derive_seed(spec.master_seed, stream_tag("eval"),
                                                   stream_tag(c.task),
                                                   static_cast<uint64_t>(c.seed_idx));
            InstanceSpec inst{c.task, derive_seed(eval_seed, stream_tag("instance"))};
            const uint64_t search_seed =
                derive_seed(eval_seed, stream_tag("search"), stream_tag(c.strat->name));

            SearchResult res = run_budgeted(*c.strat, *env, params, inst,
                                            c.limit.budget(c.parallel), search_seed);
            row.best_return = res.best_return;
            row.win = res.best_trajectory.win.value_or(false) ? 1 : 0;
            row.attempts_used = res.attempts_used;
            row.wall_seconds = res.wall_seconds;
            report.rows[i] = std::move(row);
            ok[i] = 1;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(err_mutex);
            report.errors.push_back(row.key() + ": " + e.what());
        }
        const long n = ++completed;
        if (progress && n % 500 == 0) {
            std::lock_guard<std::mutex> lock(err_mutex);
            *progress << "grid: " << n << "/" << cells.size() << " cells\n";
        }
    });

    // Drop failed cells, keep deterministic loop order.
    std::vector<EvalRow> rows;
    rows.reserve(report.rows.size());
    for (size_t i = 0; i < report.rows.size(); ++i)
        if (ok[i])
            rows.push_back(std::move(report.rows[i]));
    report.rows = std::move(rows);
    std::sort(report.errors.begin(), report.errors.end());
    return report;
}

void write_report_csv(const std::string& path, const EvalReport& report) {
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw std::runtime_error("write_report_csv: cannot open '" + path + "'");
    f << "# config_digest=" << report.config_digest << "\n";
    f << "# code_version=" << report.code_version << "\n";
    for (const auto& [p, d] : report.checkpoint_digests)
        f << "# checkpoint_digest " << p << "=" << d << "\n";
    f << "task_id,strategy,parallel,limit,seed,best_return,win,attempts_used,wall_seconds\n";
    for (const auto& r : report.rows) {
        f << r.task_id << ',' << r.strategy << ',' << r.parallel << ',' << r.limit.str() << ','
          << r.seed << ',' << fmt_double(r.best_return) << ',' << r.win << ',' << r.attempts_used
          << ',' << fmt_double(r.wall_seconds, "%.6g") << "\n";
    }
}

void write_report_json(const std::string& path, const EvalReport& report) {
    json j;
    j["provenance"] = {{"config_digest", report.config_digest},
                       {"code_version", report.code_version},
                       {"checkpoint_digests", report.checkpoint_digests}};
    j["errors"] = report.errors;
    j["rows"] = json::array();
    for (const auto& r : report.rows) {
        j["rows"].push_back({{"task_id", r.task_id},
                             {"strategy", r.strategy},
                             {"parallel", r.parallel},
                             {"limit", r.limit.str()},
                             {"seed", r.seed},
                             {"best_return", r.best_return},
                             {"win", r.win},
                             {"attempts_used", r.attempts_used},
                             {"wall_seconds", r.wall_seconds}});
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f)
        throw std::runtime_error("write_report_json: cannot open '" + path + "'");
    f << j.dump(2) << "\n";
}

EvalReport read_report(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("read_report: cannot open '" + path + "'");
    EvalReport report;
    report.code_version.clear();

    if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
        json j = json::parse(f);
        const auto& prov = j.at("provenance");
        report.config_digest = prov.value("config_digest", "");
        report.code_version = prov.value("code_version", "");
        if (prov.contains("checkpoint_digests"))
            report.checkpoint_digests =
                prov.at("checkpoint_digests").get<std::map<std::string, std::string>>();
        if (j.contains("errors"))
            report.errors = j.at("errors").get<std::vector<std::string>>();
        for (const auto& r : j.at("rows")) {
            EvalRow row;
            row.task_id = r.at("task_id").get<std::string>();
            row.strategy = r.at("strategy").get<std::string>();
            row.parallel = r.at("parallel").get<int>();
            row.limit = LimitSpec::parse(r.at("limit").get<std::string>());
            row.seed = r.at("seed").get<int>();
            row.best_return = r.at("best_return").get<double>();
            row.win = r.at("win").get<int>();
            row.attempts_used = r.at("attempts_used").get<long>();
            row.wall_seconds = r.at("wall_seconds").get<double>();
            report.rows.push_back(std::move(row));
        }
        return report;
    }

    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        if (line[0] == '#') {
            const std::string body = line.substr(1);
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                continue;
            std::string k = body.substr(0, eq);
            std::string v = body.substr(eq + 1);
            while (!k.empty() && k.front() == ' ')
                k.erase(k.begin());
            if (k == "config_digest")
                report.config_digest = v;
            else if (k == "code_version")
                report.code_version = v;
            else if (k.rfind("checkpoint_digest ", 0) == 0)
                report.checkpoint_digests[k.substr(std::strlen("checkpoint_digest "))] = v;
            continue;
        }
        if (!header_seen) { // column header
            header_seen = true;
            continue;
        }
        const auto parts = split(line, ',');
        if (parts.size() != 9)
            throw std::runtime_error("read_report: malformed row '" + line + "'");
        EvalRow row;
        row.task_id = parts[0];
        row.strategy = parts[1];
        row.parallel = std::stoi(parts[2]);
        row.limit = LimitSpec::parse(parts[3]);
        row.seed = std::stoi(parts[4]);
        row.best_return = std::stod(parts[5]);
        row.win = std::stoi(parts[6]);
        row.attempts_used = std::stol(parts[7]);
        row.wall_seconds = std::stod(parts[8]);
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

struct GroupKey {
    std::string strategy;
    std::string limit;
    int parallel;

    bool operator<(const GroupKey& o) const {
        return std::tie(strategy, limit, parallel) < std::tie(o.strategy, o.limit, o.parallel);
    }
};

double normalized_value(const EvalRow& row, const ReportOptions& opt, bool single_task) {
    auto it = opt.bounds.find(row.task_id);
    if (it == opt.bounds.end()) {
        if (single_task)
            return row.best_return; // raw returns are fine within one task
        throw std::invalid_argument("report: normalization bounds required for task '" +
                                    row.task_id + "' when aggregating across tasks");
    }
    return normalize(row.best_return, it->second);
}

} // namespace

MonotonicityAudit write_report_outputs(const EvalReport& report, const std::string& outdir,
                                       const ReportOptions& options) {
    if (report.rows.empty())
        throw std::runtime_error("report: no rows to aggregate");
    std::filesystem::create_directories(outdir);

    std::set<std::string> tasks, strategies;
    std::set<std::string> limit_strs;
    std::set<int> parallels;
    for (const auto& r : report.rows) {
        tasks.insert(r.task_id);
        strategies.insert(r.strategy);
        limit_strs.insert(r.limit.str());
        parallels.insert(r.parallel);
    }
    const bool single_task = tasks.size() == 1;

    std::vector<LimitSpec> limits;
    for (const auto& s : limit_strs)
        limits.push_back(LimitSpec::parse(s));
    std::sort(limits.begin(), limits.end(), [](const LimitSpec& a, const LimitSpec& b) {
        if (a.kind != b.kind)
            return a.kind < b.kind;
        return a.magnitude() < b.magnitude();
    });

    const std::string provenance_header = "# config_digest=" + report.config_digest +
                                          "\n# code_version=" + report.code_version + "\n";

    // summary.csv: IQM with bootstrap CI per (strategy, limit, parallel),
    // stratified by task.
    {
        std::map<GroupKey, std::map<std::string, std::vector<double>>> groups;
        for (const auto& r : report.rows)
            groups[{r.strategy, r.limit.str(), r.parallel}][r.task_id].push_back(
                normalized_value(r, options, single_task));
        std::ofstream f(outdir + "/summary.csv", std::ios::trunc);
        f << provenance_header;
        f << "strategy,limit,parallel,n,iqm,ci_lo,ci_hi\n";
        for (const auto& [key, by_task] : groups) {
            std::vector<TaskSample> samples;
            long n = 0;
            for (const auto& [task, values] : by_task) {
                samples.push_back({task, values, TaskSample::Kind::Return});
                n += static_cast<long>(values.size());
            }
            const double point = pooled_iqm(samples);
            const auto [lo, hi] = stratified_bootstrap_ci(samples, pooled_iqm, options.n_boot,
                                                          options.level, options.seed);
            f << key.strategy << ',' << key.limit << ',' << key.parallel << ',' << n << ','
              << fmt_double(point, "%.6f") << ',' << fmt_double(lo, "%.6f") << ','
              << fmt_double(hi, "%.6f") << "\n";
        }
    }

    // Per-task contour matrices (rows parallel, cols limit) and the
    // monotonicity audit: a violation is an adjacent cell pair where the mean
    // normalized performance drops by more than mono_tolerance as either
    // budget axis grows.
    MonotonicityAudit audit;
    {
        std::ofstream mono(outdir + "/monotonicity.csv", std::ios::trunc);
        mono << provenance_header;
        mono << "task_id,strategy,adjacent_pairs,violations\n";
        for (const auto& task : tasks) {
            std::ofstream f(outdir + "/contour_" + task + ".csv", std::ios::trunc);
            f << provenance_header;
            f << "strategy,parallel";
            for (const auto& l : limits)
                f << ',' << l.str();
            f << "\n";
            for (const auto& strat : strategies) {
                std::map<std::pair<int, std::string>, std::pair<double, long>> cells;
                for (const auto& r : report.rows) {
                    if (r.task_id != task || r.strategy != strat)
                        continue;
                    auto& cell = cells[{r.parallel, r.limit.str()}];
                    cell.first += normalized_value(r, options, single_task);
                    cell.second += 1;
                }
                std::vector<std::vector<double>> matrix;
                for (int p : parallels) {
                    std::vector<double> row;
                    f << strat << ',' << p;
                    for (const auto& l : limits) {
                        auto it = cells.find({p, l.str()});
                        const double v =
                            it == cells.end() || it->second.second == 0
                                ? std::numeric_limits<double>::quiet_NaN()
                                : it->second.first / static_cast<double>(it->second.second);
                        row.push_back(v);
                        f << ',' << fmt_double(v, "%.6f");
                    }
                    f << "\n";
                    matrix.push_back(std::move(row));
                }
                long pairs = 0, violations = 0;
                for (size_t i = 0; i < matrix.size(); ++i) {
                    for (size_t j = 0; j < matrix[i].size(); ++j) {
                        if (std::isnan(matrix[i][j]))
                            continue;
                        if (j + 1 < matrix[i].size() && !std::isnan(matrix[i][j + 1])) {
                            ++pairs;
                            if (matrix[i][j + 1] < matrix[i][j] - options.mono_tolerance)
                                ++violations;
                        }
                        if (i + 1 < matrix.size() && !std::isnan(matrix[i + 1][j])) {
                            ++pairs;
                            if (matrix[i + 1][j] < matrix[i][j] - options.mono_tolerance)
                                ++violations;
                        }
                    }
                }
                mono << task << ',' << strat << ',' << pairs << ',' << violations << "\n";
                audit.adjacent_pairs += pairs;
                audit.violations += violations;
            }
        }
    }

    // scaling.csv: fixed limit (largest by default), performance vs parallel.
    {
        LimitSpec scaling = limits.back();
        if (!options.scaling_limit.empty()) {
            scaling = LimitSpec::parse(options.scaling_limit);
            if (!limit_strs.count(scaling.str()))
                throw std::invalid_argument("report: scaling limit '" + options.scaling_limit +
                                            "' not present in the report");
        }
        std::ofstream f(outdir + "/scaling.csv", std::ios::trunc);
        f << provenance_header;
        f << "strategy,limit,parallel,n,iqm,ci_lo,ci_hi\n";
        for (const auto& strat : strategies) {
            for (int p : parallels) {
                std::map<std::string, std::vector<double>> by_task;
                for (const auto& r : report.rows)
                    if (r.strategy == strat && r.parallel == p && r.limit.str() == scaling.str())
                        by_task[r.task_id].push_back(normalized_value(r, options, single_task));
                if (by_task.empty())
                    continue;
                std::vector<TaskSample> samples;
                long n = 0;
                for (const auto& [task, values] : by_task) {
                    samples.push_back({task, values, TaskSample::Kind::Return});
                    n += static_cast<long>(values.size());
                }
                const double point = pooled_iqm(samples);
                const auto [lo, hi] = stratified_bootstrap_ci(samples, pooled_iqm, options.n_boot,
                                                              options.level, options.seed);
                f << strat << ',' << scaling.str() << ',' << p << ',' << n << ','
                  << fmt_double(point, "%.6f") << ',' << fmt_double(lo, "%.6f") << ','
                  << fmt_double(hi, "%.6f") << "\n";
            }
        }
    }
    return audit;
}

} // namespace inferum
