#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "inferum/checkpoint.hpp"
#include "inferum/grid.hpp"
#include "inferum/oracle.hpp"
#include "inferum/registry.hpp"
#include "inferum/rollout.hpp"
#include "inferum/training.hpp"
#include "inferum/connector.hpp"
#include "inferum/warehouse.hpp"

namespace {

using nlohmann::json;
using namespace inferum;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw config_error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1;
        for (size_t i = 0; i < std::min(text.size(), e.byte); ++i)
            if (text[i] == '\n')
                ++line;
        throw config_error("config parse error in '" + path + "' at line " +
                           std::to_string(line) + ": " + e.what());
    }
}

const json& require_field(const json& j, const std::string& field, const std::string& where) {
    if (!j.contains(field))
        throw config_error("config: missing field '" + field + "' in " + where);
    return j.at(field);
}

// Optional explicit task definitions, registered before anything runs.
void apply_task_defs(const json& cfg) {
    if (!cfg.contains("task_defs"))
        return;
    for (const auto& [id, def] : cfg.at("task_defs").items()) {
        const std::string type = require_field(def, "type", "task_defs." + id).get<std::string>();
        try {
            if (type == "connector") {
                ConnectorConfig c;
                c.grid_size = def.value("grid_size", c.grid_size);
                c.num_agents = def.value("num_agents", c.num_agents);
                c.fov_radius = def.value("fov_radius", c.fov_radius);
                c.horizon = def.value("horizon", 2 * c.grid_size);
                register_task(id, make_connector(id, c));
            } else if (type == "warehouse") {
                WarehouseConfig c;
                c.grid_size = def.value("grid_size", c.grid_size);
                c.num_agents = def.value("num_agents", c.num_agents);
                c.num_shelves = def.value("num_shelves", c.num_agents);
                c.horizon = def.value("horizon", 4 * c.grid_size);
                register_task(id, make_warehouse(id, c));
            } else {
                throw config_error("task_defs." + id + ": unknown type '" + type + "'");
            }
        } catch (const std::invalid_argument& e) {
            throw config_error("task_defs." + id + ": " + e.what());
        }
    }
}

StrategyConfig strategy_from_json(const json& j) {
    StrategyConfig cfg;
    cfg.name = require_field(j, "name", "strategy entry").get<std::string>();
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.expansion_factor = j.value("expansion_factor", cfg.expansion_factor);
    cfg.beam_width = j.value("beam_width", cfg.beam_width);
    if (j.value("expansion_mode", "exact") == "sampled")
        cfg.expansion_mode = TopkMode::Sampled;
    cfg.lr = j.value("lr", cfg.lr);
    cfg.entropy_coef = j.value("entropy_coef", cfg.entropy_coef);
    cfg.sigma0 = j.value("sigma0", cfg.sigma0);
    cfg.cov_lr_scale = j.value("cov_lr_scale", cfg.cov_lr_scale);
    cfg.num_elites = j.value("num_elites", cfg.num_elites);
    return cfg;
}

std::map<std::string, NormalizationBounds> bounds_from_json(const json& cfg) {
    std::map<std::string, NormalizationBounds> out;
    if (!cfg.contains("normalization"))
        return out;
    for (const auto& [task, b] : cfg.at("normalization").items()) {
        NormalizationBounds nb;
        nb.task_id = task;
        nb.min_return = require_field(b, "min", "normalization." + task).get<double>();
        nb.max_return = require_field(b, "max", "normalization." + task).get<double>();
        if (!(nb.min_return < nb.max_return))
            throw config_error("normalization." + task + ": min must be < max");
        out.emplace(task, nb);
    }
    return out;
}

json search_result_json(const SearchResult& res, const std::string& task,
                        const std::string& strategy, uint64_t instance_seed, int parallel,
                        const std::string& limit) {
    json j;
    j["task_id"] = task;
    j["strategy"] = strategy;
    j["instance_seed"] = instance_seed;
    j["parallel"] = parallel;
    j["limit"] = limit;
    j["best_return"] = res.best_return;
    j["win"] = res.best_trajectory.win.value_or(false);
    j["attempts_used"] = res.attempts_used;
    j["rounds_used"] = res.rounds_used;
    j["wall_seconds"] = res.wall_seconds;
    j["skipped_updates"] = res.skipped_updates;
    j["curve"] = json::array();
    for (const auto& [attempts, best] : res.curve)
        j["curve"].push_back({attempts, best});
    j["best_actions"] = json::array();
    for (const auto& step : res.best_trajectory.steps)
        j["best_actions"].push_back(step.action.per_agent);
    return j;
}

int cmd_train(const std::string& config_path, const std::string& out_path, int64_t seed_flag,
              const std::vector<std::string>& overrides) {
    json cfg = load_config(config_path);
    apply_task_defs(cfg);
    const std::string task_id = require_field(cfg, "task_id", "config root").get<std::string>();
    json tr = cfg.value("training", json::object());

    json applied = json::object();
    for (const auto& ov : overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw config_error("--override expects key=value, got '" + ov + "'");
        const std::string key = ov.substr(0, eq);
        const std::string val = ov.substr(eq + 1);
        try {
            tr[key] = json::parse(val); // numbers, lists, booleans
        } catch (const json::parse_error&) {
            tr[key] = val;
        }
        applied[key] = tr[key];
    }

    TrainConfig tc;
    tc.total_env_steps = tr.value("total_env_steps", tc.total_env_steps);
    tc.batch_instances = tr.value("batch_instances", tc.batch_instances);
    tc.lr = tr.value("lr", tc.lr);
    tc.discount = tr.value("discount", tc.discount);
    tc.entropy_coef = tr.value("entropy_coef", tc.entropy_coef);
    tc.seed = tr.value("seed", static_cast<uint64_t>(0));
    if (seed_flag >= 0) {
        tc.seed = static_cast<uint64_t>(seed_flag);
        applied["seed"] = tc.seed;
    }
    tc.hidden_sizes = tr.value("hidden_sizes", tc.hidden_sizes);
    if (!task_registered(task_id))
        throw config_error("config: unknown task_id '" + task_id + "'");

    std::cerr << "training " << task_id << " for " << tc.total_env_steps << " env steps\n";
    TrainResult result = train_base(task_id, tc);

    json meta;
    meta["task_id"] = task_id;
    json effective = tr;
    effective["seed"] = tc.seed;
    meta["train_config_digest"] = json_digest(effective.dump());
    meta["overrides"] = applied;
    meta["code_version"] = kCodeVersion;
    save_checkpoint(out_path, result.params, meta.dump());
    write_curve_csv(out_path + ".curve.csv", result.curve);

    // Final greedy evaluation on held-out instances.
    EnvPtr env = lookup_task(task_id);
    double mean = 0.0;
    const int held = 32;
    for (int i = 0; i < held; ++i) {
        InstanceSpec inst{task_id, derive_seed(tc.seed, stream_tag("heldout"), i)};
        mean += rollout(*env, inst, result.params, {}, 1.0, Rng(0), /*greedy=*/true)
                    .undiscounted_return;
    }
    std::cout << "checkpoint: " << out_path << "\n";
    std::cout << "greedy_return_mean_heldout32: " << mean / held << "\n";
    return 0;
}

int cmd_compass(const std::string& config_path, const std::string& base_path,
                const std::string& out_path, int64_t seed_flag, bool verify) {
    json cfg = load_config(config_path);
    apply_task_defs(cfg);
    const std::string task_id = require_field(cfg, "task_id", "config root").get<std::string>();
    json cj = cfg.value("compass", json::object());

    Checkpoint base = load_checkpoint(base_path);
    if (base.params.arch.latent_dim != 0)
        throw config_error("compass: base checkpoint '" + base_path +
                           "' is already latent-conditioned (latent_dim > 0)");

    CompassTrainConfig cc;
    cc.instances_batch = cj.value("instances_batch", cc.instances_batch);
    cc.latent_samples = cj.value("latent_samples", cc.latent_samples);
    cc.latent_dim = cj.value("latent_dim", cc.latent_dim);
    cc.lr = cj.value("lr", cc.lr);
    cc.total_env_steps = cj.value("total_env_steps", cc.total_env_steps);
    cc.seed = cj.value("seed", static_cast<uint64_t>(0));
    if (seed_flag >= 0)
        cc.seed = static_cast<uint64_t>(seed_flag);
    cc.noise_amplitude = cj.value("noise_amplitude", cc.noise_amplitude);

    if (verify) {
        // The reincarnation invariant: before any specialization step, the
        // widened policy at z = 0 computes exactly the base function.
        PolicyParams widened =
            reincarnate(base.params, cc.latent_dim, cc.noise_amplitude,
                        Rng(derive_seed(cc.seed, stream_tag("reincarnate"))));
        EnvPtr env = lookup_task(task_id);
        LatentVector z0(widened.arch.latent_dim, 0.0);
        bool all_equal = true;
        for (int i = 0; i < 10; ++i) {
            InstanceSpec inst{task_id, derive_seed(cc.seed, stream_tag("probe"), i)};
            auto [state, obs] = env->reset(inst);
            (void)state;
            const auto a = forward(base.params, obs);
            const auto b = forward(widened, obs, z0);
            for (size_t ag = 0; ag < a.per_agent_logits.size(); ++ag)
                for (size_t k = 0; k < a.per_agent_logits[ag].size(); ++k)
                    if (a.per_agent_logits[ag][k] != b.per_agent_logits[ag][k])
                        all_equal = false;
        }
        std::cout << "verify_zero_latent: " << (all_equal ? "ok" : "MISMATCH") << "\n";
        if (!all_equal)
            return 1;
    }

    std::cerr << "latent specialization on " << task_id << " for " << cc.total_env_steps
              << " env steps\n";
    TrainResult result = train_compass(base.params, task_id, cc);

    json meta;
    meta["task_id"] = task_id;
    json effective = cj;
    effective["seed"] = cc.seed;
    meta["compass_config_digest"] = json_digest(effective.dump());
    meta["base_checkpoint_digest"] = file_digest(base_path);
    meta["code_version"] = kCodeVersion;
    save_checkpoint(out_path, result.params, meta.dump());
    write_curve_csv(out_path + ".curve.csv", result.curve);

    const double growth =
        static_cast<double>(result.params.theta.size() - base.params.theta.size()) /
        static_cast<double>(base.params.theta.size());
    std::cout << "checkpoint: " << out_path << "\n";
    std::cout << "param_growth: " << growth * 100.0 << "%\n";
    return 0;
}

int cmd_search(const std::string& checkpoint_path, const std::string& task_id, uint64_t seed,
               const std::string& strategy, int parallel, int rounds, double seconds,
               const json& strategy_opts, const std::string& out_path) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    EnvPtr env = lookup_task(task_id);
    const auto& desc = env->descriptor();
    if (ckpt.params.arch.obs_dim != desc.obs_dim ||
        ckpt.params.arch.action_count != desc.action_count ||
        ckpt.params.arch.num_agents != desc.num_agents)
        throw config_error("checkpoint arch (obs " + std::to_string(ckpt.params.arch.obs_dim) +
                           ", act " + std::to_string(ckpt.params.arch.action_count) + ", agents " +
                           std::to_string(ckpt.params.arch.num_agents) +
                           ") does not match task '" + task_id + "'");
    if (strategy == "compass" && ckpt.params.arch.latent_dim == 0)
        throw config_error("strategy 'compass' requires a latent-conditioned checkpoint "
                           "(latent_dim > 0); this one has latent_dim = 0");

    json sj = strategy_opts;
    sj["name"] = strategy;
    StrategyConfig cfg = strategy_from_json(sj);
    SearchBudget budget = rounds > 0 ? SearchBudget::for_rounds(parallel, rounds)
                                     : SearchBudget::for_seconds(parallel, seconds);

    InstanceSpec inst{task_id, derive_seed(seed, stream_tag("instance"))};
    const uint64_t search_seed = derive_seed(seed, stream_tag("search"));
    SearchResult res = run_budgeted(cfg, *env, ckpt.params, inst, budget, search_seed);

    const std::string limit = rounds > 0 ? "r" + std::to_string(rounds)
                                         : "s" + std::to_string(seconds);
    json out = search_result_json(res, task_id, strategy, inst.instance_seed, parallel, limit);
    out["seed"] = seed;
    out["checkpoint_digest"] = file_digest(checkpoint_path);
    const std::string text = out.dump(2);
    std::cout << text << "\n";
    if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::trunc);
        f << text << "\n";
    }
    return 0;
}

GridSpec grid_from_json(const json& cfg) {
    const json& g = require_field(cfg, "grid", "config root");
    GridSpec spec;
    spec.tasks = require_field(g, "tasks", "grid").get<std::vector<std::string>>();
    for (const auto& s : require_field(g, "strategies", "grid"))
        spec.strategies.push_back(strategy_from_json(s));
    spec.budgets_parallel = require_field(g, "budgets_parallel", "grid").get<std::vector<int>>();
    for (const auto& l : require_field(g, "budgets_limit", "grid"))
        spec.budgets_limit.push_back(LimitSpec::parse(l.get<std::string>()));
    spec.seeds = g.value("seeds", 128);
    spec.master_seed = g.value("master_seed", static_cast<uint64_t>(0));
    const json& cks = require_field(g, "checkpoints", "grid");
    for (const auto& [task, roles] : cks.items())
        for (const auto& [role, path] : roles.items())
            spec.checkpoints[task][role] = path.get<std::string>();
    return spec;
}

int cmd_grid(const std::string& config_path, const std::string& out_prefix, int64_t seed_flag,
             bool resume) {
    json cfg = load_config(config_path);
    apply_task_defs(cfg);
    GridSpec spec = grid_from_json(cfg);
    if (seed_flag >= 0)
        spec.master_seed = static_cast<uint64_t>(seed_flag);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    for (const auto& [task, roles] : spec.checkpoints)
        for (const auto& [role, path] : roles)
            if (!std::filesystem::exists(path))
                throw config_error("grid: checkpoint '" + path + "' for task '" + task +
                                   "' (" + role + ") does not exist");

    const std::string csv_path = out_prefix + ".csv";
    EvalReport previous;
    const EvalReport* resume_ptr = nullptr;
    if (resume && std::filesystem::exists(csv_path)) {
        previous = read_report(csv_path);
        resume_ptr = &previous;
        std::cerr << "resuming: " << previous.rows.size() << " rows already present\n";
    }

    EvalReport report = run_grid(spec, resume_ptr, &std::cerr);
    report.config_digest = json_digest(cfg.dump());

    // Atomic publish: write to temp names, then rename.
    write_report_csv(csv_path + ".tmp", report);
    write_report_json(out_prefix + ".json.tmp", report);
    std::filesystem::rename(csv_path + ".tmp", csv_path);
    std::filesystem::rename(out_prefix + ".json.tmp", out_prefix + ".json");

    std::cout << "rows: " << report.rows.size() << "\n";
    std::cout << "failed_cells: " << report.errors.size() << "\n";
    for (const auto& e : report.errors)
        std::cerr << "cell failed: " << e << "\n";
    return 0;
}

int cmd_report(const std::string& input, const std::string& outdir,
               const std::string& config_path, double tolerance, int n_boot,
               const std::string& scaling_limit) {
    EvalReport report = read_report(input);
    ReportOptions options;
    if (!config_path.empty()) {
        json cfg = load_config(config_path);
        options.bounds = bounds_from_json(cfg);
    }
    options.mono_tolerance = tolerance;
    options.n_boot = n_boot;
    options.scaling_limit = scaling_limit;

    MonotonicityAudit audit;
    try {
        audit = write_report_outputs(report, outdir, options);
    } catch (const std::invalid_argument& e) {
        throw config_error(e.what());
    }
    std::cout << "summary: " << outdir << "/summary.csv\n";
    std::cout << "monotonicity_violations: " << audit.violations << " of "
              << audit.adjacent_pairs << " adjacent pairs (tolerance " << tolerance << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"inferum: budget-constrained inference-strategy engine for "
                 "multi-agent decision problems"};
    app.require_subcommand(1);

    std::string config_path, out_path, base_path, checkpoint_path, task_id, strategy;
    std::string report_input, report_outdir, scaling_limit, expansion_mode = "exact";
    std::vector<std::string> overrides;
    int64_t seed_flag = -1;
    uint64_t search_seed = 0;
    int parallel = 64, rounds = 0, n_boot = 1000;
    double seconds = 0.0, tolerance = 0.02;
    double temperature = 1.0, lr = 1e-3, entropy_coef = 0.0, sigma0 = 1.0, cov_lr_scale = 1.0;
    int expansion_factor = 4, beam_width = 0, num_elites = 0;
    bool verify = false, resume = false;

    auto* train = app.add_subcommand("train", "train a base policy checkpoint");
    train->add_option("--config", config_path)->required();
    train->add_option("--out", out_path)->required();
    train->add_option("--seed", seed_flag);
    train->add_option("--override", overrides, "key=value training overrides");

    auto* compass = app.add_subcommand("compass", "latent-specialize a base checkpoint");
    compass->add_option("--config", config_path)->required();
    compass->add_option("--base", base_path)->required();
    compass->add_option("--out", out_path)->required();
    compass->add_option("--seed", seed_flag);
    compass->add_flag("--verify", verify, "check zero-latent equivalence with the base");

    auto* search = app.add_subcommand("search", "run one budgeted search on one instance");
    search->add_option("--checkpoint", checkpoint_path)->required();
    search->add_option("--task", task_id)->required();
    search->add_option("--seed", search_seed)->required();
    search->add_option("--strategy", strategy)->required();
    search->add_option("--parallel", parallel);
    search->add_option("--rounds", rounds);
    search->add_option("--seconds", seconds);
    search->add_option("--temperature", temperature);
    search->add_option("--expansion-factor", expansion_factor);
    search->add_option("--beam-width", beam_width);
    search->add_option("--expansion-mode", expansion_mode, "exact | sampled");
    search->add_option("--lr", lr);
    search->add_option("--entropy-coef", entropy_coef);
    search->add_option("--sigma0", sigma0);
    search->add_option("--cov-lr-scale", cov_lr_scale);
    search->add_option("--elites", num_elites);
    search->add_option("--out", out_path);

    auto* grid = app.add_subcommand("grid", "run a task x strategy x budget x seed grid");
    grid->add_option("--config", config_path)->required();
    grid->add_option("--out", out_path, "output prefix (<out>.csv and <out>.json)")->required();
    grid->add_option("--seed", seed_flag);
    grid->add_flag("--resume", resume, "skip cells already present in <out>.csv");

    auto* rep = app.add_subcommand("report", "aggregate a grid report into tables");
    rep->add_option("--input", report_input)->required();
    rep->add_option("--outdir", report_outdir)->required();
    rep->add_option("--config", config_path, "config with a normalization section");
    rep->add_option("--tolerance", tolerance, "monotonicity audit tolerance");
    rep->add_option("--n-boot", n_boot);
    rep->add_option("--scaling-limit", scaling_limit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train->parsed())
            return cmd_train(config_path, out_path, seed_flag, overrides);
        if (compass->parsed())
            return cmd_compass(config_path, base_path, out_path, seed_flag, verify);
        if (search->parsed()) {
            if ((rounds > 0) == (seconds > 0.0))
                throw config_error("search: give exactly one of --rounds or --seconds");
            json opts;
            opts["temperature"] = temperature;
            opts["expansion_factor"] = expansion_factor;
            opts["beam_width"] = beam_width;
            opts["expansion_mode"] = expansion_mode;
            opts["lr"] = lr;
            opts["entropy_coef"] = entropy_coef;
            opts["sigma0"] = sigma0;
            opts["cov_lr_scale"] = cov_lr_scale;
            opts["num_elites"] = num_elites;
            return cmd_search(checkpoint_path, task_id, search_seed, strategy, parallel, rounds,
                              seconds, opts, out_path);
        }
        if (grid->parsed())
            return cmd_grid(config_path, out_path, seed_flag, resume);
        if (rep->parsed())
            return cmd_report(report_input, report_outdir, config_path, tolerance, n_boot,
                              scaling_limit);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
