#include "icdm/cli/commands.hpp"

#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/dataset/corpus.hpp"
#include "icdm/envs/darkroom.hpp"
#include "icdm/envs/task_io.hpp"
#include "icdm/eval/darkroom_eval.hpp"
#include "icdm/solvers/oracle.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#ifndef ICDM_VERSION
#define ICDM_VERSION "0.0.0"
#endif

namespace icdm::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

void write_text(const fs::path& path, const std::string& text)
{
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw Error("cannot write " + path.string());
    }
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Records one command in manifest.json, keeping entries of other commands.
void record_run(const RunConfig& config, const std::string& command, Clock::time_point started,
                const nlohmann::json& details)
{
    const fs::path path = config.out / "manifest.json";
    nlohmann::json manifest = nlohmann::json::object();
    if (fs::exists(path)) {
        try {
            manifest = read_json(path);
        } catch (const Error&) {
            manifest = nlohmann::json::object();
        }
    }
    manifest["version"] = ICDM_VERSION;
    manifest["commands"][command] = {
        {"config", to_json(config)},
        {"seed", config.seed},
        {"version", ICDM_VERSION},
        {"finished_at", utc_timestamp()},
        {"wall_time_sec", std::chrono::duration<double>(Clock::now() - started).count()},
        {"details", details}};
    write_json(path, manifest);
    write_json(config.out / "config.json", to_json(config));
}

void clear_json_files(const fs::path& dir)
{
    if (!fs::exists(dir)) {
        return;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            fs::remove(entry.path());
        }
    }
}

std::vector<fs::path> task_files(const RunConfig& config)
{
    const fs::path dir = config.out / "tasks";
    std::vector<fs::path> files;
    if (fs::exists(dir)) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".json") {
                files.push_back(entry.path());
            }
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw Error("no task files in " + dir.string() + "; run `gen` first");
    }
    return files;
}

std::vector<Task> load_tasks(const RunConfig& config)
{
    std::vector<Task> tasks;
    for (const auto& f : task_files(config)) {
        tasks.push_back(envs::read_task_file(f));
    }
    return tasks;
}

std::vector<dataset::SolvedTask> load_solved(const RunConfig& config, bool train_only)
{
    const auto tasks = load_tasks(config);
    std::vector<const Task*> chosen;
    for (const auto& t : tasks) {
        if (!train_only || t.metadata.value("split", "train") == "train") {
            chosen.push_back(&t);
        }
    }
    std::vector<dataset::SolvedTask> out(chosen.size());
    parallel_for(chosen.size(), config.jobs, [&](std::size_t i) {
        const Task& task = *chosen[i];
        const fs::path path = config.out / "solutions" / (task.id + ".json");
        if (!fs::exists(path)) {
            throw Error("missing " + path.string() + "; run `solve` first");
        }
        auto solution = solvers::solution_from_json(task, read_json(path));
        out[i] = {std::make_shared<const Task>(task),
                  std::make_shared<const solvers::TaskSolution>(std::move(solution))};
    });
    return out;
}

rollout::PolicySpec policy_spec(const RunConfig& config)
{
    auto spec = rollout::PolicySpec::parse(config.eval.policy);
    spec.timeout_ms = config.eval.timeout_ms;
    spec.retries = config.eval.retries;
    return spec;
}

std::string real(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::vector<envs::Cell> darkroom_goals(const RunConfig& config, bool test_only)
{
    Rng rng(config.seed);
    const auto split = envs::split_darkroom_goals(rng, config.darkroom.grid_size, config.darkroom.num_train);
    if (test_only) {
        return split.test;
    }
    std::vector<envs::Cell> all;
    for (int y = 0; y < config.darkroom.grid_size; ++y) {
        for (int x = 0; x < config.darkroom.grid_size; ++x) {
            all.push_back({x, y});
        }
    }
    return all;
}

} // namespace

int cmd_gen(const RunConfig& config, std::ostream& log)
{
    const auto started = Clock::now();
    const fs::path dir = config.out / "tasks";
    clear_json_files(dir);
    fs::create_directories(dir);
    std::vector<Task> tasks;
    if (config.setting == Setting::darkroom) {
        Rng rng(config.seed);
        const auto split = envs::split_darkroom_goals(rng, config.darkroom.grid_size, config.darkroom.num_train);
        for (const auto& [goals, name] : {std::pair{&split.train, "train"}, std::pair{&split.test, "test"}}) {
            for (const auto& g : *goals) {
                char id[64];
                std::snprintf(id, sizeof id, "darkroom-%d-%d", g.x, g.y);
                Task task = envs::gen_darkroom(g, config.darkroom.grid_size, config.darkroom.horizon).to_task(id);
                task.metadata["split"] = name;
                task.metadata["seed"] = config.seed;
                tasks.push_back(std::move(task));
            }
        }
    } else {
        envs::EnergyTaskDistribution dist{config.env, config.p_lo, config.p_hi};
        tasks = envs::generate_energy_tasks(config.setting, dist, config.ambiguity, config.alpha,
                                            static_cast<std::size_t>(config.num_tasks), config.seed,
                                            to_string(config.setting));
    }
    for (const auto& t : tasks) {
        envs::write_task_file(dir / (t.id + ".json"), t);
    }
    record_run(config, "gen", started, {{"num_tasks", tasks.size()}});
    log << "gen: wrote " << tasks.size() << " tasks to " << dir.string() << "\n";
    return ExitCode::ok;
}

int cmd_solve(const RunConfig& config, std::ostream& log)
{
    const auto started = Clock::now();
    const auto tasks = load_tasks(config);
    const fs::path dir = config.out / "solutions";
    clear_json_files(dir);
    fs::create_directories(dir);
    std::vector<char> fallback(tasks.size(), 0);
    std::vector<std::size_t> nodes(tasks.size(), 0);
    parallel_for(tasks.size(), config.jobs, [&](std::size_t i) {
        const auto solution = solvers::solve_task(tasks[i], config.solver);
        fallback[i] = solution.used_fallback ? 1 : 0;
        if (!solution.is_mdp()) {
            nodes[i] = solution.belief().node_count();
        }
        write_json(dir / (tasks[i].id + ".json"), solution.to_json(tasks[i]));
    });
    std::size_t fallbacks = 0;
    std::size_t total_nodes = 0;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        fallbacks += static_cast<std::size_t>(fallback[i]);
        total_nodes += nodes[i];
    }
    record_run(config, "solve", started,
               {{"num_tasks", tasks.size()}, {"fallback_solves", fallbacks}, {"belief_nodes", total_nodes}});
    log << "solve: solved " << tasks.size() << " tasks (" << fallbacks << " with the coarse fallback)\n";
    return ExitCode::ok;
}

int cmd_export(const RunConfig& config, std::ostream& log)
{
    const auto started = Clock::now();
    const auto solved = load_solved(config, config.setting == Setting::darkroom);
    dataset::CorpusOptions options;
    options.trajectories_per_task = config.dataset.trajectories_per_task;
    options.seed = config.seed;
    options.jobs = config.jobs;

    const fs::path sft_path = config.out / "corpus" / "sft.jsonl";
    const auto sft_manifest = dataset::build_sft_corpus(solved, options, sft_path);

    // replay audit straight from the written file
    std::vector<dataset::SftRecord> records;
    {
        std::ifstream in(sft_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            records.push_back(dataset::sft_record_from_json(nlohmann::json::parse(line)));
        }
    }
    const auto sft_mismatches = dataset::audit_sft_records(records, solved);

    nlohmann::json details{{"sft", sft_manifest}, {"sft_replay_mismatches", sft_mismatches}};
    std::size_t label_mismatches = 0;
    if (config.dataset.dpt) {
        const fs::path dpt_path = config.out / "corpus" / "dpt.jsonl";
        details["dpt"] = dataset::build_dpt_dataset(solved, options, dpt_path);
        std::map<std::string, const dataset::SolvedTask*> by_id;
        for (const auto& s : solved) {
            by_id[s.task->id] = &s;
        }
        std::ifstream in(dpt_path, std::ios::binary);
        std::string line;
        while (std::getline(in, line)) {
            const auto rec = dataset::dpt_record_from_json(nlohmann::json::parse(line));
            if (dataset::rederive_dpt_label(*by_id.at(rec.task_id), rec) != rec.label) {
                ++label_mismatches;
            }
        }
        details["dpt_label_mismatches"] = label_mismatches;
    }
    record_run(config, "export", started, details);
    log << "export: " << records.size() << " SFT records";
    if (config.dataset.dpt) {
        log << ", " << details["dpt"]["num_records"].get<std::size_t>() << " DPT records";
    }
    log << "; replay mismatches " << sft_mismatches << ", label mismatches " << label_mismatches << "\n";
    return sft_mismatches == 0 && label_mismatches == 0 ? ExitCode::ok : ExitCode::check_failed;
}

int cmd_eval(const RunConfig& config, std::ostream& log)
{
    if (!config.eval.grid && config.setting == Setting::darkroom) {
        return cmd_darkroom(config, log);
    }
    const auto started = Clock::now();
    const auto policy = policy_spec(config);
    const fs::path dir = config.out / "reports";
    if (config.eval.grid) {
        const auto cells = eval::run_experiment_grid(*config.eval.grid, policy, config.seed, config.jobs);
        std::ostringstream csv;
        eval::write_grid_csv(csv, cells);
        write_text(dir / "grid.csv", csv.str());
        nlohmann::json reports = nlohmann::json::array();
        bool warned = false;
        for (const auto& c : cells) {
            reports.push_back({{"cell", c.cell.index}, {"report", eval::to_json(c.report)}});
            warned = warned || c.report.pairing_warning;
        }
        write_json(dir / "grid.json", reports);
        record_run(config, "eval", started, {{"cells", cells.size()}, {"pairing_warning", warned}});
        log << "eval: " << cells.size() << " grid cells written to " << (dir / "grid.csv").string() << "\n";
        return warned ? ExitCode::check_failed : ExitCode::ok;
    }

    const auto solved = load_solved(config, false);
    eval::EvalOptions options;
    options.rollouts_per_task = config.eval.rollouts_per_task;
    options.seed = config.seed;
    options.jobs = config.jobs;
    options.rollout.sample_model_per_episode = config.eval.sample_model_per_episode;
    options.num_support = config.eval.num_support;
    options.support_policy = rollout::PolicySpec::parse(config.eval.support_policy);
    const auto report = eval::optimality_gap(solved, policy, options);

    std::ostringstream csv;
    csv << "task_id,opt_reward,eval_reward,gap,excluded,invalid_actions,dp_value\n";
    for (const auto& t : report.per_task) {
        csv << t.task_id << ',' << real(t.opt_reward) << ',' << real(t.eval_reward) << ','
            << (t.excluded ? std::string() : real(t.gap)) << ',' << (t.excluded ? "true" : "false") << ','
            << t.invalid_actions << ',' << (t.dp_value ? real(*t.dp_value) : std::string()) << '\n';
    }
    write_text(dir / "eval.csv", csv.str());
    write_json(dir / "eval.json", eval::to_json(report));

    const bool oracle_broken = policy.kind == rollout::PolicyKind::oracle && report.mean_gap != 0.0;
    record_run(config, "eval", started,
               {{"mean_gap", report.mean_gap},
                {"ci_low", report.ci_low},
                {"ci_high", report.ci_high},
                {"pairing_warning", report.pairing_warning},
                {"oracle_gap_nonzero", oracle_broken}});
    log << "eval: policy " << report.policy << " mean gap " << real(report.mean_gap) << " [" << real(report.ci_low)
        << ", " << real(report.ci_high) << "] over " << report.num_included << " tasks";
    if (report.num_excluded > 0) {
        log << " (" << report.num_excluded << " excluded)";
    }
    log << "\n";
    return report.pairing_warning || oracle_broken ? ExitCode::check_failed : ExitCode::ok;
}

int cmd_theory_sim(const RunConfig& config, std::ostream& log)
{
    const auto started = Clock::now();
    auto cfg = config.theory;
    cfg.seed = config.seed;
    cfg.jobs = config.jobs;
    const auto rows = theory::run_e2_simulation(cfg);
    std::ostringstream csv;
    theory::write_e2_csv(csv, rows);
    const fs::path path = config.out / "reports" / "theory_e2.csv";
    write_text(path, csv.str());
    std::size_t violated = 0;
    for (const auto& r : rows) {
        violated += r.violated ? 1 : 0;
    }
    record_run(config, "theory-sim", started, {{"rows", rows.size()}, {"violated", violated}});
    log << "theory-sim: " << rows.size() << " configurations, " << violated << " violated; wrote " << path.string()
        << "\n";
    return violated == 0 ? ExitCode::ok : ExitCode::check_failed;
}

int cmd_darkroom(const RunConfig& config, std::ostream& log)
{
    const auto started = Clock::now();
    const auto& dr = config.darkroom;
    const auto goals = darkroom_goals(config, dr.goals == "test");
    const auto report = eval::darkroom_eval(policy_spec(config), goals, dr.rollouts_per_goal, config.seed,
                                            config.jobs, config.eval.num_support, dr.grid_size, dr.horizon);
    std::ostringstream csv;
    csv << "goal_x,goal_y,policy_return,oracle_return,random_return,invalid_actions\n";
    std::size_t oracle_mismatches = 0;
    for (const auto& g : report.per_goal) {
        csv << g.goal.x << ',' << g.goal.y << ',' << real(g.policy_return) << ',' << real(g.oracle_return) << ','
            << real(g.random_return) << ',' << g.invalid_actions << '\n';
        // shortest path, then stay on the goal for the rest of the episode
        const double expected = std::max(0, dr.horizon - (g.goal.x + g.goal.y));
        if (g.oracle_return != expected) {
            ++oracle_mismatches;
        }
    }
    const fs::path dir = config.out / "reports";
    write_text(dir / "darkroom.csv", csv.str());
    write_json(dir / "darkroom.json", eval::to_json(report));
    record_run(config, "darkroom", started,
               {{"goals", goals.size()},
                {"policy_mean", report.policy_reward.mean},
                {"oracle_mean", report.oracle_reward.mean},
                {"random_mean", report.random_reward.mean},
                {"oracle_mismatches", oracle_mismatches}});
    log << "darkroom: " << goals.size() << " goals; policy " << real(report.policy_reward.mean) << ", oracle "
        << real(report.oracle_reward.mean) << ", random " << real(report.random_reward.mean) << "\n";
    return oracle_mismatches == 0 ? ExitCode::ok : ExitCode::check_failed;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"In-context decision-making toolkit: task generation, oracle solvers, corpus export, evaluation"};
    app.require_subcommand(1);
    struct Flags {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::optional<std::string> out;
        std::optional<int> jobs;
        std::optional<std::string> policy;
    } flags;
    using Command = int (*)(const RunConfig&, std::ostream&);
    const std::vector<std::tuple<const char*, const char*, Command>> commands{
        {"gen", "generate task files", cmd_gen},
        {"solve", "solve every generated task", cmd_solve},
        {"export", "write the SFT corpus and DPT dataset", cmd_export},
        {"eval", "measure optimality gaps", cmd_eval},
        {"theory-sim", "run the gap-versus-error simulation", cmd_theory_sim},
        {"darkroom", "evaluate on the darkroom grid", cmd_darkroom},
    };
    Command chosen = nullptr;
    for (const auto& [name, help, fn] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", flags.config, "JSON run configuration");
        sub->add_option("--seed", flags.seed, "master seed");
        sub->add_option("--out", flags.out, "output directory");
        sub->add_option("--jobs", flags.jobs, "worker threads");
        sub->add_option("--policy", flags.policy, "oracle|random|qmdp|constant:<a>|external:<endpoint>");
        sub->callback([&chosen, fn = fn] { chosen = fn; });
    }

    std::vector<std::string> argv_store = args;
    argv_store.insert(argv_store.begin(), "icdm");
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ExitCode::ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::validation_error;
    }

    try {
        RunConfig config;
        if (!flags.config.empty()) {
            config = load_run_config(flags.config);
        }
        if (flags.seed) config.seed = *flags.seed;
        if (flags.out) config.out = *flags.out;
        if (flags.jobs) config.jobs = *flags.jobs;
        if (flags.policy) config.eval.policy = *flags.policy;
        config.validate();
        return chosen(config, out);
    } catch (const ConfigError& e) {
        err << "error: invalid configuration: " << e.what() << "\n";
        return ExitCode::validation_error;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::validation_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return ExitCode::runtime_error;
    }
}

} // namespace icdm::cli
