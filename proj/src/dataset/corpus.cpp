#include "icdm/dataset/corpus.hpp"

#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/dataset/encoder.hpp"
#include "icdm/rollout/rollout.hpp"

#include <fstream>

namespace icdm::dataset {

namespace {

constexpr std::uint64_t kPolicyStreamSalt = 0x9e3779b97f4a7c15ULL;

const SolvedTask& checked(const SolvedTask& solved)
{
    if (!solved.task || !solved.solution) {
        throw ConfigError("tasks", "every task needs an oracle solution");
    }
    return solved;
}

void write_lines(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    for (const auto& line : lines) {
        out << line.dump() << '\n';
    }
    if (!out) {
        throw Error("write failed: " + path.string());
    }
}

void write_manifest(const std::filesystem::path& corpus, const nlohmann::json& manifest)
{
    std::ofstream out(manifest_path_for(corpus), std::ios::binary | std::ios::trunc);
    out << manifest.dump(2) << '\n';
    if (!out) {
        throw Error("cannot write manifest for " + corpus.string());
    }
}

nlohmann::json base_manifest(const char* kind, const std::vector<SolvedTask>& tasks, const CorpusOptions& options)
{
    nlohmann::json task_ids = nlohmann::json::array();
    for (const auto& t : tasks) {
        task_ids.push_back(checked(t).task->id);
    }
    return {{"kind", kind},
            {"schema_version", kSchemaVersion},
            {"seed", options.seed},
            {"num_tasks", tasks.size()},
            {"trajectories_per_task", options.trajectories_per_task},
            {"task_ids", task_ids}};
}

} // namespace

std::uint64_t task_rollout_seed(std::uint64_t corpus_seed, std::size_t index)
{
    return splitmix64(corpus_seed + index);
}

std::vector<Trajectory> simulate_demonstrations(const SolvedTask& solved, std::uint64_t rollout_seed, int count)
{
    checked(solved);
    rollout::OraclePolicy policy(solved.solution);
    std::vector<Trajectory> out;
    for (int k = 0; k < count; ++k) {
        Rng env = Rng::stream(rollout_seed, static_cast<std::uint64_t>(k));
        policy.begin_episode(splitmix64(rollout_seed ^ kPolicyStreamSalt) + static_cast<std::uint64_t>(k));
        out.push_back(rollout::run_rollout(*solved.task, policy, env).trajectory);
    }
    return out;
}

nlohmann::json to_json(const SftRecord& r)
{
    return {{"schema_version", kSchemaVersion},
            {"task_id", r.task_id},
            {"setting", r.setting},
            {"task_metadata", r.task_metadata},
            {"rollout_seed", r.rollout_seed},
            {"trajectories", r.trajectories},
            {"returns", r.returns},
            {"context", r.context}};
}

SftRecord sft_record_from_json(const nlohmann::json& j)
{
    if (j.value("schema_version", -1) != kSchemaVersion) {
        throw ConfigError("schema_version", "unsupported corpus schema version");
    }
    SftRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.setting = j.at("setting").get<std::string>();
    r.task_metadata = j.at("task_metadata");
    r.rollout_seed = j.at("rollout_seed").get<std::uint64_t>();
    r.trajectories = j.at("trajectories").get<std::vector<std::string>>();
    r.returns = j.at("returns").get<std::vector<double>>();
    r.context = j.at("context").get<std::string>();
    return r;
}

std::vector<SftRecord> make_sft_records(const std::vector<SolvedTask>& tasks, const CorpusOptions& options)
{
    if (options.trajectories_per_task < 0) {
        throw ConfigError("trajectories_per_task", "must be non-negative");
    }
    std::vector<SftRecord> records(tasks.size());
    parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
        const auto& solved = checked(tasks[i]);
        SftRecord r;
        r.task_id = solved.task->id;
        r.setting = to_string(solved.task->setting);
        r.task_metadata = solved.task->metadata;
        r.rollout_seed = task_rollout_seed(options.seed, i);
        const auto demos = simulate_demonstrations(solved, r.rollout_seed, options.trajectories_per_task);
        for (const auto& d : demos) {
            r.trajectories.push_back(encode(d).text);
            r.returns.push_back(discounted_return(d, solved.task->discount()));
        }
        r.context = encode_context(demos);
        records[i] = std::move(r);
    });
    return records;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& corpus)
{
    return corpus.parent_path() / (corpus.stem().string() + ".manifest.json");
}

nlohmann::json build_sft_corpus(const std::vector<SolvedTask>& tasks, const CorpusOptions& options,
                                const std::filesystem::path& path)
{
    const auto records = make_sft_records(tasks, options);
    std::vector<nlohmann::json> lines;
    double return_sum = 0.0;
    std::size_t trajectories = 0;
    for (const auto& r : records) {
        lines.push_back(to_json(r));
        for (const double g : r.returns) {
            return_sum += g;
            ++trajectories;
        }
    }
    write_lines(path, lines);
    auto manifest = base_manifest("sft", tasks, options);
    manifest["num_records"] = records.size();
    manifest["num_trajectories"] = trajectories;
    manifest["mean_return"] = trajectories == 0 ? 0.0 : return_sum / static_cast<double>(trajectories);
    manifest["file"] = path.filename().string();
    write_manifest(path, manifest);
    return manifest;
}

std::size_t audit_sft_records(const std::vector<SftRecord>& records, const std::vector<SolvedTask>& tasks)
{
    std::size_t mismatches = 0;
    for (const auto& r : records) {
        const SolvedTask* match = nullptr;
        for (const auto& t : tasks) {
            if (checked(t).task->id == r.task_id) {
                match = &t;
                break;
            }
        }
        if (match == nullptr) {
            ++mismatches;
            continue;
        }
        const auto demos = simulate_demonstrations(*match, r.rollout_seed, static_cast<int>(r.trajectories.size()));
        bool same = true;
        for (std::size_t k = 0; k < demos.size(); ++k) {
            same = same && encode(demos[k]).text == r.trajectories[k] &&
                   discounted_return(demos[k], match->task->discount()) == r.returns.at(k);
        }
        if (!same) {
            ++mismatches;
        }
    }
    return mismatches;
}

nlohmann::json to_json(const DptRecord& r)
{
    nlohmann::json context = nlohmann::json::array();
    for (const auto& c : r.context) {
        context.push_back(nlohmann::json::array({c.obs, c.action, c.next_obs, c.reward}));
    }
    return {{"schema_version", kSchemaVersion},
            {"task_id", r.task_id},
            {"trajectory", r.trajectory},
            {"t", r.t},
            {"context", context},
            {"query_obs", r.query_obs},
            {"label", r.label}};
}

DptRecord dpt_record_from_json(const nlohmann::json& j)
{
    if (j.value("schema_version", -1) != kSchemaVersion) {
        throw ConfigError("schema_version", "unsupported dataset schema version");
    }
    DptRecord r;
    r.task_id = j.at("task_id").get<std::string>();
    r.trajectory = j.at("trajectory").get<int>();
    r.t = j.at("t").get<int>();
    for (const auto& c : j.at("context")) {
        r.context.push_back({c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<int>(), c.at(3).get<double>()});
    }
    r.query_obs = j.at("query_obs").get<int>();
    r.label = j.at("label").get<int>();
    return r;
}

std::vector<DptRecord> make_dpt_records(const std::vector<SolvedTask>& tasks, const CorpusOptions& options)
{
    std::vector<std::vector<DptRecord>> per_task(tasks.size());
    parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
        const auto& solved = checked(tasks[i]);
        const auto demos = simulate_demonstrations(solved, task_rollout_seed(options.seed, i),
                                                   options.trajectories_per_task);
        for (std::size_t k = 0; k < demos.size(); ++k) {
            const auto& steps = demos[k].steps;
            std::vector<Transition> seen;
            for (std::size_t t = 0; t < steps.size(); ++t) {
                per_task[i].push_back({solved.task->id, static_cast<int>(k), static_cast<int>(t), seen, steps[t].obs,
                                       steps[t].action});
                if (t + 1 < steps.size()) {
                    seen.push_back({steps[t].obs, steps[t].action, steps[t + 1].obs, steps[t].reward});
                }
            }
        }
    });
    std::vector<DptRecord> out;
    for (auto& v : per_task) {
        std::move(v.begin(), v.end(), std::back_inserter(out));
    }
    return out;
}

nlohmann::json build_dpt_dataset(const std::vector<SolvedTask>& tasks, const CorpusOptions& options,
                                 const std::filesystem::path& path)
{
    const auto records = make_dpt_records(tasks, options);
    std::vector<nlohmann::json> lines;
    lines.reserve(records.size());
    for (const auto& r : records) {
        lines.push_back(to_json(r));
    }
    write_lines(path, lines);
    auto manifest = base_manifest("dpt", tasks, options);
    manifest["num_records"] = records.size();
    manifest["file"] = path.filename().string();
    write_manifest(path, manifest);
    return manifest;
}

int rederive_dpt_label(const SolvedTask& solved, const DptRecord& record)
{
    checked(solved);
    const auto& task = *solved.task;
    if (record.t < 0 || record.t >= task.horizon() || record.query_obs < 0 ||
        static_cast<std::size_t>(record.query_obs) >= task.num_obs()) {
        throw ConfigError("record", "query outside the task's horizon or observation space");
    }
    if (solved.solution->is_mdp()) {
        return solved.solution->mdp().policy.at(static_cast<std::size_t>(record.t)).at(
            static_cast<std::size_t>(record.query_obs));
    }
    Trajectory history;
    for (const auto& c : record.context) {
        history.steps.push_back({c.obs, c.action, c.reward});
    }
    const Belief belief = rollout::belief_from_history(task, history, record.query_obs);
    return solved.solution->belief().action(record.t, belief);
}

rollout::FewShotContext build_context(const Task& task, int num_support, rollout::Policy& support_policy, Rng& rng)
{
    if (num_support < 0) {
        throw ConfigError("num_support", "must be non-negative");
    }
    const std::uint64_t base = rng.next();
    rollout::FewShotContext out;
    for (int k = 0; k < num_support; ++k) {
        Rng env = Rng::stream(base, static_cast<std::uint64_t>(k));
        support_policy.begin_episode(splitmix64(base ^ kPolicyStreamSalt) + static_cast<std::uint64_t>(k));
        out.support.push_back(rollout::run_rollout(task, support_policy, env).trajectory);
    }
    out.encoded = encode_context(out.support);
    return out;
}

} // namespace icdm::dataset
