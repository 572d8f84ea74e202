#pragma once

#include "icdm/core/rng.hpp"
#include "icdm/core/task.hpp"
#include "icdm/rollout/policy.hpp"
#include "icdm/solvers/oracle.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace icdm::dataset {

/// A task paired with its oracle solution.
struct SolvedTask {
    std::shared_ptr<const Task> task;
    std::shared_ptr<const solvers::TaskSolution> solution;
};

/// Seed of the demonstration rollouts for the task at `index` in a stream.
/// Trajectory k of that task is simulated with Rng::stream(seed, k).
std::uint64_t task_rollout_seed(std::uint64_t corpus_seed, std::size_t index);

/// Oracle demonstrations of one task, fully determined by `rollout_seed`.
std::vector<Trajectory> simulate_demonstrations(const SolvedTask& solved, std::uint64_t rollout_seed, int count);

struct SftRecord {
    std::string task_id;
    std::string setting;
    nlohmann::json task_metadata;
    std::uint64_t rollout_seed = 0;
    std::vector<std::string> trajectories;
    std::vector<double> returns;
    /// encode_context over all trajectories.
    std::string context;
};

nlohmann::json to_json(const SftRecord& record);
SftRecord sft_record_from_json(const nlohmann::json& j);

struct CorpusOptions {
    int trajectories_per_task = 15;
    std::uint64_t seed = 0;
    int jobs = 1;
};

std::vector<SftRecord> make_sft_records(const std::vector<SolvedTask>& tasks, const CorpusOptions& options);

/// Writes one JSON object per line to `path` and a manifest beside it
/// (manifest_path_for). Output bytes depend only on the tasks and seeds.
/// Returns the manifest.
nlohmann::json build_sft_corpus(const std::vector<SolvedTask>& tasks, const CorpusOptions& options,
                                const std::filesystem::path& path);

/// "<dir>/<stem>.manifest.json" for a corpus at "<dir>/<stem>.jsonl".
std::filesystem::path manifest_path_for(const std::filesystem::path& corpus);

/// Replays every record from its stored seed and compares trajectories
/// byte-for-byte. Returns the number of mismatching records.
std::size_t audit_sft_records(const std::vector<SftRecord>& records, const std::vector<SolvedTask>& tasks);

struct Transition {
    int obs = 0;
    int action = 0;
    int next_obs = 0;
    double reward = 0.0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Supervised example at decision epoch t (0-based) of one demonstration:
/// the transitions observed so far, the current observation, and the oracle
/// action taken there.
struct DptRecord {
    std::string task_id;
    int trajectory = 0;
    int t = 0;
    std::vector<Transition> context;
    int query_obs = 0;
    int label = 0;
};

nlohmann::json to_json(const DptRecord& record);
DptRecord dpt_record_from_json(const nlohmann::json& j);

std::vector<DptRecord> make_dpt_records(const std::vector<SolvedTask>& tasks, const CorpusOptions& options);

nlohmann::json build_dpt_dataset(const std::vector<SolvedTask>& tasks, const CorpusOptions& options,
                                 const std::filesystem::path& path);

/// Recomputes the oracle action for a record from the task alone: the policy
/// table at (t, query_obs) for MDPs, the solution at the belief rebuilt from
/// the record's context otherwise.
int rederive_dpt_label(const SolvedTask& solved, const DptRecord& record);

/// Rolls out `num_support` episodes of `task` under `support_policy` and
/// encodes them with encode_context. Episode k uses env stream k of `rng`'s
/// next draw and reseeds the policy per episode.
rollout::FewShotContext build_context(const Task& task, int num_support, rollout::Policy& support_policy, Rng& rng);

} // namespace icdm::dataset
