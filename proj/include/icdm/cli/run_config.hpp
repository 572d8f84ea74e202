#pragma once

#include "icdm/core/parallel.hpp"
#include "icdm/envs/energy.hpp"
#include "icdm/eval/grid.hpp"
#include "icdm/solvers/belief_solver.hpp"
#include "icdm/theory/simulation.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace icdm::cli {

struct DatasetOptions {
    int trajectories_per_task = 15;
    bool dpt = true;
};

struct EvalSection {
    std::string policy = "oracle";
    /// 0 selects the per-setting default.
    int rollouts_per_task = 0;
    int num_support = 2;
    std::string support_policy = "oracle";
    bool sample_model_per_episode = false;
    int timeout_ms = 60000;
    int retries = 0;
    /// When present, `eval` runs this grid instead of the generated tasks.
    std::optional<eval::GridSpec> grid;
};

struct DarkroomOptions {
    int grid_size = 10;
    int horizon = 100;
    int num_train = 80;
    int rollouts_per_goal = 5;
    /// "test" evaluates the held-out goals, "all" every cell.
    std::string goals = "test";
};

/// Everything a run needs. Serialized in full to the output directory.
struct RunConfig {
    Setting setting = Setting::mdp;
    std::uint64_t seed = 0;
    int num_tasks = 100;
    envs::EnergyParams env;
    double p_lo = 0.5;
    double p_hi = 1.0;
    envs::AmbiguityConfig ambiguity;
    double alpha = 1.0;
    solvers::BeliefSolverConfig solver;
    DatasetOptions dataset;
    EvalSection eval;
    theory::E2Config theory;
    DarkroomOptions darkroom;
    std::filesystem::path out = "run";
    int jobs = default_jobs();

    void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing fields keep their defaults; unknown fields and type errors raise
/// ConfigError naming the field.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace icdm::cli
