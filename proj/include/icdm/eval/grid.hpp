#pragma once

#include "icdm/envs/energy.hpp"
#include "icdm/eval/gap.hpp"
#include "icdm/solvers/belief_solver.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace icdm::eval {

/// Axes of an experiment grid. Cells are the Cartesian product in the order
/// setting, horizon, q, |M|, alpha, p-range, support policy, support count.
/// Axes that do not apply to a setting (q for MDPs; |M| and alpha for MDPs
/// and POMDPs) contribute a single blank coordinate.
struct GridSpec {
    std::vector<Setting> settings{Setting::mdp};
    std::vector<int> horizons{10};
    std::vector<double> obs_probs{1.0};
    std::vector<int> num_models{1};
    std::vector<double> alphas{1.0};
    std::vector<std::pair<double, double>> p_ranges{{0.5, 1.0}};
    std::vector<std::string> support_policies{"oracle"};
    std::vector<int> num_supports{2};

    int tasks_per_cell = 100;
    /// 0 selects default_rollouts() per setting.
    int rollouts_per_task = 0;
    envs::EnergyParams base;
    envs::AmbiguityConfig ambiguity;
    solvers::BeliefSolverConfig solver;
    bool sample_model_per_episode = false;

    void validate() const;
};

nlohmann::json to_json(const GridSpec& spec);
/// Missing fields keep their defaults; unknown fields raise ConfigError.
GridSpec grid_spec_from_json(const nlohmann::json& j);

struct ExperimentCell {
    std::size_t index = 0;
    Setting setting = Setting::mdp;
    int horizon = 10;
    std::optional<double> obs_prob;
    std::optional<int> num_models;
    std::optional<double> alpha;
    double p_lo = 0.5;
    double p_hi = 1.0;
    std::string support_policy = "oracle";
    int num_support = 2;
};

std::vector<ExperimentCell> expand_grid(const GridSpec& spec);

struct CellReport {
    ExperimentCell cell;
    EvalReport report;
    /// Tasks whose belief solve needed the coarse fallback.
    std::size_t fallback_solves = 0;
};

/// Generates, solves and evaluates every cell. All cells draw their tasks
/// and evaluation streams from `seed`, so cells differing only in policy
/// axes see the same tasks and the same environment noise.
std::vector<CellReport> run_experiment_grid(const GridSpec& spec, const rollout::PolicySpec& policy,
                                            std::uint64_t seed, int jobs = 1);

/// One row per cell:
/// cell,setting,horizon,q,num_models,alpha,p_lo,p_hi,support_policy,
/// num_support,policy,num_tasks,num_excluded,rollouts_per_task,mean_gap,
/// ci_low,ci_high,invalid_actions,fallback_solves
void write_grid_csv(std::ostream& out, const std::vector<CellReport>& cells);

} // namespace icdm::eval
