#pragma once

#include "icdm/envs/darkroom.hpp"
#include "icdm/eval/gap.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace icdm::eval {

struct GoalResult {
    envs::Cell goal;
    double policy_return = 0.0;
    double oracle_return = 0.0;
    double random_return = 0.0;
    int invalid_actions = 0;
};

/// Cumulative rewards over goals; intervals are over per-goal means.
struct DarkroomReport {
    std::string policy;
    int rollouts_per_goal = 5;
    std::vector<GoalResult> per_goal;
    Interval policy_reward;
    Interval oracle_reward;
    Interval random_reward;
};

nlohmann::json to_json(const DarkroomReport& report);

/// Rolls out `policy`, the oracle and the uniform-random baseline from (0,0)
/// on every goal with paired seeds. Few-shot contexts use `num_support`
/// oracle demonstrations.
DarkroomReport darkroom_eval(const rollout::PolicySpec& policy, const std::vector<envs::Cell>& test_goals,
                             int rollouts_per_goal = 5, std::uint64_t seed = 0, int jobs = 1, int num_support = 2,
                             int grid_size = 10, int horizon = 100);

} // namespace icdm::eval
