#pragma once

#include "icdm/dataset/corpus.hpp"
#include "icdm/rollout/policy.hpp"
#include "icdm/rollout/rollout.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace icdm::eval {

/// Tasks whose oracle return is at or below this are excluded from the gap.
inline constexpr double kDegenerateOptimum = 1e-9;

/// 30 rollouts per task for MDP and POMDP, 90 for APOMDP, 5 for darkroom.
int default_rollouts(Setting setting);

struct TaskEval {
    std::string task_id;
    double opt_reward = 0.0;   // OPT_τ, Monte Carlo mean of the oracle
    double eval_reward = 0.0;  // OPT^Eval_τ
    double gap = 0.0;          // (OPT_τ - OPT^Eval_τ) / OPT_τ
    double opt_stderr = 0.0;
    double eval_stderr = 0.0;
    /// Exact oracle value for MDP tasks.
    std::optional<double> dp_value;
    bool excluded = false;
    int invalid_actions = 0;
};

struct Interval {
    double mean = 0.0;
    double low = 0.0;
    double high = 0.0;
};

/// Two-sided 95% Student-t interval with n-1 degrees of freedom. With fewer
/// than two samples the interval collapses to the mean.
Interval t_interval(const std::vector<double>& samples, double level = 0.95);

struct EvalReport {
    std::string policy;
    int rollouts_per_task = 0;
    std::vector<TaskEval> per_task;
    double mean_gap = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t num_included = 0;
    std::size_t num_excluded = 0;
    int invalid_action_count = 0;
    /// Mean gap below minus two CI half-widths: oracle and policy were
    /// probably not run on paired environment noise.
    bool pairing_warning = false;
};

nlohmann::json to_json(const EvalReport& report);

struct EvalOptions {
    /// 0 selects default_rollouts() of the first task's setting.
    int rollouts_per_task = 0;
    std::uint64_t seed = 0;
    int jobs = 1;
    rollout::RolloutOptions rollout;
    /// Few-shot support trajectories handed to the evaluated policy.
    int num_support = 2;
    rollout::PolicySpec support_policy;  // oracle by default
};

/// Evaluation seed of the task at `index`.
std::uint64_t task_eval_seed(std::uint64_t seed, std::size_t index);

/// Optimality gap of `policy` over `tasks`.
///
/// For task i with seed s_i = task_eval_seed(seed, i), rollout k of both the
/// oracle and the evaluated policy uses environment stream Rng::stream(s_i, k)
/// and the same policy episode seed, so a policy that acts like the oracle
/// reproduces its returns exactly. One few-shot context per task is built
/// from support_policy and shown to the evaluated policy on every rollout.
/// Throws DegenerateOptimum when every task is excluded.
EvalReport optimality_gap(const std::vector<dataset::SolvedTask>& tasks, const rollout::PolicySpec& policy,
                          const EvalOptions& options);

/// Mean discounted return of `policy` on `task` over rollouts 0..n-1 of the
/// paired streams of `task_seed`, with their standard error.
struct ReturnEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int invalid_actions = 0;
};
ReturnEstimate mean_return(const Task& task, rollout::Policy& policy, std::uint64_t task_seed, int n,
                           const rollout::FewShotContext* context = nullptr,
                           const rollout::RolloutOptions& options = {});

} // namespace icdm::eval
