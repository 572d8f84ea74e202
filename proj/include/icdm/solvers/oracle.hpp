#pragma once

#include "icdm/core/task.hpp"
#include "icdm/solvers/belief_solver.hpp"
#include "icdm/solvers/mdp_solver.hpp"

#include <variant>

namespace icdm::solvers {

/// Optimal (or approximately optimal) policy for any task kind.
struct TaskSolution {
    std::variant<MdpSolution, RobustSolution> solution;
    /// True when the belief solve ran out of budget and the coarse
    /// fallback configuration produced this solution.
    bool used_fallback = false;

    bool is_mdp() const { return std::holds_alternative<MdpSolution>(solution); }
    const MdpSolution& mdp() const { return std::get<MdpSolution>(solution); }
    const RobustSolution& belief() const { return std::get<RobustSolution>(solution); }

    /// Solver's own estimate of the optimal expected return.
    double initial_value(const Task& task) const;
    nlohmann::json to_json(const Task& task) const;
};

/// `cfg` with quantization coarsened to at least 0.1 and snap_to_grid set.
/// At that resolution the reachable grid stays small for horizons of 10 to 15.
/// Its stored values are biased (rounding moves belief mass between states),
/// while its greedy actions stay close to optimal; judge it by rollout return.
BeliefSolverConfig coarse_fallback(const BeliefSolverConfig& cfg);

/// Dispatches on the task kind: backward induction for MDP and darkroom
/// tasks, belief-state induction for POMDPs, alpha-MEU induction for APOMDPs.
/// A belief solve that throws BudgetExceeded is retried once with
/// coarse_fallback(cfg) when `allow_fallback` is set.
TaskSolution solve_task(const Task& task, const BeliefSolverConfig& cfg = {}, bool allow_fallback = true);

/// Rebuilds a solution from TaskSolution::to_json output. MDP tables are read
/// back; belief solutions are re-solved with the recorded configuration and
/// must reproduce the recorded initial value exactly (ModelError otherwise).
TaskSolution solution_from_json(const Task& task, const nlohmann::json& j);

} // namespace icdm::solvers
