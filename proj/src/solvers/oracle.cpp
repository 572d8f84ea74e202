#include "icdm/solvers/oracle.hpp"

#include "icdm/core/error.hpp"

#include <algorithm>

namespace icdm::solvers {

double TaskSolution::initial_value(const Task& task) const
{
    if (is_mdp()) {
        return mdp().initial_value(std::get<TabularMDP>(task.model));
    }
    return belief().initial_value();
}

nlohmann::json TaskSolution::to_json(const Task& task) const
{
    nlohmann::json j = is_mdp() ? solvers::to_json(mdp()) : belief().to_json();
    j["task_id"] = task.id;
    j["initial_value"] = initial_value(task);
    j["used_fallback"] = used_fallback;
    return j;
}

BeliefSolverConfig coarse_fallback(const BeliefSolverConfig& cfg)
{
    BeliefSolverConfig out = cfg;
    out.quantization = std::max(cfg.quantization, 0.1);
    out.snap_to_grid = true;
    return out;
}

namespace {

RobustSolution solve_belief_task(const Task& task, const BeliefSolverConfig& cfg)
{
    if (const auto* pomdp = std::get_if<TabularPOMDP>(&task.model)) {
        return solve_pomdp(*pomdp, cfg);
    }
    return solve_apomdp(std::get<AmbiguousPOMDP>(task.model), cfg);
}

} // namespace

TaskSolution solve_task(const Task& task, const BeliefSolverConfig& cfg, bool allow_fallback)
{
    if (const auto* mdp = std::get_if<TabularMDP>(&task.model)) {
        return {solve_mdp(*mdp)};
    }
    try {
        return {solve_belief_task(task, cfg)};
    } catch (const BudgetExceeded&) {
        const auto coarse = coarse_fallback(cfg);
        if (!allow_fallback || (coarse.quantization == cfg.quantization && coarse.snap_to_grid == cfg.snap_to_grid)) {
            throw;
        }
        return {solve_belief_task(task, coarse), true};
    }
}

TaskSolution solution_from_json(const Task& task, const nlohmann::json& j)
{
    if (j.value("task_id", "") != task.id) {
        throw ModelError("solution belongs to task '" + j.value("task_id", "") + "', not '" + task.id + "'");
    }
    TaskSolution out;
    if (std::holds_alternative<TabularMDP>(task.model)) {
        out.solution = mdp_solution_from_json(j);
        if (out.mdp().horizon() != task.horizon() || out.mdp().policy.front().size() != task.num_states()) {
            throw ModelError("MDP solution does not fit its task");
        }
        return out;
    }
    const auto cfg = belief_solver_config_from_json(j.at("config"));
    out.solution = solve_belief_task(task, cfg);
    out.used_fallback = j.value("used_fallback", false);
    if (out.belief().initial_value() != j.at("initial_value").get<double>()) {
        throw ModelError("re-solving task '" + task.id + "' does not reproduce its recorded value");
    }
    return out;
}

} // namespace icdm::solvers
