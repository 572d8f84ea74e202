#include "icdm/eval/darkroom_eval.hpp"

#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/dataset/corpus.hpp"
#include "icdm/solvers/oracle.hpp"

#include <cstdio>

namespace icdm::eval {

nlohmann::json to_json(const DarkroomReport& r)
{
    const auto interval = [](const Interval& i) {
        return nlohmann::json{{"mean", i.mean}, {"ci_low", i.low}, {"ci_high", i.high}};
    };
    nlohmann::json goals = nlohmann::json::array();
    for (const auto& g : r.per_goal) {
        goals.push_back({{"goal", {g.goal.x, g.goal.y}},
                         {"policy_return", g.policy_return},
                         {"oracle_return", g.oracle_return},
                         {"random_return", g.random_return},
                         {"invalid_actions", g.invalid_actions}});
    }
    return {{"policy", r.policy},
            {"rollouts_per_goal", r.rollouts_per_goal},
            {"policy_reward", interval(r.policy_reward)},
            {"oracle_reward", interval(r.oracle_reward)},
            {"random_reward", interval(r.random_reward)},
            {"per_goal", std::move(goals)}};
}

DarkroomReport darkroom_eval(const rollout::PolicySpec& policy, const std::vector<envs::Cell>& test_goals,
                             int rollouts_per_goal, std::uint64_t seed, int jobs, int num_support, int grid_size,
                             int horizon)
{
    if (rollouts_per_goal < 1) {
        throw ConfigError("rollouts_per_goal", "must be >= 1");
    }
    if (test_goals.empty()) {
        throw ConfigError("goals", "no test goals");
    }
    DarkroomReport report;
    report.policy = policy.to_string();
    report.rollouts_per_goal = rollouts_per_goal;
    report.per_goal.resize(test_goals.size());
    parallel_for(test_goals.size(), jobs, [&](std::size_t i) {
        const auto goal = test_goals[i];
        const auto room = envs::gen_darkroom(goal, grid_size, horizon);
        char id[64];
        std::snprintf(id, sizeof id, "darkroom-%d-%d", goal.x, goal.y);
        const Task task = room.to_task(id);
        const auto solution = std::make_shared<const solvers::TaskSolution>(solvers::solve_task(task));
        const std::uint64_t task_seed = task_eval_seed(seed, i);

        rollout::FewShotContext context;
        if (num_support > 0) {
            rollout::OraclePolicy support(solution);
            Rng ctx_rng(splitmix64(task_seed ^ 0x2545f4914f6cdd1dULL));
            context = dataset::build_context(task, num_support, support, ctx_rng);
        }
        rollout::OraclePolicy oracle(solution);
        rollout::RandomPolicy random;
        auto evaluated = rollout::make_policy(policy, task, solution);
        const auto got = mean_return(task, *evaluated, task_seed, rollouts_per_goal, &context);
        auto& g = report.per_goal[i];
        g.goal = goal;
        g.policy_return = got.mean;
        g.invalid_actions = got.invalid_actions;
        g.oracle_return = mean_return(task, oracle, task_seed, rollouts_per_goal).mean;
        g.random_return = mean_return(task, random, task_seed, rollouts_per_goal).mean;
    });
    std::vector<double> pol, orc, rnd;
    for (const auto& g : report.per_goal) {
        pol.push_back(g.policy_return);
        orc.push_back(g.oracle_return);
        rnd.push_back(g.random_return);
    }
    report.policy_reward = t_interval(pol);
    report.oracle_reward = t_interval(orc);
    report.random_reward = t_interval(rnd);
    return report;
}

} // namespace icdm::eval
