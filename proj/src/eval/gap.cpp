#include "icdm/eval/gap.hpp"

#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/dataset/corpus.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace icdm::eval {

namespace {

constexpr std::uint64_t kEpisodeSalt = 0x5851f42d4c957f2dULL;
constexpr std::uint64_t kContextSalt = 0x14057b7ef767814fULL;

std::pair<double, double> mean_and_stderr(const std::vector<double>& xs)
{
    if (xs.empty()) {
        return {0.0, 0.0};
    }
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace

int default_rollouts(Setting setting)
{
    switch (setting) {
    case Setting::apomdp:
        return 90;
    case Setting::darkroom:
        return 5;
    default:
        return 30;
    }
}

Interval t_interval(const std::vector<double>& samples, double level)
{
    const auto [mean, se] = mean_and_stderr(samples);
    if (samples.size() < 2) {
        return {mean, mean, mean};
    }
    const boost::math::students_t dist(static_cast<double>(samples.size() - 1));
    const double half = boost::math::quantile(boost::math::complement(dist, (1.0 - level) / 2.0)) * se;
    return {mean, mean - half, mean + half};
}

nlohmann::json to_json(const EvalReport& r)
{
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : r.per_task) {
        nlohmann::json j{{"task_id", t.task_id},
                         {"opt_reward", t.opt_reward},
                         {"eval_reward", t.eval_reward},
                         {"gap", t.excluded ? nlohmann::json() : nlohmann::json(t.gap)},
                         {"opt_stderr", t.opt_stderr},
                         {"eval_stderr", t.eval_stderr},
                         {"excluded", t.excluded},
                         {"invalid_actions", t.invalid_actions}};
        if (t.dp_value) {
            j["dp_value"] = *t.dp_value;
        }
        tasks.push_back(std::move(j));
    }
    return {{"policy", r.policy},
            {"rollouts_per_task", r.rollouts_per_task},
            {"mean_gap", r.mean_gap},
            {"ci_low", r.ci_low},
            {"ci_high", r.ci_high},
            {"num_included", r.num_included},
            {"num_excluded", r.num_excluded},
            {"invalid_action_count", r.invalid_action_count},
            {"pairing_warning", r.pairing_warning},
            {"per_task", std::move(tasks)}};
}

std::uint64_t task_eval_seed(std::uint64_t seed, std::size_t index) { return Rng::stream(seed, index).next(); }

ReturnEstimate mean_return(const Task& task, rollout::Policy& policy, std::uint64_t task_seed, int n,
                           const rollout::FewShotContext* context, const rollout::RolloutOptions& options)
{
    std::vector<double> returns;
    ReturnEstimate out;
    for (int k = 0; k < n; ++k) {
        Rng env = Rng::stream(task_seed, static_cast<std::uint64_t>(k));
        policy.begin_episode(splitmix64(task_seed ^ kEpisodeSalt) + static_cast<std::uint64_t>(k));
        const auto result = rollout::run_rollout(task, policy, env, context, options);
        returns.push_back(result.discounted_return);
        out.invalid_actions += result.invalid_actions;
    }
    std::tie(out.mean, out.std_error) = mean_and_stderr(returns);
    return out;
}

EvalReport optimality_gap(const std::vector<dataset::SolvedTask>& tasks, const rollout::PolicySpec& policy,
                          const EvalOptions& options)
{
    EvalReport report;
    report.policy = policy.to_string();
    if (tasks.empty()) {
        throw ConfigError("tasks", "no tasks to evaluate");
    }
    const int n = options.rollouts_per_task > 0 ? options.rollouts_per_task
                                                : default_rollouts(tasks.front().task->setting);
    report.rollouts_per_task = n;
    report.per_task.resize(tasks.size());

    parallel_for(tasks.size(), options.jobs, [&](std::size_t i) {
        const auto& solved = tasks[i];
        if (!solved.task || !solved.solution) {
            throw ConfigError("tasks", "every task needs an oracle solution");
        }
        const Task& task = *solved.task;
        const std::uint64_t seed = task_eval_seed(options.seed, i);

        rollout::FewShotContext context;
        if (options.num_support > 0) {
            auto support = rollout::make_policy(options.support_policy, task, solved.solution);
            Rng ctx_rng(splitmix64(seed ^ kContextSalt));
            context = dataset::build_context(task, options.num_support, *support, ctx_rng);
        }

        rollout::OraclePolicy oracle(solved.solution);
        const auto opt = mean_return(task, oracle, seed, n, nullptr, options.rollout);
        auto evaluated = rollout::make_policy(policy, task, solved.solution);
        const auto got = mean_return(task, *evaluated, seed, n, &context, options.rollout);

        TaskEval& te = report.per_task[i];
        te.task_id = task.id;
        te.opt_reward = opt.mean;
        te.opt_stderr = opt.std_error;
        te.eval_reward = got.mean;
        te.eval_stderr = got.std_error;
        te.invalid_actions = got.invalid_actions;
        if (solved.solution->is_mdp()) {
            te.dp_value = solved.solution->initial_value(task);
        }
        te.excluded = !(opt.mean > kDegenerateOptimum);
        te.gap = te.excluded ? 0.0 : (opt.mean - got.mean) / opt.mean;
    });

    std::vector<double> gaps;
    for (const auto& te : report.per_task) {
        report.invalid_action_count += te.invalid_actions;
        if (te.excluded) {
            ++report.num_excluded;
        } else {
            gaps.push_back(te.gap);
        }
    }
    if (gaps.empty()) {
        throw DegenerateOptimum("every task has an oracle return at or below 1e-9");
    }
    report.num_included = gaps.size();
    const auto ci = t_interval(gaps);
    report.mean_gap = ci.mean;
    report.ci_low = ci.low;
    report.ci_high = ci.high;
    report.pairing_warning = ci.mean < -2.0 * (ci.high - ci.mean);
    return report;
}

} // namespace icdm::eval
