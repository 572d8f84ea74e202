#include "icdm/cli/run_config.hpp"

#include "icdm/core/config.hpp"
#include "icdm/core/error.hpp"
#include "icdm/rollout/policy.hpp"

#include <fstream>

namespace icdm::cli {

namespace {

/// Runs `fn`, qualifying any ConfigError field with `section`.
template <class Fn>
auto within(const std::string& section, Fn&& fn)
{
    try {
        return fn();
    } catch (const ConfigError& e) {
        if (e.field().rfind(section + ".", 0) == 0) {
            throw;
        }
        // nested readers name only their own key, e.g. "grid.x" under "eval.grid"
        const auto leaf = section.substr(section.rfind('.') + 1);
        if (e.field().rfind(leaf + ".", 0) == 0) {
            throw ConfigError(section + e.field().substr(leaf.size()), e.message());
        }
        throw ConfigError(section + "." + e.field(), e.message());
    }
}

} // namespace

void RunConfig::validate() const
{
    if (num_tasks < 0) throw ConfigError("num_tasks", "must be >= 0");
    if (!(p_lo >= 0.0 && p_lo <= p_hi && p_hi <= 1.0)) throw ConfigError("p_range", "need 0 <= p_lo <= p_hi <= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in [0, 1]");
    if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
    if (dataset.trajectories_per_task < 0) throw ConfigError("dataset.trajectories_per_task", "must be >= 0");
    if (eval.rollouts_per_task < 0) throw ConfigError("eval.rollouts_per_task", "must be >= 0");
    if (eval.num_support < 0) throw ConfigError("eval.num_support", "must be >= 0");
    if (eval.timeout_ms < 1) throw ConfigError("eval.timeout_ms", "must be >= 1");
    if (eval.retries < 0) throw ConfigError("eval.retries", "must be >= 0");
    try {
        rollout::PolicySpec::parse(eval.policy);
    } catch (const ConfigError& e) {
        throw ConfigError("eval.policy", e.message());
    } catch (const Error& e) {
        throw ConfigError("eval.policy", e.what());
    }
    rollout::PolicySpec support;
    try {
        support = rollout::PolicySpec::parse(eval.support_policy);
    } catch (const ConfigError& e) {
        throw ConfigError("eval.support_policy", e.message());
    } catch (const Error& e) {
        throw ConfigError("eval.support_policy", e.what());
    }
    if (support.kind == rollout::PolicyKind::external) {
        throw ConfigError("eval.support_policy", "support trajectories must come from a local policy");
    }
    if (darkroom.grid_size < 1) throw ConfigError("darkroom.grid_size", "must be >= 1");
    if (darkroom.horizon < 1) throw ConfigError("darkroom.horizon", "must be >= 1");
    if (darkroom.num_train < 0 || darkroom.num_train > darkroom.grid_size * darkroom.grid_size) {
        throw ConfigError("darkroom.num_train", "must lie in [0, grid_size^2]");
    }
    if (darkroom.rollouts_per_goal < 1) throw ConfigError("darkroom.rollouts_per_goal", "must be >= 1");
    if (darkroom.goals != "test" && darkroom.goals != "all") {
        throw ConfigError("darkroom.goals", "must be \"test\" or \"all\"");
    }
    within("env", [&] { env.validate(); });
    within("ambiguity", [&] { ambiguity.validate(); });
    within("solver", [&] { solver.validate(); });
    within("theory", [&] { theory.validate(); });
    if (eval.grid) {
        within("eval.grid", [&] { eval.grid->validate(); });
    }
}

nlohmann::json to_json(const RunConfig& c)
{
    nlohmann::json eval{{"policy", c.eval.policy},
                        {"rollouts_per_task", c.eval.rollouts_per_task},
                        {"num_support", c.eval.num_support},
                        {"support_policy", c.eval.support_policy},
                        {"sample_model_per_episode", c.eval.sample_model_per_episode},
                        {"timeout_ms", c.eval.timeout_ms},
                        {"retries", c.eval.retries}};
    if (c.eval.grid) {
        eval["grid"] = eval::to_json(*c.eval.grid);
    }
    return {{"setting", to_string(c.setting)},
            {"seed", c.seed},
            {"num_tasks", c.num_tasks},
            {"env", envs::to_json(c.env)},
            {"p_range", {c.p_lo, c.p_hi}},
            {"ambiguity", envs::to_json(c.ambiguity)},
            {"alpha", c.alpha},
            {"solver", solvers::to_json(c.solver)},
            {"dataset", {{"trajectories_per_task", c.dataset.trajectories_per_task}, {"dpt", c.dataset.dpt}}},
            {"eval", eval},
            {"theory", theory::to_json(c.theory)},
            {"darkroom",
             {{"grid_size", c.darkroom.grid_size},
              {"horizon", c.darkroom.horizon},
              {"num_train", c.darkroom.num_train},
              {"rollouts_per_goal", c.darkroom.rollouts_per_goal},
              {"goals", c.darkroom.goals}}},
            {"out", c.out.string()},
            {"jobs", c.jobs}};
}

RunConfig run_config_from_json(const nlohmann::json& j)
{
    ConfigReader r(j, "");
    RunConfig c;
    if (r.has("setting")) {
        c.setting = setting_from_string(r.required<std::string>("setting"));
    } else {
        r.child("setting");
    }
    r.read("seed", c.seed);
    r.read("num_tasks", c.num_tasks);
    if (const auto* env = r.child("env")) c.env = within("env", [&] { return envs::energy_params_from_json(*env); });
    if (r.has("p_range")) {
        std::pair<double, double> range;
        r.read("p_range", range);
        c.p_lo = range.first;
        c.p_hi = range.second;
    } else {
        r.child("p_range");
    }
    if (const auto* amb = r.child("ambiguity")) {
        c.ambiguity = within("ambiguity", [&] { return envs::ambiguity_config_from_json(*amb); });
    }
    r.read("alpha", c.alpha);
    if (const auto* sol = r.child("solver")) {
        c.solver = within("solver", [&] { return solvers::belief_solver_config_from_json(*sol); });
    }
    if (const auto* ds = r.child("dataset")) {
        ConfigReader d(*ds, "dataset");
        d.read("trajectories_per_task", c.dataset.trajectories_per_task);
        d.read("dpt", c.dataset.dpt);
        d.finish();
    }
    if (const auto* ev = r.child("eval")) {
        ConfigReader e(*ev, "eval");
        e.read("policy", c.eval.policy);
        e.read("rollouts_per_task", c.eval.rollouts_per_task);
        e.read("num_support", c.eval.num_support);
        e.read("support_policy", c.eval.support_policy);
        e.read("sample_model_per_episode", c.eval.sample_model_per_episode);
        e.read("timeout_ms", c.eval.timeout_ms);
        e.read("retries", c.eval.retries);
        if (const auto* grid = e.child("grid")) {
            c.eval.grid = within("eval.grid", [&] { return eval::grid_spec_from_json(*grid); });
        }
        e.finish();
    }
    if (const auto* th = r.child("theory")) {
        c.theory = within("theory", [&] { return theory::e2_config_from_json(*th); });
    }
    if (const auto* dr = r.child("darkroom")) {
        ConfigReader d(*dr, "darkroom");
        d.read("grid_size", c.darkroom.grid_size);
        d.read("horizon", c.darkroom.horizon);
        d.read("num_train", c.darkroom.num_train);
        d.read("rollouts_per_goal", c.darkroom.rollouts_per_goal);
        d.read("goals", c.darkroom.goals);
        d.finish();
    }
    if (r.has("out")) {
        c.out = r.required<std::string>("out");
    } else {
        r.child("out");
    }
    r.read("jobs", c.jobs);
    r.finish();
    c.validate();
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("--config", "cannot open " + path.string());
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
    }
    return run_config_from_json(j);
}

} // namespace icdm::cli
