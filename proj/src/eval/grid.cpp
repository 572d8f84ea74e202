#include "icdm/eval/grid.hpp"

#include "icdm/core/config.hpp"
#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/solvers/oracle.hpp"

#include <cstdio>
#include <map>
#include <memory>

namespace icdm::eval {

void GridSpec::validate() const
{
    const auto nonempty = [](const auto& v, const char* field) {
        if (v.empty()) {
            throw ConfigError(field, "axis must have at least one value");
        }
    };
    nonempty(settings, "grid.settings");
    nonempty(horizons, "grid.horizons");
    nonempty(obs_probs, "grid.obs_probs");
    nonempty(num_models, "grid.num_models");
    nonempty(alphas, "grid.alphas");
    nonempty(p_ranges, "grid.p_ranges");
    nonempty(support_policies, "grid.support_policies");
    nonempty(num_supports, "grid.num_supports");
    for (const auto s : settings) {
        if (s == Setting::darkroom) {
            throw ConfigError("grid.settings", "darkroom has its own harness");
        }
    }
    for (const int t : horizons) {
        if (t < 1) throw ConfigError("grid.horizons", "must be >= 1");
    }
    for (const double q : obs_probs) {
        if (!(q > 0.0 && q <= 1.0)) throw ConfigError("grid.obs_probs", "must lie in (0, 1]");
    }
    for (const int m : num_models) {
        if (m < 1) throw ConfigError("grid.num_models", "must be >= 1");
    }
    for (const double a : alphas) {
        if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("grid.alphas", "must lie in [0, 1]");
    }
    for (const auto& [lo, hi] : p_ranges) {
        if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) throw ConfigError("grid.p_ranges", "need 0 <= lo <= hi <= 1");
    }
    for (const auto& p : support_policies) {
        const auto spec = rollout::PolicySpec::parse(p);
        if (spec.kind == rollout::PolicyKind::external) {
            throw ConfigError("grid.support_policies", "support trajectories must come from a local policy");
        }
    }
    for (const int k : num_supports) {
        if (k < 0) throw ConfigError("grid.num_supports", "must be >= 0");
    }
    if (tasks_per_cell < 1) throw ConfigError("grid.tasks_per_cell", "must be >= 1");
    if (rollouts_per_task < 0) throw ConfigError("grid.rollouts_per_task", "must be >= 0");
    base.validate();
    ambiguity.validate();
    solver.validate();
}

nlohmann::json to_json(const GridSpec& s)
{
    nlohmann::json settings = nlohmann::json::array();
    for (const auto st : s.settings) {
        settings.push_back(to_string(st));
    }
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& [lo, hi] : s.p_ranges) {
        ranges.push_back({lo, hi});
    }
    return {{"settings", settings},
            {"horizons", s.horizons},
            {"obs_probs", s.obs_probs},
            {"num_models", s.num_models},
            {"alphas", s.alphas},
            {"p_ranges", ranges},
            {"support_policies", s.support_policies},
            {"num_supports", s.num_supports},
            {"tasks_per_cell", s.tasks_per_cell},
            {"rollouts_per_task", s.rollouts_per_task},
            {"env", envs::to_json(s.base)},
            {"ambiguity", envs::to_json(s.ambiguity)},
            {"solver", solvers::to_json(s.solver)},
            {"sample_model_per_episode", s.sample_model_per_episode}};
}

GridSpec grid_spec_from_json(const nlohmann::json& j)
{
    ConfigReader r(j, "grid");
    GridSpec s;
    if (r.has("settings")) {
        std::vector<std::string> names;
        r.read("settings", names);
        s.settings.clear();
        for (const auto& n : names) {
            s.settings.push_back(setting_from_string(n));
        }
    } else {
        r.child("settings");
    }
    r.read("horizons", s.horizons);
    r.read("obs_probs", s.obs_probs);
    r.read("num_models", s.num_models);
    r.read("alphas", s.alphas);
    r.read("p_ranges", s.p_ranges);
    r.read("support_policies", s.support_policies);
    r.read("num_supports", s.num_supports);
    r.read("tasks_per_cell", s.tasks_per_cell);
    r.read("rollouts_per_task", s.rollouts_per_task);
    if (const auto* env = r.child("env")) s.base = envs::energy_params_from_json(*env);
    if (const auto* amb = r.child("ambiguity")) s.ambiguity = envs::ambiguity_config_from_json(*amb);
    if (const auto* sol = r.child("solver")) s.solver = solvers::belief_solver_config_from_json(*sol);
    r.read("sample_model_per_episode", s.sample_model_per_episode);
    r.finish();
    s.validate();
    return s;
}

std::vector<ExperimentCell> expand_grid(const GridSpec& spec)
{
    spec.validate();
    std::vector<ExperimentCell> cells;
    for (const auto setting : spec.settings) {
        const bool partial = setting != Setting::mdp;
        const bool ambiguous = setting == Setting::apomdp;
        std::vector<std::optional<double>> qs{std::nullopt};
        if (partial) {
            qs.assign(spec.obs_probs.begin(), spec.obs_probs.end());
        }
        std::vector<std::optional<int>> ms{std::nullopt};
        std::vector<std::optional<double>> as{std::nullopt};
        if (ambiguous) {
            ms.assign(spec.num_models.begin(), spec.num_models.end());
            as.assign(spec.alphas.begin(), spec.alphas.end());
        }
        for (const int t : spec.horizons) {
            for (const auto& q : qs) {
                for (const auto& m : ms) {
                    for (const auto& a : as) {
                        for (const auto& [lo, hi] : spec.p_ranges) {
                            for (const auto& sp : spec.support_policies) {
                                for (const int k : spec.num_supports) {
                                    cells.push_back({cells.size(), setting, t, q, m, a, lo, hi, sp, k});
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return cells;
}

namespace {

struct SolvedSet {
    std::vector<dataset::SolvedTask> tasks;
    std::size_t fallbacks = 0;
};

std::string task_set_key(const ExperimentCell& c)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s|%d|%.17g|%d|%.17g|%.17g|%.17g", to_string(c.setting).c_str(), c.horizon,
                  c.obs_prob.value_or(-1.0), c.num_models.value_or(-1), c.alpha.value_or(-1.0), c.p_lo, c.p_hi);
    return buf;
}

SolvedSet build_task_set(const GridSpec& spec, const ExperimentCell& cell, std::uint64_t seed, int jobs)
{
    envs::EnergyTaskDistribution dist;
    dist.base = spec.base;
    dist.base.horizon = cell.horizon;
    dist.base.obs_prob = cell.obs_prob.value_or(1.0);
    dist.p_lo = cell.p_lo;
    dist.p_hi = cell.p_hi;
    envs::AmbiguityConfig amb = spec.ambiguity;
    amb.num_models = cell.num_models.value_or(1);
    const auto tasks = envs::generate_energy_tasks(cell.setting, dist, amb, cell.alpha.value_or(1.0),
                                                   static_cast<std::size_t>(spec.tasks_per_cell), seed,
                                                   "cell" + std::to_string(cell.index));
    SolvedSet out;
    out.tasks.resize(tasks.size());
    std::vector<char> fell_back(tasks.size(), 0);
    parallel_for(tasks.size(), jobs, [&](std::size_t i) {
        auto task = std::make_shared<const Task>(tasks[i]);
        auto solution = std::make_shared<const solvers::TaskSolution>(solvers::solve_task(*task, spec.solver));
        fell_back[i] = solution->used_fallback ? 1 : 0;
        out.tasks[i] = {std::move(task), std::move(solution)};
    });
    for (const char f : fell_back) {
        out.fallbacks += static_cast<std::size_t>(f);
    }
    return out;
}

} // namespace

std::vector<CellReport> run_experiment_grid(const GridSpec& spec, const rollout::PolicySpec& policy,
                                            std::uint64_t seed, int jobs)
{
    const auto cells = expand_grid(spec);
    std::map<std::string, SolvedSet> solved;
    std::vector<CellReport> out;
    for (const auto& cell : cells) {
        const auto key = task_set_key(cell);
        auto it = solved.find(key);
        if (it == solved.end()) {
            it = solved.emplace(key, build_task_set(spec, cell, seed, jobs)).first;
        }
        EvalOptions options;
        options.rollouts_per_task = spec.rollouts_per_task;
        options.seed = seed;
        options.jobs = jobs;
        options.rollout.sample_model_per_episode = spec.sample_model_per_episode;
        options.num_support = cell.num_support;
        options.support_policy = rollout::PolicySpec::parse(cell.support_policy);
        out.push_back({cell, optimality_gap(it->second.tasks, policy, options), it->second.fallbacks});
    }
    return out;
}

void write_grid_csv(std::ostream& out, const std::vector<CellReport>& cells)
{
    out << "cell,setting,horizon,q,num_models,alpha,p_lo,p_hi,support_policy,num_support,policy,num_tasks,"
           "num_excluded,rollouts_per_task,mean_gap,ci_low,ci_high,invalid_actions,fallback_solves\n";
    const auto opt_real = [](const std::optional<double>& v) {
        if (!v) return std::string();
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", *v);
        return std::string(buf);
    };
    for (const auto& c : cells) {
        const auto& e = c.cell;
        const auto& r = c.report;
        char buf[512];
        std::snprintf(buf, sizeof buf, "%zu,%s,%d,%s,%s,%s,%.10g,%.10g,%s,%d,%s,%zu,%zu,%d,%.10g,%.10g,%.10g,%d,%zu\n",
                      e.index, to_string(e.setting).c_str(), e.horizon, opt_real(e.obs_prob).c_str(),
                      e.num_models ? std::to_string(*e.num_models).c_str() : "", opt_real(e.alpha).c_str(), e.p_lo,
                      e.p_hi, e.support_policy.c_str(), e.num_support, r.policy.c_str(), r.per_task.size(),
                      r.num_excluded, r.rollouts_per_task, r.mean_gap, r.ci_low, r.ci_high, r.invalid_action_count,
                      c.fallback_solves);
        out << buf;
    }
}

} // namespace icdm::eval
