#include "icdm/solvers/belief_solver.hpp"

#include "icdm/core/config.hpp"
#include "icdm/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <optional>
#include <unordered_map>

namespace icdm::solvers {

void BeliefSolverConfig::validate() const
{
    if (!(quantization > 0.0 && quantization <= 1.0)) {
        throw ConfigError("quantization", "must lie in (0, 1]");
    }
    if (node_budget == 0) {
        throw ConfigError("node_budget", "must be positive");
    }
    if (!(obs_prune >= 0.0)) {
        throw ConfigError("obs_prune", "must be non-negative");
    }
}

nlohmann::json to_json(const BeliefSolverConfig& cfg)
{
    return {{"quantization", cfg.quantization},
            {"node_budget", cfg.node_budget},
            {"obs_prune", cfg.obs_prune},
            {"snap_to_grid", cfg.snap_to_grid}};
}

BeliefSolverConfig belief_solver_config_from_json(const nlohmann::json& j)
{
    ConfigReader r(j, "solver");
    BeliefSolverConfig c;
    r.read("quantization", c.quantization);
    r.read("node_budget", c.node_budget);
    r.read("obs_prune", c.obs_prune);
    r.read("snap_to_grid", c.snap_to_grid);
    r.finish();
    c.validate();
    return c;
}

std::vector<std::int32_t> quantize_belief(std::span<const double> belief, std::int32_t units)
{
    std::vector<std::int32_t> counts(belief.size());
    std::vector<std::pair<double, std::size_t>> remainders(belief.size());
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < belief.size(); ++i) {
        const double scaled = belief[i] * units;
        const double floored = std::floor(scaled);
        counts[i] = static_cast<std::int32_t>(floored);
        assigned += counts[i];
        remainders[i] = {scaled - floored, i};
    }
    std::int64_t missing = units - assigned;
    if (missing > 0) {
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t k = 0; k < remainders.size() && missing > 0; ++k, --missing) {
            ++counts[remainders[k].second];
        }
    } else {
        // rounding noise pushed the floors past `units`; trim the largest
        for (; missing < 0; ++missing) {
            auto it = std::max_element(counts.begin(), counts.end());
            --*it;
        }
    }
    return counts;
}

namespace {

struct KeyHash {
    std::size_t operator()(const std::vector<std::int32_t>& key) const noexcept
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto v : key) {
            h ^= static_cast<std::uint32_t>(v);
            h *= 0x100000001b3ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

} // namespace

/// Memoized depth-first alpha-MEU recursion over reachable beliefs.
class BeliefTreeSolver {
public:
    BeliefTreeSolver(AmbiguousPOMDP task, BeliefSolverConfig cfg)
        : task_(std::move(task)), cfg_(cfg),
          units_(static_cast<std::int32_t>(std::llround(1.0 / cfg.quantization))),
          memo_(static_cast<std::size_t>(task_.horizon()))
    {
        cfg_.validate();
        if (units_ < 1) {
            throw ConfigError("quantization", "too coarse");
        }
    }

    double value(int t, const std::vector<double>& b)
    {
        std::lock_guard lock(mutex_);
        return value_locked(t, b);
    }

    std::vector<double> action_values(int t, const std::vector<double>& b)
    {
        std::lock_guard lock(mutex_);
        return action_values_locked(t, b);
    }

    double initial_value()
    {
        std::lock_guard lock(mutex_);
        if (!initial_value_) {
            std::vector<double> per_model;
            for (const auto& m : task_.models()) {
                per_model.push_back(first_step_value(m));
            }
            initial_value_ = mix(per_model);
        }
        // the budget bounds the solve; later policy queries may extend the memo freely
        solved_ = true;
        return *initial_value_;
    }

    Belief initial_belief(int first_obs) const
    {
        return condition_on_observation(task_.initial_dist(), 0, static_cast<std::size_t>(first_obs),
                                        task_.models().front().observation);
    }

    std::size_t node_count()
    {
        std::lock_guard lock(mutex_);
        return nodes_;
    }

    const AmbiguousPOMDP& task() const { return task_; }
    const BeliefSolverConfig& config() const { return cfg_; }
    std::int32_t units() const { return units_; }

    nlohmann::json to_json(std::size_t max_entries)
    {
        const double v0 = initial_value();
        std::lock_guard lock(mutex_);
        nlohmann::json entries = nlohmann::json::array();
        std::size_t written = 0;
        for (std::size_t t = 0; t < memo_.size() && written < max_entries; ++t) {
            // sorted for byte-stable output
            std::vector<std::pair<std::vector<std::int32_t>, double>> rows(memo_[t].begin(), memo_[t].end());
            std::sort(rows.begin(), rows.end());
            for (const auto& [key, v] : rows) {
                if (written++ >= max_entries) {
                    break;
                }
                entries.push_back({{"t", t}, {"belief_units", key}, {"value", v}});
            }
        }
        return {{"kind", task_.num_models() == 1 ? "pomdp" : "apomdp"},
                {"alpha", task_.alpha()},
                {"config", solvers::to_json(cfg_)},
                {"node_count", nodes_},
                {"initial_value", v0},
                {"belief_units", units_},
                {"entries", std::move(entries)},
                {"entries_truncated", nodes_ > max_entries}};
    }

private:
    double mix(const std::vector<double>& per_model) const
    {
        const auto [lo, hi] = std::minmax_element(per_model.begin(), per_model.end());
        const double alpha = task_.alpha();
        return alpha * *lo + (1.0 - alpha) * *hi;
    }

    double first_step_value(const KernelPair& m)
    {
        const auto& prior = task_.initial_dist();
        std::vector<double> probs(m.observation.cols(), 0.0);
        for (std::size_t s = 0; s < prior.size(); ++s) {
            const auto row = m.observation.row(s, 0);
            for (std::size_t o = 0; o < row.size(); ++o) {
                probs[o] += prior[s] * row[o];
            }
        }
        return expect_over_observations(probs, [&](std::size_t o) {
            return value_locked(0, condition_on_observation(prior, 0, o, m.observation).probs());
        });
    }

    template <class ChildValue>
    double expect_over_observations(const std::vector<double>& obs_probs, ChildValue&& child) const
    {
        double kept = 0.0;
        for (double p : obs_probs) {
            if (p >= cfg_.obs_prune && p > 0.0) {
                kept += p;
            }
        }
        double total = 0.0;
        for (std::size_t o = 0; o < obs_probs.size(); ++o) {
            const double p = obs_probs[o];
            if (p >= cfg_.obs_prune && p > 0.0) {
                total += (p / kept) * child(o);
            }
        }
        return total;
    }

    double value_locked(int t, const std::vector<double>& b)
    {
        if (t >= task_.horizon()) {
            return 0.0;
        }
        auto key = quantize_belief(b, units_);
        auto& table = memo_[static_cast<std::size_t>(t)];
        if (auto it = table.find(key); it != table.end()) {
            return it->second;
        }
        std::vector<double> u;
        if (cfg_.snap_to_grid) {
            std::vector<double> grid(key.size());
            for (std::size_t i = 0; i < key.size(); ++i) {
                grid[i] = static_cast<double>(key[i]) / units_;
            }
            u = action_values_locked(t, grid);
        } else {
            u = action_values_locked(t, b);
        }
        const double v = *std::max_element(u.begin(), u.end());
        if (!solved_ && nodes_ >= cfg_.node_budget) {
            throw BudgetExceeded("belief solver exceeded its node budget of " + std::to_string(cfg_.node_budget) +
                                 " memo entries");
        }
        table.emplace(std::move(key), v);
        ++nodes_;
        return v;
    }

    std::vector<double> action_values_locked(int t, const std::vector<double>& b)
    {
        const auto states = task_.num_states();
        const auto actions = task_.num_actions();
        if (b.size() != states) {
            throw ModelError("belief has the wrong number of states");
        }
        if (t < 0 || t >= task_.horizon()) {
            throw ModelError("decision epoch out of range");
        }
        const double gamma = task_.discount();
        const bool last = t + 1 >= task_.horizon();
        std::vector<double> u(actions, 0.0);
        std::vector<double> per_model(task_.num_models(), 0.0);
        for (std::size_t a = 0; a < actions; ++a) {
            double immediate = 0.0;
            for (std::size_t s = 0; s < states; ++s) {
                immediate += b[s] * task_.reward()(s, a);
            }
            if (last) {
                u[a] = immediate;
                continue;
            }
            for (std::size_t m = 0; m < task_.num_models(); ++m) {
                const auto& model = task_.models()[m];
                const auto predicted = predict_states(b, a, model.transition);
                std::vector<double> obs_probs(model.observation.cols(), 0.0);
                for (std::size_t s = 0; s < states; ++s) {
                    if (predicted[s] == 0.0) {
                        continue;
                    }
                    const auto row = model.observation.row(s, a);
                    for (std::size_t o = 0; o < row.size(); ++o) {
                        obs_probs[o] += predicted[s] * row[o];
                    }
                }
                per_model[m] = expect_over_observations(obs_probs, [&](std::size_t o) {
                    std::vector<double> post(states);
                    double mass = 0.0;
                    for (std::size_t s = 0; s < states; ++s) {
                        post[s] = model.observation(s, a, o) * predicted[s];
                        mass += post[s];
                    }
                    for (double& p : post) {
                        p /= mass;
                    }
                    return value_locked(t + 1, post);
                });
            }
            u[a] = immediate + gamma * mix(per_model);
        }
        return u;
    }

    AmbiguousPOMDP task_;
    BeliefSolverConfig cfg_;
    std::int32_t units_;
    std::vector<std::unordered_map<std::vector<std::int32_t>, double, KeyHash>> memo_;
    std::size_t nodes_ = 0;
    std::optional<double> initial_value_;
    bool solved_ = false;
    std::mutex mutex_;
};

RobustSolution::RobustSolution(std::shared_ptr<BeliefTreeSolver> impl) : impl_(std::move(impl)) {}

double RobustSolution::value(int t, const Belief& belief) const { return impl_->value(t, belief.probs()); }

std::vector<double> RobustSolution::action_values(int t, const Belief& belief) const
{
    return impl_->action_values(t, belief.probs());
}

int RobustSolution::action(int t, const Belief& belief) const
{
    const auto u = action_values(t, belief);
    return static_cast<int>(std::max_element(u.begin(), u.end()) - u.begin());
}

double RobustSolution::initial_value() const { return impl_->initial_value(); }

Belief RobustSolution::initial_belief(int first_obs) const { return impl_->initial_belief(first_obs); }

std::size_t RobustSolution::node_count() const { return impl_->node_count(); }

double RobustSolution::alpha() const { return impl_->task().alpha(); }

const BeliefSolverConfig& RobustSolution::config() const { return impl_->config(); }

nlohmann::json RobustSolution::to_json(std::size_t max_entries) const { return impl_->to_json(max_entries); }

RobustSolution solve_pomdp(const TabularPOMDP& pomdp, const BeliefSolverConfig& cfg)
{
    return solve_apomdp(AmbiguousPOMDP::from_pomdp(pomdp, 1.0), cfg);
}

RobustSolution solve_apomdp(const AmbiguousPOMDP& apomdp, const BeliefSolverConfig& cfg)
{
    RobustSolution sol(std::make_shared<BeliefTreeSolver>(apomdp, cfg));
    sol.initial_value();
    return sol;
}

} // namespace icdm::solvers
