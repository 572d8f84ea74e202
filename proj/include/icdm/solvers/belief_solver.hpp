#pragma once

#include "icdm/core/belief.hpp"
#include "icdm/core/model.hpp"

#include <nlohmann/json.hpp>

#include <memory>
#include <vector>

namespace icdm::solvers {

struct BeliefSolverConfig {
    /// Memo keys round beliefs to multiples of this step.
    double quantization = 1e-3;
    /// Maximum number of memo entries created while solving; BudgetExceeded
    /// beyond it. Policy queries after the solve are not limited.
    std::size_t node_budget = 5'000'000;
    /// Observations with smaller predictive probability are skipped and the
    /// remaining mass renormalized.
    double obs_prune = 1e-12;
    /// Evaluate each memo entry at its grid point instead of at the first
    /// belief that reached the key. Bounds the reachable key set by the grid
    /// size and makes stored values independent of visit order.
    bool snap_to_grid = false;

    void validate() const;
};

nlohmann::json to_json(const BeliefSolverConfig& cfg);
BeliefSolverConfig belief_solver_config_from_json(const nlohmann::json& j);

/// Largest-remainder rounding of a belief to integer multiples of 1/units.
/// The result sums exactly to `units`; fractional ties favour lower indices.
std::vector<std::int32_t> quantize_belief(std::span<const double> belief, std::int32_t units);

class BeliefTreeSolver;

/// Value function and policy oracle of a (robust) belief-space solve.
///
/// Decision epochs are t = 0..T-1 and V_T = 0. Values are memoized on
/// (t, quantized belief): every belief sharing a key reuses the stored value.
/// Queries off the explored tree extend the memo on demand, so the object is
/// internally synchronized and safe to share between threads.
class RobustSolution {
public:
    explicit RobustSolution(std::shared_ptr<BeliefTreeSolver> impl);

    /// V_t(b, alpha).
    double value(int t, const Belief& belief) const;
    /// U_t(b, alpha, a) for every action, computed from the exact belief.
    std::vector<double> action_values(int t, const Belief& belief) const;
    /// argmax_a U_t(b, alpha, a), lowest index on ties.
    int action(int t, const Belief& belief) const;

    /// Expected value before the first observation: the first symbol is
    /// emitted from the initial distribution under action 0, then V_0 applies
    /// to the posterior. Across models the alpha-MEU mixture of min and max is
    /// taken, as in every later step.
    double initial_value() const;
    /// Belief after the first observation under the base model.
    Belief initial_belief(int first_obs) const;

    std::size_t node_count() const;
    double alpha() const;
    const BeliefSolverConfig& config() const;

    /// Audit export: config, node count, initial value and up to
    /// `max_entries` memo entries {t, belief, value}.
    nlohmann::json to_json(std::size_t max_entries = 10000) const;

private:
    std::shared_ptr<BeliefTreeSolver> impl_;
};

/// Belief-state backward induction from the initial belief.
RobustSolution solve_pomdp(const TabularPOMDP& pomdp, const BeliefSolverConfig& cfg = {});

/// Robust alpha-MEU backward induction:
///   V_t(b) = max_a { b.R(.,a) + alpha*gamma*min_m H(b,a,m) + (1-alpha)*gamma*max_m H(b,a,m) },
///   H(b,a,m) = sum_o P(o|b,a,m) V_{t+1}(B(b,a,o,m)).
RobustSolution solve_apomdp(const AmbiguousPOMDP& apomdp, const BeliefSolverConfig& cfg = {});

} // namespace icdm::solvers
