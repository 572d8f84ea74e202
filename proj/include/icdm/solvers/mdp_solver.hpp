#pragma once

#include "icdm/core/model.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <vector>

namespace icdm::solvers {

/// Finite-horizon solution. Decision epochs are indexed t = 0..T-1;
/// values has T+1 rows with values[T] == 0 (no terminal reward).
struct MdpSolution {
    std::vector<std::vector<double>> values;            // [t][s]
    std::vector<std::vector<int>> policy;               // [t][s]
    std::vector<std::vector<std::vector<double>>> q;    // [t][s][a]

    int horizon() const { return static_cast<int>(policy.size()); }
    /// Expected return from the initial distribution.
    double initial_value(const TabularMDP& mdp) const;
};

/// Exact backward induction; ties go to the lowest action index.
MdpSolution solve_mdp(const TabularMDP& mdp);

/// Randomized Markov policy: probs(t, s) -> distribution over actions.
using MarkovPolicy = std::function<std::vector<double>(int t, std::size_t s)>;

/// Exact finite-horizon evaluation of a Markov policy. Returns V^pi[t][s].
std::vector<std::vector<double>> evaluate_policy(const TabularMDP& mdp, const MarkovPolicy& policy);

/// Expected discounted return of `policy` from the initial distribution.
double policy_value(const TabularMDP& mdp, const MarkovPolicy& policy);

nlohmann::json to_json(const MdpSolution& solution);
MdpSolution mdp_solution_from_json(const nlohmann::json& j);

} // namespace icdm::solvers
