#pragma once

// Reference computations written without the library's solvers. They are
// exponential and meant for tiny instances only.

#include "icdm/core/model.hpp"

#include <functional>
#include <vector>

namespace icdm::oracle {

/// V^pi_0(s) of a deterministic Markov policy pi[t][s], by direct recursion.
std::vector<double> evaluate_deterministic(const TabularMDP& mdp, const std::vector<std::vector<int>>& pi);

struct EnumerationResult {
    /// max over all deterministic Markov policies of V^pi_0(s), per s.
    std::vector<double> best_values;
    /// argmax of the initial-distribution value; first found on ties.
    std::vector<std::vector<int>> best_policy;
    double best_initial_value = 0.0;
    std::size_t policies = 0;
};

/// Enumerates all |A|^(|S| T) deterministic Markov policies.
EnumerationResult enumerate_mdp_policies(const TabularMDP& mdp);

/// Expected discounted return of a stochastic Markov policy by forward
/// propagation of the state-action occupancy.
double forward_policy_value(const TabularMDP& mdp,
                            const std::function<std::vector<double>(int, std::size_t)>& policy);

/// Full expectimax over unnormalized joint state-history weights, no
/// memoization. The first observation is emitted from the initial
/// distribution under action 0.
double pomdp_expectimax(const TabularPOMDP& pomdp);

/// Two-step alpha-MEU value from the initial distribution, spelled out with
/// explicit loops over actions, observations and models. Requires T = 2.
double apomdp_two_step(const AmbiguousPOMDP& task);

/// Best open-loop action sequence value from the initial distribution.
double open_loop_value(const TabularMDP& mdp);

/// Posterior over S_t given a short observable history, by summing over
/// every latent path. history = (o_1, a_1), (o_2, a_2), ..., current obs last.
std::vector<double> path_posterior(const TabularPOMDP& pomdp, const std::vector<int>& obs,
                                   const std::vector<int>& actions);

} // namespace icdm::oracle
