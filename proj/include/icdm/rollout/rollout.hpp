#pragma once

#include "icdm/rollout/policy.hpp"

namespace icdm::rollout {

struct RolloutOptions {
    /// APOMDP only: draw the environment model uniformly from the ambiguity
    /// set per episode instead of always simulating the base model.
    bool sample_model_per_episode = false;
};

struct RolloutResult {
    Trajectory trajectory;
    /// sum_t gamma^(t-1) r_t accumulated while stepping.
    double discounted_return = 0.0;
    std::vector<int> latent_states;
    /// Belief before each decision (POMDP/APOMDP only).
    std::vector<Belief> beliefs;
    int invalid_actions = 0;
    std::size_t env_model = 0;
};

/// Simulates one episode of `task` under `policy`.
///
/// Randomness consumption is fixed so paired runs share environment noise:
/// one draw selects the model, one draws S_1, one draws X_1, then every step
/// draws exactly two numbers (next state, next observation). An out-of-range
/// action is replaced by action 0 and counted.
RolloutResult run_rollout(const Task& task, Policy& policy, Rng& env_rng, const FewShotContext* context = nullptr,
                          const RolloutOptions& options = {});

/// Belief an agent tracks after observing `history` and then `current_obs`,
/// using the same kernels run_rollout tracks with (the base model for
/// APOMDPs). Throws Unsupported for fully observed tasks.
Belief belief_from_history(const Task& task, const Trajectory& history, int current_obs);

} // namespace icdm::rollout
