#include "icdm/rollout/rollout.hpp"

#include "icdm/core/error.hpp"

namespace icdm::rollout {

namespace {

struct EnvView {
    const Kernel* transition = nullptr;
    const Kernel* observation = nullptr;  // null for fully observed tasks
    const RewardTable* reward = nullptr;
    const std::vector<double>* initial = nullptr;
    // kernels the agent's belief is tracked with
    const Kernel* belief_transition = nullptr;
    const Kernel* belief_observation = nullptr;
};

EnvView view_of(const Task& task, std::size_t model)
{
    EnvView v;
    if (const auto* mdp = std::get_if<TabularMDP>(&task.model)) {
        v.transition = &mdp->transition();
        v.reward = &mdp->reward();
        v.initial = &mdp->initial_dist();
    } else if (const auto* pomdp = std::get_if<TabularPOMDP>(&task.model)) {
        v.transition = &pomdp->mdp().transition();
        v.observation = &pomdp->observation();
        v.reward = &pomdp->mdp().reward();
        v.initial = &pomdp->mdp().initial_dist();
        v.belief_transition = v.transition;
        v.belief_observation = v.observation;
    } else {
        const auto& ap = std::get<AmbiguousPOMDP>(task.model);
        v.transition = &ap.models().at(model).transition;
        v.observation = &ap.models().at(model).observation;
        v.reward = &ap.reward();
        v.initial = &ap.initial_dist();
        v.belief_transition = &ap.models().front().transition;
        v.belief_observation = &ap.models().front().observation;
    }
    return v;
}

} // namespace

RolloutResult run_rollout(const Task& task, Policy& policy, Rng& env_rng, const FewShotContext* context,
                          const RolloutOptions& options)
{
    RolloutResult out;
    out.trajectory.task_id = task.id;

    const double model_draw = env_rng.uniform();
    if (options.sample_model_per_episode) {
        if (const auto* ap = std::get_if<AmbiguousPOMDP>(&task.model)) {
            out.env_model = std::min(ap->num_models() - 1,
                                     static_cast<std::size_t>(model_draw * static_cast<double>(ap->num_models())));
        }
    }
    const EnvView env = view_of(task, out.env_model);
    const bool observed = env.observation == nullptr;
    const auto horizon = task.horizon();
    const double gamma = task.discount();
    const auto num_actions = task.num_actions();

    auto state = env_rng.categorical(*env.initial);
    const double first_obs_draw = env_rng.uniform();
    std::size_t obs = state;
    if (!observed) {
        obs = Rng::categorical_from(env.observation->row(state, 0), first_obs_draw);
    }

    std::optional<Belief> belief;
    if (!observed) {
        belief = condition_on_observation(*env.initial, 0, obs, *env.belief_observation);
    }

    double weight = 1.0;
    for (int t = 0; t < horizon; ++t) {
        if (belief) {
            out.beliefs.push_back(*belief);
        }
        out.latent_states.push_back(static_cast<int>(state));
        const DecisionContext ctx{task, t, static_cast<int>(obs), out.trajectory, belief, context};
        int action = 0;
        try {
            action = policy.act(ctx);
        } catch (const InvalidAction&) {
            action = -1;
        }
        if (action < 0 || static_cast<std::size_t>(action) >= num_actions) {
            ++out.invalid_actions;
            action = 0;
        }
        const auto a = static_cast<std::size_t>(action);
        const double reward = (*env.reward)(state, a);
        out.trajectory.steps.push_back({static_cast<int>(obs), action, reward});
        out.discounted_return += weight * reward;
        weight *= gamma;

        const auto next_state = Rng::categorical_from(env.transition->row(state, a), env_rng.uniform());
        const double obs_draw = env_rng.uniform();
        std::size_t next_obs = next_state;
        if (!observed) {
            next_obs = Rng::categorical_from(env.observation->row(next_state, a), obs_draw);
            if (t + 1 < horizon) {
                belief = belief_update(*belief, a, next_obs, *env.belief_transition, *env.belief_observation);
            }
        }
        state = next_state;
        obs = next_obs;
    }
    return out;
}

Belief belief_from_history(const Task& task, const Trajectory& history, int current_obs)
{
    const EnvView env = view_of(task, 0);
    if (env.belief_observation == nullptr) {
        throw Unsupported("belief tracking needs a partially observed task");
    }
    std::vector<std::size_t> observations;
    for (const auto& step : history.steps) {
        observations.push_back(static_cast<std::size_t>(step.obs));
    }
    observations.push_back(static_cast<std::size_t>(current_obs));
    for (const auto o : observations) {
        if (o >= task.num_obs()) {
            throw InvalidAction("observation out of range", static_cast<long long>(o));
        }
    }
    Belief belief = condition_on_observation(*env.initial, 0, observations.front(), *env.belief_observation);
    for (std::size_t i = 0; i < history.steps.size(); ++i) {
        const auto a = static_cast<std::size_t>(history.steps[i].action);
        if (a >= task.num_actions()) {
            throw InvalidAction("action out of range", history.steps[i].action);
        }
        belief = belief_update(belief, a, observations[i + 1], *env.belief_transition, *env.belief_observation);
    }
    return belief;
}

} // namespace icdm::rollout
