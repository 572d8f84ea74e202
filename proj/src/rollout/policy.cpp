#include "icdm/rollout/policy.hpp"

#include "icdm/core/error.hpp"
#include "icdm/rollout/external.hpp"

namespace icdm::rollout {

OraclePolicy::OraclePolicy(std::shared_ptr<const solvers::TaskSolution> solution) : solution_(std::move(solution))
{
    if (!solution_) {
        throw ConfigError("policy", "oracle policy requires a solved task");
    }
}

int OraclePolicy::act(const DecisionContext& ctx)
{
    if (solution_->is_mdp()) {
        const auto& table = solution_->mdp().policy;
        if (table.size() != static_cast<std::size_t>(ctx.task.horizon()) ||
            table.front().size() != ctx.task.num_states()) {
            throw ModelError("oracle solution does not match the task dimensions");
        }
        return table[static_cast<std::size_t>(ctx.t)][static_cast<std::size_t>(ctx.obs)];
    }
    if (!ctx.belief) {
        throw ModelError("belief oracle needs a tracked belief");
    }
    return solution_->belief().action(ctx.t, *ctx.belief);
}

int RandomPolicy::act(const DecisionContext& ctx)
{
    return static_cast<int>(rng_.index(ctx.task.num_actions()));
}

namespace {

TabularMDP latent_mdp(const Task& task)
{
    if (const auto* mdp = std::get_if<TabularMDP>(&task.model)) {
        return *mdp;
    }
    if (const auto* pomdp = std::get_if<TabularPOMDP>(&task.model)) {
        return pomdp->mdp();
    }
    return std::get<AmbiguousPOMDP>(task.model).model_pomdp(0).mdp();
}

} // namespace

QmdpAgent::QmdpAgent(const Task& task) : qmdp_(latent_mdp(task)) {}

int QmdpAgent::act(const DecisionContext& ctx)
{
    if (ctx.belief) {
        return qmdp_.action(ctx.t, *ctx.belief);
    }
    return qmdp_.action(ctx.t, Belief::delta(ctx.task.num_states(), static_cast<std::size_t>(ctx.obs)));
}

PolicySpec PolicySpec::parse(const std::string& text)
{
    PolicySpec spec;
    if (text == "oracle") {
        spec.kind = PolicyKind::oracle;
    } else if (text == "random") {
        spec.kind = PolicyKind::random;
    } else if (text == "qmdp") {
        spec.kind = PolicyKind::qmdp;
    } else if (text.rfind("constant:", 0) == 0) {
        spec.kind = PolicyKind::constant;
        try {
            spec.constant_action = std::stoi(text.substr(9));
        } catch (const std::exception&) {
            throw ConfigError("policy", "bad constant action in '" + text + "'");
        }
    } else if (text.rfind("external:", 0) == 0 && text.size() > 9) {
        spec.kind = PolicyKind::external;
        spec.endpoint = text.substr(9);
        Endpoint::parse(spec.endpoint);
    } else {
        throw ConfigError("policy", "expected oracle|random|qmdp|constant:<a>|external:<endpoint>, got '" + text + "'");
    }
    return spec;
}

std::string PolicySpec::to_string() const
{
    switch (kind) {
    case PolicyKind::oracle:
        return "oracle";
    case PolicyKind::random:
        return "random";
    case PolicyKind::qmdp:
        return "qmdp";
    case PolicyKind::constant:
        return "constant:" + std::to_string(constant_action);
    case PolicyKind::external:
        return "external:" + endpoint;
    }
    return "unknown";
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Task& task,
                                    std::shared_ptr<const solvers::TaskSolution> solution)
{
    switch (spec.kind) {
    case PolicyKind::oracle:
        return std::make_unique<OraclePolicy>(std::move(solution));
    case PolicyKind::random:
        return std::make_unique<RandomPolicy>();
    case PolicyKind::qmdp:
        return std::make_unique<QmdpAgent>(task);
    case PolicyKind::constant:
        if (spec.constant_action < 0 || static_cast<std::size_t>(spec.constant_action) >= task.num_actions()) {
            throw ConfigError("policy", "constant action out of range");
        }
        return std::make_unique<ConstantPolicy>(spec.constant_action);
    case PolicyKind::external: {
        ExternalOptions opts;
        opts.timeout = std::chrono::milliseconds(spec.timeout_ms);
        opts.retries = spec.retries;
        return std::make_unique<ExternalPolicy>(Endpoint::parse(spec.endpoint), opts);
    }
    }
    throw ConfigError("policy", "unknown policy kind");
}

} // namespace icdm::rollout
