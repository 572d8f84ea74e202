#pragma once

#include "icdm/core/belief.hpp"
#include "icdm/core/rng.hpp"
#include "icdm/core/task.hpp"
#include "icdm/solvers/oracle.hpp"
#include "icdm/solvers/qmdp.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace icdm::rollout {

/// Few-shot support trajectories and their serialized text ctx.
struct FewShotContext {
    std::vector<Trajectory> support;
    std::string encoded;
};

/// What a policy sees before choosing a_t.
struct DecisionContext {
    const Task& task;
    int t;                              // 0-based decision epoch
    int obs;                            // X_t
    const Trajectory& history;          // completed steps before t
    const std::optional<Belief>& belief;  // tracked belief (POMDP/APOMDP only)
    const FewShotContext* context;      // may be null
};

class Policy {
public:
    virtual ~Policy() = default;
    /// Called once per episode; stochastic policies reseed from `episode_seed`.
    virtual void begin_episode(std::uint64_t /*episode_seed*/) {}
    virtual int act(const DecisionContext& ctx) = 0;
    virtual std::string name() const = 0;
};

/// Acts with a solved oracle. MDP tasks read the policy table at the current
/// state; belief tasks query the solution at the tracked belief.
class OraclePolicy : public Policy {
public:
    explicit OraclePolicy(std::shared_ptr<const solvers::TaskSolution> solution);
    int act(const DecisionContext& ctx) override;
    std::string name() const override { return "oracle"; }

private:
    std::shared_ptr<const solvers::TaskSolution> solution_;
};

/// Uniform over actions, independently per step.
class RandomPolicy : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed = 0) : rng_(seed) {}
    void begin_episode(std::uint64_t episode_seed) override { rng_ = Rng(episode_seed); }
    int act(const DecisionContext& ctx) override;
    std::string name() const override { return "random"; }

private:
    Rng rng_;
};

class ConstantPolicy : public Policy {
public:
    explicit ConstantPolicy(int action) : action_(action) {}
    int act(const DecisionContext&) override { return action_; }
    std::string name() const override { return "constant:" + std::to_string(action_); }

private:
    int action_;
};

/// QMDP on the tracked belief. For MDP tasks the belief is the point mass at
/// the observed state; for APOMDPs the base model's latent MDP is used.
class QmdpAgent : public Policy {
public:
    explicit QmdpAgent(const Task& task);
    int act(const DecisionContext& ctx) override;
    std::string name() const override { return "qmdp"; }

private:
    solvers::QmdpPolicy qmdp_;
};

enum class PolicyKind { oracle, random, qmdp, external, constant };

/// Serializable description of a policy, bound to a task by make_policy().
struct PolicySpec {
    PolicyKind kind = PolicyKind::oracle;
    std::string endpoint;   // external only
    int constant_action = 0;
    int timeout_ms = 60000;
    int retries = 0;

    /// Parses "oracle", "random", "qmdp", "constant:<a>" or "external:<endpoint>".
    static PolicySpec parse(const std::string& text);
    std::string to_string() const;
};

/// Creates a policy for `task`. Oracle policies need `solution`.
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, const Task& task,
                                    std::shared_ptr<const solvers::TaskSolution> solution);

} // namespace icdm::rollout
