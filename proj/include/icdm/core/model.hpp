#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace icdm {

/// Absolute tolerance used when validating probability vectors.
inline constexpr double kProbTolerance = 1e-9;

/// Checks that `probs` is a probability vector within kProbTolerance and
/// returns it renormalized to sum to 1. Vectors whose sum is already 1 up to
/// summation rounding are returned unchanged, so the check is idempotent.
/// Throws ModelError otherwise.
std::vector<double> checked_distribution(std::span<const double> probs, const std::string& what);

/// Time-homogeneous conditional kernel K(col | row, action), stored row-major
/// as [row][action][col]. Used for both transitions P(s'|s,a) and
/// observations Q(o|s',a).
class Kernel {
public:
    Kernel() = default;
    Kernel(std::size_t rows, std::size_t actions, std::size_t cols, std::vector<double> data);

    static Kernel from_nested(const std::vector<std::vector<std::vector<double>>>& nested);
    std::vector<std::vector<std::vector<double>>> nested() const;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t actions() const noexcept { return actions_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t r, std::size_t a) const
    {
        return {data_.data() + (r * actions_ + a) * cols_, cols_};
    }
    double operator()(std::size_t r, std::size_t a, std::size_t c) const
    {
        return data_[(r * actions_ + a) * cols_ + c];
    }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Kernel&, const Kernel&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t actions_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Reward table R(s, a), row-major [state][action].
class RewardTable {
public:
    RewardTable() = default;
    RewardTable(std::size_t states, std::size_t actions, std::vector<double> data);

    static RewardTable from_nested(const std::vector<std::vector<double>>& nested);
    std::vector<std::vector<double>> nested() const;

    std::size_t states() const noexcept { return states_; }
    std::size_t actions() const noexcept { return actions_; }
    double operator()(std::size_t s, std::size_t a) const { return data_[s * actions_ + a]; }

    friend bool operator==(const RewardTable&, const RewardTable&) = default;

private:
    std::size_t states_ = 0;
    std::size_t actions_ = 0;
    std::vector<double> data_;
};

/// Finite-horizon tabular MDP. Immutable after construction.
class TabularMDP {
public:
    TabularMDP(Kernel transition, RewardTable reward, std::vector<double> initial_dist, int horizon,
               double discount);

    std::size_t num_states() const noexcept { return transition_.rows(); }
    std::size_t num_actions() const noexcept { return transition_.actions(); }
    const Kernel& transition() const noexcept { return transition_; }
    const RewardTable& reward() const noexcept { return reward_; }
    double reward(std::size_t s, std::size_t a) const { return reward_(s, a); }
    const std::vector<double>& initial_dist() const noexcept { return initial_; }
    int horizon() const noexcept { return horizon_; }
    double discount() const noexcept { return discount_; }

    friend bool operator==(const TabularMDP&, const TabularMDP&) = default;

private:
    Kernel transition_;
    RewardTable reward_;
    std::vector<double> initial_;
    int horizon_;
    double discount_;
};

/// Latent MDP plus an observation kernel Q(o | s', a) indexed by the state
/// entered and the action that led there.
class TabularPOMDP {
public:
    TabularPOMDP(TabularMDP mdp, Kernel observation);

    const TabularMDP& mdp() const noexcept { return mdp_; }
    const Kernel& observation() const noexcept { return observation_; }
    std::size_t num_obs() const noexcept { return observation_.cols(); }

    friend bool operator==(const TabularPOMDP&, const TabularPOMDP&) = default;

private:
    TabularMDP mdp_;
    Kernel observation_;
};

struct KernelPair {
    Kernel transition;
    Kernel observation;

    friend bool operator==(const KernelPair&, const KernelPair&) = default;
};

/// POMDP whose kernels are only known to lie in a finite ambiguity set.
/// Model 0 is the base (nominal) model.
class AmbiguousPOMDP {
public:
    AmbiguousPOMDP(std::vector<KernelPair> models, RewardTable reward, std::vector<double> initial_dist,
                   int horizon, double discount, double alpha);

    /// Singleton ambiguity set around a POMDP.
    static AmbiguousPOMDP from_pomdp(const TabularPOMDP& pomdp, double alpha);

    const std::vector<KernelPair>& models() const noexcept { return models_; }
    std::size_t num_models() const noexcept { return models_.size(); }
    std::size_t num_states() const noexcept { return reward_.states(); }
    std::size_t num_actions() const noexcept { return reward_.actions(); }
    std::size_t num_obs() const noexcept { return models_.front().observation.cols(); }
    const RewardTable& reward() const noexcept { return reward_; }
    const std::vector<double>& initial_dist() const noexcept { return initial_; }
    int horizon() const noexcept { return horizon_; }
    double discount() const noexcept { return discount_; }
    double alpha() const noexcept { return alpha_; }

    /// The POMDP formed by model `m` with this task's reward and horizon.
    TabularPOMDP model_pomdp(std::size_t m) const;

    friend bool operator==(const AmbiguousPOMDP&, const AmbiguousPOMDP&) = default;

private:
    std::vector<KernelPair> models_;
    RewardTable reward_;
    std::vector<double> initial_;
    int horizon_;
    double discount_;
    double alpha_;
};

} // namespace icdm
