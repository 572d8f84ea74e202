#include "icdm/core/model.hpp"

#include "icdm/core/error.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace icdm {

std::vector<double> checked_distribution(std::span<const double> probs, const std::string& what)
{
    if (probs.empty()) {
        throw ModelError(what + ": empty probability vector");
    }
    double total = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ModelError(what + ": negative or non-finite probability");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kProbTolerance) {
        throw ModelError(what + ": probabilities sum to " + std::to_string(total));
    }
    std::vector<double> out(probs.begin(), probs.end());
    // rows already normalized up to summation rounding stay bit-identical,
    // so normalizing twice is a no-op
    const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(out.size());
    if (std::abs(total - 1.0) > rounding) {
        for (double& p : out) {
            p /= total;
        }
    }
    return out;
}

Kernel::Kernel(std::size_t rows, std::size_t actions, std::size_t cols, std::vector<double> data)
    : rows_(rows), actions_(actions), cols_(cols), data_(std::move(data))
{
    if (rows == 0 || actions == 0 || cols == 0) {
        throw ModelError("kernel dimensions must be positive");
    }
    if (data_.size() != rows * actions * cols) {
        throw ModelError("kernel data size does not match its dimensions");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t a = 0; a < actions; ++a) {
            const auto offset = (r * actions + a) * cols;
            auto fixed = checked_distribution(std::span<const double>(data_.data() + offset, cols),
                                              "kernel row (" + std::to_string(r) + "," + std::to_string(a) + ")");
            std::copy(fixed.begin(), fixed.end(), data_.begin() + static_cast<std::ptrdiff_t>(offset));
        }
    }
}

Kernel Kernel::from_nested(const std::vector<std::vector<std::vector<double>>>& nested)
{
    if (nested.empty() || nested.front().empty()) {
        throw ModelError("kernel: empty nested array");
    }
    const auto rows = nested.size();
    const auto actions = nested.front().size();
    const auto cols = nested.front().front().size();
    std::vector<double> data;
    data.reserve(rows * actions * cols);
    for (const auto& by_action : nested) {
        if (by_action.size() != actions) {
            throw ModelError("kernel: ragged action dimension");
        }
        for (const auto& row : by_action) {
            if (row.size() != cols) {
                throw ModelError("kernel: ragged outcome dimension");
            }
            data.insert(data.end(), row.begin(), row.end());
        }
    }
    return Kernel(rows, actions, cols, std::move(data));
}

std::vector<std::vector<std::vector<double>>> Kernel::nested() const
{
    std::vector<std::vector<std::vector<double>>> out(rows_, std::vector<std::vector<double>>(actions_));
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t a = 0; a < actions_; ++a) {
            auto span = row(r, a);
            out[r][a].assign(span.begin(), span.end());
        }
    }
    return out;
}

RewardTable::RewardTable(std::size_t states, std::size_t actions, std::vector<double> data)
    : states_(states), actions_(actions), data_(std::move(data))
{
    if (states == 0 || actions == 0 || data_.size() != states * actions) {
        throw ModelError("reward table dimensions mismatch");
    }
    for (double r : data_) {
        if (!std::isfinite(r)) {
            throw ModelError("reward entries must be finite");
        }
    }
}

RewardTable RewardTable::from_nested(const std::vector<std::vector<double>>& nested)
{
    if (nested.empty()) {
        throw ModelError("reward: empty nested array");
    }
    std::vector<double> data;
    for (const auto& row : nested) {
        if (row.size() != nested.front().size()) {
            throw ModelError("reward: ragged rows");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return RewardTable(nested.size(), nested.front().size(), std::move(data));
}

std::vector<std::vector<double>> RewardTable::nested() const
{
    std::vector<std::vector<double>> out(states_);
    for (std::size_t s = 0; s < states_; ++s) {
        out[s].assign(data_.begin() + static_cast<std::ptrdiff_t>(s * actions_),
                      data_.begin() + static_cast<std::ptrdiff_t>((s + 1) * actions_));
    }
    return out;
}

namespace {

void check_horizon_discount(int horizon, double discount)
{
    if (horizon <= 0) {
        throw ModelError("horizon must be positive");
    }
    if (!(discount > 0.0 && discount <= 1.0)) {
        throw ModelError("discount must lie in (0, 1]");
    }
}

} // namespace

TabularMDP::TabularMDP(Kernel transition, RewardTable reward, std::vector<double> initial_dist, int horizon,
                       double discount)
    : transition_(std::move(transition)), reward_(std::move(reward)),
      initial_(checked_distribution(initial_dist, "initial distribution")), horizon_(horizon),
      discount_(discount)
{
    if (transition_.rows() != transition_.cols()) {
        throw ModelError("transition kernel must be square in states");
    }
    if (reward_.states() != transition_.rows() || reward_.actions() != transition_.actions()) {
        throw ModelError("reward table does not match transition dimensions");
    }
    if (initial_.size() != transition_.rows()) {
        throw ModelError("initial distribution has wrong length");
    }
    check_horizon_discount(horizon, discount);
}

TabularPOMDP::TabularPOMDP(TabularMDP mdp, Kernel observation)
    : mdp_(std::move(mdp)), observation_(std::move(observation))
{
    if (observation_.rows() != mdp_.num_states() || observation_.actions() != mdp_.num_actions()) {
        throw ModelError("observation kernel does not match the latent MDP");
    }
}

AmbiguousPOMDP::AmbiguousPOMDP(std::vector<KernelPair> models, RewardTable reward, std::vector<double> initial_dist,
                               int horizon, double discount, double alpha)
    : models_(std::move(models)), reward_(std::move(reward)),
      initial_(checked_distribution(initial_dist, "initial distribution")), horizon_(horizon),
      discount_(discount), alpha_(alpha)
{
    if (models_.empty()) {
        throw ModelError("ambiguity set must contain at least one model");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw ModelError("alpha must lie in [0, 1]");
    }
    check_horizon_discount(horizon, discount);
    const auto& base = models_.front();
    for (const auto& m : models_) {
        if (m.transition.rows() != reward_.states() || m.transition.cols() != reward_.states() ||
            m.transition.actions() != reward_.actions()) {
            throw ModelError("ambiguity set transition dimensions disagree");
        }
        if (m.observation.rows() != reward_.states() || m.observation.actions() != reward_.actions() ||
            m.observation.cols() != base.observation.cols()) {
            throw ModelError("ambiguity set observation dimensions disagree");
        }
    }
    if (initial_.size() != reward_.states()) {
        throw ModelError("initial distribution has wrong length");
    }
}

AmbiguousPOMDP AmbiguousPOMDP::from_pomdp(const TabularPOMDP& pomdp, double alpha)
{
    const auto& mdp = pomdp.mdp();
    return AmbiguousPOMDP({KernelPair{mdp.transition(), pomdp.observation()}}, mdp.reward(), mdp.initial_dist(),
                          mdp.horizon(), mdp.discount(), alpha);
}

TabularPOMDP AmbiguousPOMDP::model_pomdp(std::size_t m) const
{
    const auto& pair = models_.at(m);
    return TabularPOMDP(TabularMDP(pair.transition, reward_, initial_, horizon_, discount_), pair.observation);
}

} // namespace icdm
