#pragma once

#include "icdm/core/model.hpp"

#include <span>
#include <vector>

namespace icdm {

/// Probability vector over latent states.
class Belief {
public:
    /// Validates (sum within kProbTolerance, no negatives) and renormalizes.
    explicit Belief(std::vector<double> probs);

    static Belief delta(std::size_t size, std::size_t state);
    static Belief uniform(std::size_t size);

    std::size_t size() const noexcept { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }
    const std::vector<double>& probs() const noexcept { return probs_; }

    friend bool operator==(const Belief&, const Belief&) = default;

private:
    std::vector<double> probs_;
};

/// One-step state prediction: out(s') = sum_s P(s'|s,a) b(s).
std::vector<double> predict_states(std::span<const double> belief, std::size_t action, const Kernel& transition);

/// Predictive observation distribution P(o | b, a) for the given kernels.
std::vector<double> belief_predictive(const Belief& belief, std::size_t action, const Kernel& transition,
                                      const Kernel& observation);

/// Bayes operator: posterior over s' after taking `action` and seeing `obs`.
/// Throws ZeroLikelihood when P(obs | b, action) is zero.
Belief belief_update(const Belief& belief, std::size_t action, std::size_t obs, const Kernel& transition,
                     const Kernel& observation);

/// Posterior of a state distribution conditioned on `obs` emitted under
/// `action` with no transition in between. Used for the first observation of
/// an episode, which is emitted from the initial state under action 0.
Belief condition_on_observation(std::span<const double> prior, std::size_t action, std::size_t obs,
                                const Kernel& observation);

/// KL(p || q) in nats. Throws Unsupported when p has mass outside supp(q).
double kl_divergence(std::span<const double> p, std::span<const double> q);

} // namespace icdm
