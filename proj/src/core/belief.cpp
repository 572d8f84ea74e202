#include "icdm/core/belief.hpp"

#include "icdm/core/error.hpp"

#include <cmath>

namespace icdm {

Belief::Belief(std::vector<double> probs) : probs_(checked_distribution(probs, "belief")) {}

Belief Belief::delta(std::size_t size, std::size_t state)
{
    std::vector<double> p(size, 0.0);
    p.at(state) = 1.0;
    return Belief(std::move(p));
}

Belief Belief::uniform(std::size_t size)
{
    return Belief(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

std::vector<double> predict_states(std::span<const double> belief, std::size_t action, const Kernel& transition)
{
    if (belief.size() != transition.rows() || action >= transition.actions()) {
        throw ModelError("predict_states: dimension mismatch");
    }
    std::vector<double> next(transition.cols(), 0.0);
    for (std::size_t s = 0; s < belief.size(); ++s) {
        const double w = belief[s];
        if (w == 0.0) {
            continue;
        }
        const auto row = transition.row(s, action);
        for (std::size_t t = 0; t < row.size(); ++t) {
            next[t] += w * row[t];
        }
    }
    return next;
}

namespace {

void check_observation(const Kernel& observation, std::size_t states, std::size_t action)
{
    if (observation.rows() != states || action >= observation.actions()) {
        throw ModelError("observation kernel: dimension mismatch");
    }
}

Belief posterior(const std::vector<double>& prior, std::size_t action, std::size_t obs, const Kernel& observation)
{
    check_observation(observation, prior.size(), action);
    if (obs >= observation.cols()) {
        throw ModelError("observation index out of range");
    }
    std::vector<double> post(prior.size());
    double mass = 0.0;
    for (std::size_t s = 0; s < prior.size(); ++s) {
        post[s] = observation(s, action, obs) * prior[s];
        mass += post[s];
    }
    if (!(mass > 0.0)) {
        throw ZeroLikelihood("observation " + std::to_string(obs) + " has zero predictive probability");
    }
    for (double& p : post) {
        p /= mass;
    }
    return Belief(std::move(post));
}

} // namespace

std::vector<double> belief_predictive(const Belief& belief, std::size_t action, const Kernel& transition,
                                      const Kernel& observation)
{
    const auto next = predict_states(belief.probs(), action, transition);
    check_observation(observation, next.size(), action);
    std::vector<double> out(observation.cols(), 0.0);
    for (std::size_t s = 0; s < next.size(); ++s) {
        if (next[s] == 0.0) {
            continue;
        }
        const auto row = observation.row(s, action);
        for (std::size_t o = 0; o < row.size(); ++o) {
            out[o] += next[s] * row[o];
        }
    }
    return out;
}

Belief belief_update(const Belief& belief, std::size_t action, std::size_t obs, const Kernel& transition,
                     const Kernel& observation)
{
    return posterior(predict_states(belief.probs(), action, transition), action, obs, observation);
}

Belief condition_on_observation(std::span<const double> prior, std::size_t action, std::size_t obs,
                                const Kernel& observation)
{
    return posterior(std::vector<double>(prior.begin(), prior.end()), action, obs, observation);
}

double kl_divergence(std::span<const double> p, std::span<const double> q)
{
    if (p.size() != q.size()) {
        throw ModelError("kl_divergence: length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) {
            continue;
        }
        if (q[i] <= 0.0) {
            throw Unsupported("kl_divergence: p has mass outside the support of q at index " + std::to_string(i));
        }
        total += p[i] * std::log(p[i] / q[i]);
    }
    // clamp rounding noise for identical inputs
    return total < 0.0 ? 0.0 : total;
}

} // namespace icdm
