#pragma once

#include "icdm/core/belief.hpp"
#include "icdm/solvers/mdp_solver.hpp"

namespace icdm::solvers {

/// QMDP approximation: acts greedily on sum_s b(s) Q^MDP_t(s, a) of the latent
/// MDP. Approximate; it ignores the value of information.
class QmdpPolicy {
public:
    explicit QmdpPolicy(const TabularMDP& latent);

    int action(int t, const Belief& belief) const;
    std::vector<double> action_values(int t, const Belief& belief) const;
    const MdpSolution& latent_solution() const noexcept { return latent_; }

private:
    MdpSolution latent_;
};

QmdpPolicy qmdp_policy(const TabularPOMDP& pomdp);

} // namespace icdm::solvers
