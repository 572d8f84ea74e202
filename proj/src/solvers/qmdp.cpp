#include "icdm/solvers/qmdp.hpp"

#include "icdm/core/error.hpp"

#include <algorithm>

namespace icdm::solvers {

QmdpPolicy::QmdpPolicy(const TabularMDP& latent) : latent_(solve_mdp(latent)) {}

std::vector<double> QmdpPolicy::action_values(int t, const Belief& belief) const
{
    if (t < 0 || t >= latent_.horizon()) {
        throw ModelError("qmdp: decision epoch out of range");
    }
    const auto& q = latent_.q[static_cast<std::size_t>(t)];
    if (belief.size() != q.size()) {
        throw ModelError("qmdp: belief has the wrong number of states");
    }
    std::vector<double> out(q.front().size(), 0.0);
    for (std::size_t s = 0; s < q.size(); ++s) {
        for (std::size_t a = 0; a < out.size(); ++a) {
            out[a] += belief[s] * q[s][a];
        }
    }
    return out;
}

int QmdpPolicy::action(int t, const Belief& belief) const
{
    const auto values = action_values(t, belief);
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

QmdpPolicy qmdp_policy(const TabularPOMDP& pomdp) { return QmdpPolicy(pomdp.mdp()); }

} // namespace icdm::solvers
