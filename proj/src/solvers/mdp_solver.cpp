#include "icdm/solvers/mdp_solver.hpp"

#include "icdm/core/error.hpp"

namespace icdm::solvers {

double MdpSolution::initial_value(const TabularMDP& mdp) const
{
    double v = 0.0;
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        v += mdp.initial_dist()[s] * values.front()[s];
    }
    return v;
}

MdpSolution solve_mdp(const TabularMDP& mdp)
{
    const auto horizon = static_cast<std::size_t>(mdp.horizon());
    const auto states = mdp.num_states();
    const auto actions = mdp.num_actions();
    const double gamma = mdp.discount();

    MdpSolution sol;
    sol.values.assign(horizon + 1, std::vector<double>(states, 0.0));
    sol.policy.assign(horizon, std::vector<int>(states, 0));
    sol.q.assign(horizon, std::vector<std::vector<double>>(states, std::vector<double>(actions, 0.0)));

    for (std::size_t t = horizon; t-- > 0;) {
        const auto& next = sol.values[t + 1];
        for (std::size_t s = 0; s < states; ++s) {
            int best_action = 0;
            double best = 0.0;
            for (std::size_t a = 0; a < actions; ++a) {
                double cont = 0.0;
                const auto row = mdp.transition().row(s, a);
                for (std::size_t n = 0; n < states; ++n) {
                    cont += row[n] * next[n];
                }
                const double qsa = mdp.reward(s, a) + gamma * cont;
                sol.q[t][s][a] = qsa;
                if (a == 0 || qsa > best) {
                    best = qsa;
                    best_action = static_cast<int>(a);
                }
            }
            sol.values[t][s] = best;
            sol.policy[t][s] = best_action;
        }
    }
    return sol;
}

std::vector<std::vector<double>> evaluate_policy(const TabularMDP& mdp, const MarkovPolicy& policy)
{
    const auto horizon = static_cast<std::size_t>(mdp.horizon());
    const auto states = mdp.num_states();
    const auto actions = mdp.num_actions();
    std::vector<std::vector<double>> values(horizon + 1, std::vector<double>(states, 0.0));
    for (std::size_t t = horizon; t-- > 0;) {
        for (std::size_t s = 0; s < states; ++s) {
            const auto probs = policy(static_cast<int>(t), s);
            if (probs.size() != actions) {
                throw ModelError("evaluate_policy: policy returned the wrong number of actions");
            }
            double v = 0.0;
            for (std::size_t a = 0; a < actions; ++a) {
                if (probs[a] == 0.0) {
                    continue;
                }
                double cont = 0.0;
                const auto row = mdp.transition().row(s, a);
                for (std::size_t n = 0; n < states; ++n) {
                    cont += row[n] * values[t + 1][n];
                }
                v += probs[a] * (mdp.reward(s, a) + mdp.discount() * cont);
            }
            values[t][s] = v;
        }
    }
    return values;
}

double policy_value(const TabularMDP& mdp, const MarkovPolicy& policy)
{
    const auto values = evaluate_policy(mdp, policy);
    double v = 0.0;
    for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        v += mdp.initial_dist()[s] * values.front()[s];
    }
    return v;
}

nlohmann::json to_json(const MdpSolution& solution)
{
    return {{"kind", "mdp"},
            {"horizon", solution.horizon()},
            {"values", solution.values},
            {"policy", solution.policy},
            {"q", solution.q}};
}

MdpSolution mdp_solution_from_json(const nlohmann::json& j)
{
    if (j.value("kind", "") != "mdp") {
        throw ModelError("not an MDP solution");
    }
    MdpSolution s;
    try {
        s.values = j.at("values").get<std::vector<std::vector<double>>>();
        s.policy = j.at("policy").get<std::vector<std::vector<int>>>();
        s.q = j.at("q").get<std::vector<std::vector<std::vector<double>>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed MDP solution: ") + e.what());
    }
    if (s.values.size() != s.policy.size() + 1 || s.q.size() != s.policy.size()) {
        throw ModelError("MDP solution tables disagree on the horizon");
    }
    return s;
}

} // namespace icdm::solvers
