#include "icdm/core/task.hpp"

#include "icdm/core/error.hpp"

namespace icdm {

std::string to_string(Setting setting)
{
    switch (setting) {
    case Setting::mdp:
        return "mdp";
    case Setting::pomdp:
        return "pomdp";
    case Setting::apomdp:
        return "apomdp";
    case Setting::darkroom:
        return "darkroom";
    }
    return "unknown";
}

Setting setting_from_string(const std::string& name)
{
    if (name == "mdp") {
        return Setting::mdp;
    }
    if (name == "pomdp") {
        return Setting::pomdp;
    }
    if (name == "apomdp") {
        return Setting::apomdp;
    }
    if (name == "darkroom") {
        return Setting::darkroom;
    }
    throw ConfigError("setting", "unknown setting '" + name + "'");
}

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

} // namespace

int Task::horizon() const
{
    return std::visit(overloaded{[](const TabularMDP& m) { return m.horizon(); },
                                 [](const TabularPOMDP& m) { return m.mdp().horizon(); },
                                 [](const AmbiguousPOMDP& m) { return m.horizon(); }},
                      model);
}

double Task::discount() const
{
    return std::visit(overloaded{[](const TabularMDP& m) { return m.discount(); },
                                 [](const TabularPOMDP& m) { return m.mdp().discount(); },
                                 [](const AmbiguousPOMDP& m) { return m.discount(); }},
                      model);
}

std::size_t Task::num_states() const
{
    return std::visit(overloaded{[](const TabularMDP& m) { return m.num_states(); },
                                 [](const TabularPOMDP& m) { return m.mdp().num_states(); },
                                 [](const AmbiguousPOMDP& m) { return m.num_states(); }},
                      model);
}

std::size_t Task::num_actions() const
{
    return std::visit(overloaded{[](const TabularMDP& m) { return m.num_actions(); },
                                 [](const TabularPOMDP& m) { return m.mdp().num_actions(); },
                                 [](const AmbiguousPOMDP& m) { return m.num_actions(); }},
                      model);
}

std::size_t Task::num_obs() const
{
    return std::visit(overloaded{[](const TabularMDP& m) { return m.num_states(); },
                                 [](const TabularPOMDP& m) { return m.num_obs(); },
                                 [](const AmbiguousPOMDP& m) { return m.num_obs(); }},
                      model);
}

double discounted_return(const Trajectory& trajectory, double discount)
{
    double total = 0.0;
    double weight = 1.0;
    for (const auto& step : trajectory.steps) {
        total += weight * step.reward;
        weight *= discount;
    }
    return total;
}

} // namespace icdm
