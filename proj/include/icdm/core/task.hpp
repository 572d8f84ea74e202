#pragma once

#include "icdm/core/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <variant>
#include <vector>

namespace icdm {

enum class Setting { mdp, pomdp, apomdp, darkroom };

std::string to_string(Setting setting);
Setting setting_from_string(const std::string& name);

using TaskModel = std::variant<TabularMDP, TabularPOMDP, AmbiguousPOMDP>;

/// A task instance: the model plus its identifier and generation metadata.
/// Darkroom tasks carry a TabularMDP whose states are grid cells.
struct Task {
    std::string id;
    Setting setting;
    TaskModel model;
    nlohmann::json metadata = nlohmann::json::object();

    int horizon() const;
    double discount() const;
    std::size_t num_states() const;
    std::size_t num_actions() const;
    /// Size of the observation alphabet (the state count for MDPs).
    std::size_t num_obs() const;
};

struct Step {
    int obs = 0;
    int action = 0;
    double reward = 0.0;

    friend bool operator==(const Step&, const Step&) = default;
};

/// Observable record (X_t, a_t, r_t), t = 1..T, of one episode.
struct Trajectory {
    std::vector<Step> steps;
    std::string task_id;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// sum_t discount^(t-1) r_t, accumulated in step order.
double discounted_return(const Trajectory& trajectory, double discount);

} // namespace icdm
