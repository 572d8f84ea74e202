#pragma once

#include "icdm/core/task.hpp"

#include <filesystem>

namespace icdm::envs {

inline constexpr int kTaskSchemaVersion = 1;

/// Task file layout:
///
///   {"schema_version": 1, "task_id": ..., "setting": "mdp|pomdp|apomdp|darkroom",
///    "num_states", "num_actions", "num_obs", "horizon", "discount", "alpha",
///    "initial_dist": [...], "reward": [[...]],
///    "models": [{"transition": [[[...]]], "observation": [[[...]]]}, ...],
///    "metadata": {...}}
///
/// MDP and darkroom tasks have one model without "observation"; POMDPs one
/// model; APOMDPs one entry per ambiguity-set member, base first. Kernels are
/// nested [row][action][outcome]. Numbers are written in the shortest decimal
/// form that parses back to the identical double.
nlohmann::json task_to_json(const Task& task);
Task task_from_json(const nlohmann::json& j);

void write_task_file(const std::filesystem::path& path, const Task& task);
Task read_task_file(const std::filesystem::path& path);

} // namespace icdm::envs
