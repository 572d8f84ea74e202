#pragma once

#include "icdm/core/task.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace icdm::dataset {

inline constexpr int kSchemaVersion = 1;

struct SerializedTrajectory {
    std::string text;
    int schema_version = kSchemaVersion;
};

/// Reward with exactly two decimals; negative zero prints as "0.00".
std::string format_reward(double reward);

/// Canonical text form of a trajectory:
///
///   <O_1> 3, <A_1> 1, <R_1> 0.33, <O_2> 2, <A_2> 0, <R_2> -0.02
///
/// Observations and actions are decimal integers, rewards use format_reward,
/// fields are joined by ", " and the empty trajectory encodes to "".
SerializedTrajectory encode(const Trajectory& trajectory);

/// Strict inverse of encode. Rejects any text that encode would not emit
/// byte-for-byte (leading zeros, "+", "-0.00", wrong step numbers, spacing).
/// Throws ParseError carrying the byte offset of the first violation.
Trajectory decode(std::string_view text);

/// Several trajectories, one per line, each prefixed "TRAJ k: " (k from 1),
/// joined by a single "\n" with no trailing newline. Zero trajectories give "".
std::string encode_context(const std::vector<Trajectory>& trajectories);
std::vector<Trajectory> decode_context(std::string_view text);

} // namespace icdm::dataset
