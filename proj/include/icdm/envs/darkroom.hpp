#pragma once

#include "icdm/core/rng.hpp"
#include "icdm/core/task.hpp"

#include <utility>
#include <vector>

namespace icdm::envs {

struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Moves on the grid. North decreases the row index y, east increases x.
enum DarkroomAction : int { north = 0, south = 1, east = 2, west = 3, stay = 4 };

/// 10x10 grid with a hidden goal. The agent starts at (0,0), observes its own
/// cell (index y * grid_size + x) and earns +1 only for `stay` on the goal.
struct DarkroomTask {
    int grid_size = 10;
    Cell goal;
    int horizon = 100;
    static constexpr int num_actions = 5;

    Cell move(Cell from, int action) const;
    double reward(Cell at, int action) const;
    int cell_index(Cell c) const { return c.y * grid_size + c.x; }
    Cell cell_at(int index) const { return {index % grid_size, index / grid_size}; }

    /// Tabular MDP over cells, deterministic, start (0,0), discount 1.
    TabularMDP to_mdp() const;
    Task to_task(std::string id) const;
};

DarkroomTask gen_darkroom(Cell goal, int grid_size = 10, int horizon = 100);

struct GoalSplit {
    std::vector<Cell> train;
    std::vector<Cell> test;
};

/// Seeded shuffle of all grid cells into `num_train` training goals and the
/// remaining test goals.
GoalSplit split_darkroom_goals(Rng& rng, int grid_size = 10, int num_train = 80);

} // namespace icdm::envs
