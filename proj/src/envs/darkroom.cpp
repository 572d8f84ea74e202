#include "icdm/envs/darkroom.hpp"

#include "icdm/core/error.hpp"

#include <algorithm>

namespace icdm::envs {

Cell DarkroomTask::move(Cell from, int action) const
{
    Cell to = from;
    switch (action) {
    case north:
        to.y -= 1;
        break;
    case south:
        to.y += 1;
        break;
    case east:
        to.x += 1;
        break;
    case west:
        to.x -= 1;
        break;
    case stay:
        break;
    default:
        throw ModelError("darkroom: action out of range");
    }
    if (to.x < 0 || to.y < 0 || to.x >= grid_size || to.y >= grid_size) {
        return from;
    }
    return to;
}

double DarkroomTask::reward(Cell at, int action) const
{
    return action == stay && at == goal ? 1.0 : 0.0;
}

TabularMDP DarkroomTask::to_mdp() const
{
    const auto cells = static_cast<std::size_t>(grid_size * grid_size);
    std::vector<double> transition(cells * num_actions * cells, 0.0);
    std::vector<double> rewards(cells * num_actions, 0.0);
    for (int i = 0; i < grid_size * grid_size; ++i) {
        const Cell c = cell_at(i);
        for (int a = 0; a < num_actions; ++a) {
            const auto row = static_cast<std::size_t>(i) * num_actions + static_cast<std::size_t>(a);
            transition[row * cells + static_cast<std::size_t>(cell_index(move(c, a)))] = 1.0;
            rewards[row] = reward(c, a);
        }
    }
    std::vector<double> initial(cells, 0.0);
    initial[0] = 1.0;
    return TabularMDP(Kernel(cells, num_actions, cells, std::move(transition)),
                      RewardTable(cells, num_actions, std::move(rewards)), std::move(initial), horizon, 1.0);
}

Task DarkroomTask::to_task(std::string id) const
{
    nlohmann::json meta{{"grid_size", grid_size}, {"goal", {goal.x, goal.y}}, {"horizon", horizon}};
    return Task{std::move(id), Setting::darkroom, to_mdp(), std::move(meta)};
}

DarkroomTask gen_darkroom(Cell goal, int grid_size, int horizon)
{
    if (grid_size < 1 || horizon < 1) {
        throw ModelError("darkroom: grid size and horizon must be positive");
    }
    if (goal.x < 0 || goal.y < 0 || goal.x >= grid_size || goal.y >= grid_size) {
        throw ModelError("darkroom: goal outside the grid");
    }
    return DarkroomTask{grid_size, goal, horizon};
}

GoalSplit split_darkroom_goals(Rng& rng, int grid_size, int num_train)
{
    const int cells = grid_size * grid_size;
    if (num_train < 0 || num_train > cells) {
        throw ConfigError("num_train", "must lie in [0, grid_size^2]");
    }
    std::vector<int> order(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) {
        order[static_cast<std::size_t>(i)] = i;
    }
    // Fisher-Yates with the portable index draw
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.index(i)]);
    }
    GoalSplit split;
    for (int k = 0; k < cells; ++k) {
        const int i = order[static_cast<std::size_t>(k)];
        Cell c{i % grid_size, i / grid_size};
        (k < num_train ? split.train : split.test).push_back(c);
    }
    return split;
}

} // namespace icdm::envs
