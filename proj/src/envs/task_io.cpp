#include "icdm/envs/task_io.hpp"

#include "icdm/core/error.hpp"

#include <fstream>

namespace icdm::envs {

namespace {

using Nested3 = std::vector<std::vector<std::vector<double>>>;

} // namespace

nlohmann::json task_to_json(const Task& task)
{
    nlohmann::json j;
    j["schema_version"] = kTaskSchemaVersion;
    j["task_id"] = task.id;
    j["setting"] = to_string(task.setting);
    j["num_states"] = task.num_states();
    j["num_actions"] = task.num_actions();
    j["num_obs"] = task.num_obs();
    j["horizon"] = task.horizon();
    j["discount"] = task.discount();
    auto models = nlohmann::json::array();
    if (const auto* mdp = std::get_if<TabularMDP>(&task.model)) {
        j["initial_dist"] = mdp->initial_dist();
        j["reward"] = mdp->reward().nested();
        models.push_back({{"transition", mdp->transition().nested()}});
    } else if (const auto* pomdp = std::get_if<TabularPOMDP>(&task.model)) {
        j["initial_dist"] = pomdp->mdp().initial_dist();
        j["reward"] = pomdp->mdp().reward().nested();
        models.push_back(
            {{"transition", pomdp->mdp().transition().nested()}, {"observation", pomdp->observation().nested()}});
    } else {
        const auto& ap = std::get<AmbiguousPOMDP>(task.model);
        j["alpha"] = ap.alpha();
        j["initial_dist"] = ap.initial_dist();
        j["reward"] = ap.reward().nested();
        for (const auto& m : ap.models()) {
            models.push_back({{"transition", m.transition.nested()}, {"observation", m.observation.nested()}});
        }
    }
    j["models"] = std::move(models);
    j["metadata"] = task.metadata;
    return j;
}

Task task_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("schema_version").get<int>() != kTaskSchemaVersion) {
            throw ModelError("unsupported task schema version");
        }
        const auto setting = setting_from_string(j.at("setting").get<std::string>());
        const auto id = j.at("task_id").get<std::string>();
        const auto horizon = j.at("horizon").get<int>();
        const auto discount = j.at("discount").get<double>();
        auto initial = j.at("initial_dist").get<std::vector<double>>();
        auto reward = RewardTable::from_nested(j.at("reward").get<std::vector<std::vector<double>>>());
        const auto& models = j.at("models");
        if (models.empty()) {
            throw ModelError("task file has no models");
        }
        nlohmann::json meta = j.value("metadata", nlohmann::json::object());
        auto transition = [&](std::size_t m) { return Kernel::from_nested(models.at(m).at("transition").get<Nested3>()); };
        auto observation = [&](std::size_t m) {
            return Kernel::from_nested(models.at(m).at("observation").get<Nested3>());
        };
        switch (setting) {
        case Setting::mdp:
        case Setting::darkroom:
            return Task{id, setting, TabularMDP(transition(0), std::move(reward), std::move(initial), horizon, discount),
                        std::move(meta)};
        case Setting::pomdp:
            return Task{id, setting,
                        TabularPOMDP(TabularMDP(transition(0), std::move(reward), std::move(initial), horizon, discount),
                                     observation(0)),
                        std::move(meta)};
        case Setting::apomdp: {
            std::vector<KernelPair> pairs;
            for (std::size_t m = 0; m < models.size(); ++m) {
                pairs.push_back({transition(m), observation(m)});
            }
            return Task{id, setting,
                        AmbiguousPOMDP(std::move(pairs), std::move(reward), std::move(initial), horizon, discount,
                                       j.at("alpha").get<double>()),
                        std::move(meta)};
        }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed task file: ") + e.what());
    }
    throw ModelError("malformed task file");
}

void write_task_file(const std::filesystem::path& path, const Task& task)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    out << task_to_json(task).dump() << '\n';
}

Task read_task_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    try {
        return task_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ModelError(path.string() + ": " + e.what());
    }
}

} // namespace icdm::envs
