#include "icdm/envs/energy.hpp"

#include "icdm/core/belief.hpp"
#include "icdm/core/config.hpp"
#include "icdm/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace icdm::envs {

void EnergyParams::validate() const
{
    if (energy_cap < 1) {
        throw ConfigError("energy_cap", "must be a positive integer");
    }
    if (!std::isfinite(charge_cost)) {
        throw ConfigError("charge_cost", "must be finite");
    }
    if (!(success_prob >= 0.0 && success_prob <= 1.0)) {
        throw ConfigError("success_prob", "must lie in [0, 1]");
    }
    if (!(obs_prob > 0.0 && obs_prob <= 1.0)) {
        throw ConfigError("obs_prob", "must lie in (0, 1]");
    }
    if (horizon < 1) {
        throw ConfigError("horizon", "must be a positive integer");
    }
    if (!(discount > 0.0 && discount <= 1.0)) {
        throw ConfigError("discount", "must lie in (0, 1]");
    }
    if (initial_dist && initial_dist->size() != static_cast<std::size_t>(energy_cap + 1)) {
        throw ConfigError("initial_dist", "must have energy_cap + 1 entries");
    }
}

EnergyParams EnergyTaskDistribution::sample(Rng& rng) const
{
    EnergyParams out = base;
    out.success_prob = rng.uniform(p_lo, p_hi);
    return out;
}

TabularMDP gen_energy_mdp(const EnergyParams& params)
{
    params.validate();
    const auto levels = static_cast<std::size_t>(params.energy_cap + 1);
    const double p = params.success_prob;
    const double cap = params.energy_cap;
    std::vector<double> transition(levels * 3 * levels, 0.0);
    std::vector<double> reward(levels * 3, 0.0);
    auto at = [&](std::size_t s, std::size_t a, std::size_t t) -> double& {
        return transition[(s * 3 + a) * levels + t];
    };
    for (std::size_t s = 0; s < levels; ++s) {
        const std::size_t up = std::min(levels - 1, s + 1);
        const std::size_t down = s == 0 ? 0 : s - 1;
        for (int a : {charge, charge_alt}) {
            at(s, a, up) += p;
            at(s, a, s) += 1.0 - p;
            reward[s * 3 + a] = params.charge_cost;
        }
        at(s, work, down) += p;
        at(s, work, s) += 1.0 - p;
        reward[s * 3 + work] = static_cast<double>(s) / cap;
    }
    std::vector<double> initial = params.initial_dist.value_or(std::vector<double>(levels, 1.0 / static_cast<double>(levels)));
    return TabularMDP(Kernel(levels, 3, levels, std::move(transition)), RewardTable(levels, 3, std::move(reward)),
                      std::move(initial), params.horizon, params.discount);
}

TabularPOMDP gen_energy_pomdp(const EnergyParams& params)
{
    auto mdp = gen_energy_mdp(params);
    const auto levels = mdp.num_states();
    const double q = params.obs_prob;
    const double off = (1.0 - q) / static_cast<double>(params.energy_cap);
    std::vector<double> obs(levels * 3 * levels, 0.0);
    for (std::size_t s = 0; s < levels; ++s) {
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t o = 0; o < levels; ++o) {
                obs[(s * 3 + a) * levels + o] = o == s ? q : off;
            }
        }
    }
    return TabularPOMDP(std::move(mdp), Kernel(levels, 3, levels, std::move(obs)));
}

void AmbiguityConfig::validate() const
{
    if (num_models < 1) {
        throw ConfigError("num_models", "must be at least 1");
    }
    if (!(kl_radius >= 0.0)) {
        throw ConfigError("kl_radius", "must be non-negative");
    }
    if (!(dirichlet_concentration > 0.0)) {
        throw ConfigError("dirichlet_concentration", "must be positive");
    }
    if (max_attempts < 1) {
        throw ConfigError("max_attempts", "must be positive");
    }
}

std::vector<double> perturb_row(std::span<const double> base, const AmbiguityConfig& cfg, Rng& rng)
{
    std::vector<double> alpha(base.size());
    std::size_t support = 0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        alpha[i] = cfg.dirichlet_concentration * base[i];
        support += base[i] > 0.0 ? 1 : 0;
    }
    if (support == 1) {
        // a point mass is its own only perturbation
        return {base.begin(), base.end()};
    }
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        auto candidate = rng.dirichlet(alpha);
        try {
            if (kl_divergence(base, candidate) <= cfg.kl_radius) {
                return candidate;
            }
        } catch (const Unsupported&) {
            // a component underflowed to zero; reject
        }
    }
    throw SamplingExhausted("no Dirichlet candidate within the KL radius after " +
                            std::to_string(cfg.max_attempts) + " attempts");
}

AmbiguousPOMDP gen_energy_apomdp(const EnergyParams& params, const AmbiguityConfig& cfg, double alpha, Rng& rng)
{
    cfg.validate();
    const auto base = gen_energy_pomdp(params);
    const auto& mdp = base.mdp();
    const auto levels = mdp.num_states();
    std::vector<KernelPair> models{{mdp.transition(), base.observation()}};
    for (int m = 1; m < cfg.num_models; ++m) {
        std::vector<double> transition(mdp.transition().data());
        std::vector<double> obs(base.observation().data());
        for (std::size_t s = 0; s < levels; ++s) {
            if (cfg.perturb_transitions) {
                for (int a : {charge, work}) {
                    auto row = perturb_row(mdp.transition().row(s, a), cfg, rng);
                    std::copy(row.begin(), row.end(), transition.begin() + static_cast<std::ptrdiff_t>((s * 3 + a) * levels));
                    if (a == charge) {
                        std::copy(row.begin(), row.end(),
                                  transition.begin() + static_cast<std::ptrdiff_t>((s * 3 + charge_alt) * levels));
                    }
                }
            }
            if (cfg.perturb_emissions) {
                auto row = perturb_row(base.observation().row(s, 0), cfg, rng);
                for (std::size_t a = 0; a < 3; ++a) {
                    std::copy(row.begin(), row.end(), obs.begin() + static_cast<std::ptrdiff_t>((s * 3 + a) * levels));
                }
            }
        }
        models.push_back({Kernel(levels, 3, levels, std::move(transition)), Kernel(levels, 3, levels, std::move(obs))});
    }
    return AmbiguousPOMDP(std::move(models), mdp.reward(), mdp.initial_dist(), mdp.horizon(), mdp.discount(), alpha);
}

Task make_energy_task(Setting setting, const EnergyParams& params, const AmbiguityConfig& cfg, double alpha,
                      Rng& rng, std::string id, std::uint64_t seed)
{
    nlohmann::json meta{{"params", to_json(params)}, {"seed", seed}};
    switch (setting) {
    case Setting::mdp:
        return Task{std::move(id), setting, gen_energy_mdp(params), std::move(meta)};
    case Setting::pomdp:
        return Task{std::move(id), setting, gen_energy_pomdp(params), std::move(meta)};
    case Setting::apomdp:
        meta["ambiguity"] = to_json(cfg);
        meta["alpha"] = alpha;
        return Task{std::move(id), setting, gen_energy_apomdp(params, cfg, alpha, rng), std::move(meta)};
    case Setting::darkroom:
        break;
    }
    throw ConfigError("setting", "darkroom is not an energy setting");
}

std::vector<Task> generate_energy_tasks(Setting setting, const EnergyTaskDistribution& dist,
                                        const AmbiguityConfig& cfg, double alpha, std::size_t count,
                                        std::uint64_t seed, const std::string& prefix)
{
    if (!(dist.p_lo >= 0.0 && dist.p_lo <= dist.p_hi && dist.p_hi <= 1.0)) {
        throw ConfigError("p_range", "need 0 <= p_lo <= p_hi <= 1");
    }
    std::vector<Task> tasks;
    tasks.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, i);
        const EnergyParams params = dist.sample(rng);
        char id[64];
        std::snprintf(id, sizeof id, "%s-%04zu", prefix.c_str(), i);
        auto task = make_energy_task(setting, params, cfg, alpha, rng, id, seed);
        task.metadata["index"] = i;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

nlohmann::json to_json(const EnergyParams& params)
{
    nlohmann::json j{{"energy_cap", params.energy_cap},     {"charge_cost", params.charge_cost},
                     {"success_prob", params.success_prob}, {"obs_prob", params.obs_prob},
                     {"horizon", params.horizon},           {"discount", params.discount}};
    if (params.initial_dist) {
        j["initial_dist"] = *params.initial_dist;
    }
    return j;
}

EnergyParams energy_params_from_json(const nlohmann::json& j)
{
    ConfigReader r(j, "env");
    EnergyParams p;
    r.read("energy_cap", p.energy_cap);
    r.read("charge_cost", p.charge_cost);
    r.read("success_prob", p.success_prob);
    r.read("obs_prob", p.obs_prob);
    r.read("horizon", p.horizon);
    r.read("discount", p.discount);
    if (r.has("initial_dist")) {
        std::vector<double> dist;
        r.read("initial_dist", dist);
        p.initial_dist = std::move(dist);
    } else {
        r.child("initial_dist");
    }
    r.finish();
    p.validate();
    return p;
}

nlohmann::json to_json(const AmbiguityConfig& cfg)
{
    return {{"num_models", cfg.num_models},
            {"kl_radius", cfg.kl_radius},
            {"dirichlet_concentration", cfg.dirichlet_concentration},
            {"max_attempts", cfg.max_attempts},
            {"perturb_transitions", cfg.perturb_transitions},
            {"perturb_emissions", cfg.perturb_emissions}};
}

AmbiguityConfig ambiguity_config_from_json(const nlohmann::json& j)
{
    ConfigReader r(j, "ambiguity");
    AmbiguityConfig c;
    r.read("num_models", c.num_models);
    r.read("kl_radius", c.kl_radius);
    r.read("dirichlet_concentration", c.dirichlet_concentration);
    r.read("max_attempts", c.max_attempts);
    r.read("perturb_transitions", c.perturb_transitions);
    r.read("perturb_emissions", c.perturb_emissions);
    r.finish();
    c.validate();
    return c;
}

} // namespace icdm::envs
