#pragma once

#include "icdm/core/model.hpp"
#include "icdm/core/rng.hpp"
#include "icdm/core/task.hpp"

#include <optional>
#include <string>
#include <vector>

namespace icdm::envs {

/// Action indices of the energy-management task. Charge and charge_alt are
/// the same physical control.
enum EnergyAction : int { charge = 0, work = 1, charge_alt = 2 };

struct EnergyParams {
    int energy_cap = 9;          // E; states are 0..E
    double charge_cost = -0.02;  // c
    double success_prob = 0.75;  // p
    double obs_prob = 1.0;       // q
    int horizon = 10;
    double discount = 0.95;
    /// Initial-state distribution; uniform over 0..E when empty.
    std::optional<std::vector<double>> initial_dist;

    void validate() const;
};

/// Draws success probabilities uniformly from [p_lo, p_hi); every other field
/// is copied from `base`.
struct EnergyTaskDistribution {
    EnergyParams base;
    double p_lo = 0.5;
    double p_hi = 1.0;

    EnergyParams sample(Rng& rng) const;
};

TabularMDP gen_energy_mdp(const EnergyParams& params);

/// Observation kernel: the true level with probability q, the remaining mass
/// spread evenly over the other E symbols, independent of the action.
TabularPOMDP gen_energy_pomdp(const EnergyParams& params);

struct AmbiguityConfig {
    int num_models = 1;
    double kl_radius = 0.2;
    double dirichlet_concentration = 100.0;
    int max_attempts = 10000;
    bool perturb_transitions = true;
    bool perturb_emissions = true;

    void validate() const;
};

/// Perturbs one probability row: draws Dirichlet(concentration * base) over
/// the support of `base` until KL(base || candidate) <= kl_radius.
/// Throws SamplingExhausted after max_attempts rejections.
std::vector<double> perturb_row(std::span<const double> base, const AmbiguityConfig& cfg, Rng& rng);

/// Energy APOMDP: model 0 is gen_energy_pomdp(params); every further model
/// perturbs each base row independently. The two charge actions share one
/// perturbed row, and the emission row of a state is shared across actions,
/// so every model stays a valid energy task.
AmbiguousPOMDP gen_energy_apomdp(const EnergyParams& params, const AmbiguityConfig& cfg, double alpha, Rng& rng);

/// Builds a Task of the given setting with its generation metadata.
Task make_energy_task(Setting setting, const EnergyParams& params, const AmbiguityConfig& cfg, double alpha,
                      Rng& rng, std::string id, std::uint64_t seed);

/// `count` tasks; task i draws its parameters and ambiguity set from
/// Rng::stream(seed, i) and is named "<prefix>-<i>" with i zero-padded to 4.
std::vector<Task> generate_energy_tasks(Setting setting, const EnergyTaskDistribution& dist,
                                        const AmbiguityConfig& cfg, double alpha, std::size_t count,
                                        std::uint64_t seed, const std::string& prefix = "task");

nlohmann::json to_json(const EnergyParams& params);
EnergyParams energy_params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AmbiguityConfig& cfg);
AmbiguityConfig ambiguity_config_from_json(const nlohmann::json& j);

} // namespace icdm::envs
