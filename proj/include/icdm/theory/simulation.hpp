#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <ostream>
#include <vector>

namespace icdm::theory {

/// Grid for the gap-versus-error sweep. Defaults are the reference grid.
struct E2Config {
    int dim = 10;
    int num_actions = 5;
    int horizon = 10;
    double discount = 0.95;
    std::vector<int> support_lengths{10, 20, 50, 100, 200, 500, 1000};  // M
    std::vector<int> train_lengths{100, 1000, 10000};                   // N
    std::vector<double> kappas{1.0, 5.0, 25.0};
    int tasks_per_config = 500;
    double c_on = 1.0;
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate() const;
};

nlohmann::json to_json(const E2Config& config);
/// Missing fields keep their defaults; unknown fields raise ConfigError.
E2Config e2_config_from_json(const nlohmann::json& j);

struct E2Row {
    double kappa = 1.0;
    int train_length = 0;    // N
    int support_length = 0;  // M
    double mean_gap = 0.0;
    double gap_stderr = 0.0;
    double mean_eps_q = 0.0;
    double eps_stderr = 0.0;
    /// C_{T,γ} sqrt(C_on mean_eps_q).
    double bound = 0.0;
    /// Analytic q_error_bound for the same (d, Λ, M, N).
    double q_bound = 0.0;
    bool violated = false;
};

/// One row per (kappa, N, M), ordered kappa-major, then N, then M.
///
/// Each task draws w* ~ N(0, I), then T steps of |A| candidate features and
/// the longest support prompt. A task's draws come from Rng::stream(seed, i)
/// whatever the configuration, so configurations share tasks and shorter
/// supports are prefixes of longer ones. Per task, the gap is
/// sum_{t=1..T} γ^t [max_a Q* − Q*(argmax_a Q̂)] and ε̂_Q is the mean of
/// (Q̂ − Q*)² over the T |A| candidates. A row is violated when the mean gap
/// exceeds C_{T,γ} sqrt(C_on mean ε̂_Q).
std::vector<E2Row> run_e2_simulation(const E2Config& config);

/// Header "kappa,N,M,mean_gap,gap_stderr,mean_eps_q,bound,violated" and one
/// line per row; reals use %.10g, violated is true/false.
void write_e2_csv(std::ostream& out, const std::vector<E2Row>& rows);
void write_e2_csv(const std::filesystem::path& path, const std::vector<E2Row>& rows);

} // namespace icdm::theory
