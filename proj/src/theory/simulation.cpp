#include "icdm/theory/simulation.hpp"

#include "icdm/core/config.hpp"
#include "icdm/core/error.hpp"
#include "icdm/core/parallel.hpp"
#include "icdm/core/rng.hpp"
#include "icdm/theory/linear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace icdm::theory {

void E2Config::validate() const
{
    if (dim < 1) throw ConfigError("dim", "must be >= 1");
    if (num_actions < 1) throw ConfigError("num_actions", "must be >= 1");
    if (horizon < 1) throw ConfigError("horizon", "must be >= 1");
    if (!(discount > 0.0 && discount <= 1.0)) throw ConfigError("discount", "must lie in (0, 1]");
    if (tasks_per_config < 1) throw ConfigError("tasks_per_config", "must be >= 1");
    if (!(c_on >= 1.0)) throw ConfigError("c_on", "must be >= 1");
    if (support_lengths.empty() || *std::min_element(support_lengths.begin(), support_lengths.end()) < 1) {
        throw ConfigError("support_lengths", "need at least one M, all >= 1");
    }
    if (train_lengths.empty() || *std::min_element(train_lengths.begin(), train_lengths.end()) < 1) {
        throw ConfigError("train_lengths", "need at least one N, all >= 1");
    }
    if (kappas.empty() || !(*std::min_element(kappas.begin(), kappas.end()) >= 1.0)) {
        throw ConfigError("kappas", "need at least one kappa, all >= 1");
    }
}

nlohmann::json to_json(const E2Config& c)
{
    return {{"dim", c.dim},
            {"num_actions", c.num_actions},
            {"horizon", c.horizon},
            {"discount", c.discount},
            {"support_lengths", c.support_lengths},
            {"train_lengths", c.train_lengths},
            {"kappas", c.kappas},
            {"tasks_per_config", c.tasks_per_config},
            {"c_on", c.c_on},
            {"seed", c.seed}};
}

E2Config e2_config_from_json(const nlohmann::json& j)
{
    ConfigReader r(j, "theory");
    E2Config c;
    r.read("dim", c.dim);
    r.read("num_actions", c.num_actions);
    r.read("horizon", c.horizon);
    r.read("discount", c.discount);
    r.read("support_lengths", c.support_lengths);
    r.read("train_lengths", c.train_lengths);
    r.read("kappas", c.kappas);
    r.read("tasks_per_config", c.tasks_per_config);
    r.read("c_on", c.c_on);
    r.read("seed", c.seed);
    r.read("jobs", c.jobs);
    r.finish();
    c.validate();
    return c;
}

namespace {

struct TaskOutcome {
    // indexed [n][m]
    std::vector<std::vector<double>> gap;
    std::vector<std::vector<double>> eps;
};

TaskOutcome simulate_task(const E2Config& cfg, const FeatureSampler& sampler, const std::vector<LsaPredictor>& preds,
                          const std::vector<int>& sorted_m, Rng rng)
{
    const int d = cfg.dim;
    VectorXd w(d);
    for (int i = 0; i < d; ++i) {
        w[i] = rng.normal();
    }
    std::vector<std::vector<VectorXd>> candidates(static_cast<std::size_t>(cfg.horizon));
    for (auto& step : candidates) {
        for (int a = 0; a < cfg.num_actions; ++a) {
            step.push_back(sampler.sample(rng));
        }
    }
    // prefix moments of the support prompt
    std::vector<VectorXd> moments;
    VectorXd sum = VectorXd::Zero(d);
    int drawn = 0;
    for (const int m : sorted_m) {
        for (; drawn < m; ++drawn) {
            const VectorXd x = sampler.sample(rng);
            sum += w.dot(x) * x;
        }
        moments.push_back(sum / static_cast<double>(m));
    }

    TaskOutcome out;
    for (const auto& pred : preds) {
        std::vector<double> gaps;
        std::vector<double> errs;
        for (const auto& moment : moments) {
            const VectorXd coef = pred.coefficients(moment);
            std::vector<double> regret;
            double sq = 0.0;
            for (const auto& step : candidates) {
                double best_true = -INFINITY;
                double best_hat = -INFINITY;
                double chosen_true = 0.0;
                for (const auto& phi : step) {
                    const double q = w.dot(phi);
                    const double q_hat = coef.dot(phi);
                    sq += (q_hat - q) * (q_hat - q);
                    best_true = std::max(best_true, q);
                    if (q_hat > best_hat) {
                        best_hat = q_hat;
                        chosen_true = q;
                    }
                }
                regret.push_back(best_true - chosen_true);
            }
            gaps.push_back(discounted_sum(regret, cfg.discount, DiscountConvention::from_one));
            errs.push_back(sq / static_cast<double>(cfg.horizon * cfg.num_actions));
        }
        out.gap.push_back(std::move(gaps));
        out.eps.push_back(std::move(errs));
    }
    return out;
}

std::pair<double, double> mean_stderr(const std::vector<double>& xs)
{
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const double x : xs) mean += x;
    mean /= n;
    if (xs.size() < 2) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

} // namespace

std::vector<E2Row> run_e2_simulation(const E2Config& cfg)
{
    cfg.validate();
    std::vector<int> sorted_m = cfg.support_lengths;
    std::sort(sorted_m.begin(), sorted_m.end());
    sorted_m.erase(std::unique(sorted_m.begin(), sorted_m.end()), sorted_m.end());
    const auto m_slot = [&](int m) {
        return static_cast<std::size_t>(std::lower_bound(sorted_m.begin(), sorted_m.end(), m) - sorted_m.begin());
    };

    std::vector<E2Row> rows;
    const double c = horizon_constant(cfg.horizon, cfg.discount);
    for (const double kappa : cfg.kappas) {
        const MatrixXd cov = log_spaced_covariance(cfg.dim, kappa);
        const FeatureSampler sampler(cov);
        std::vector<LsaPredictor> preds;
        for (const int n : cfg.train_lengths) {
            preds.emplace_back(cov, static_cast<double>(n));
        }
        std::vector<TaskOutcome> outcomes(static_cast<std::size_t>(cfg.tasks_per_config));
        parallel_for(outcomes.size(), cfg.jobs, [&](std::size_t i) {
            outcomes[i] = simulate_task(cfg, sampler, preds, sorted_m, Rng::stream(cfg.seed, i));
        });
        for (std::size_t ni = 0; ni < cfg.train_lengths.size(); ++ni) {
            for (const int m : cfg.support_lengths) {
                const auto mi = m_slot(m);
                std::vector<double> gaps;
                std::vector<double> errs;
                for (const auto& o : outcomes) {
                    gaps.push_back(o.gap[ni][mi]);
                    errs.push_back(o.eps[ni][mi]);
                }
                E2Row row;
                row.kappa = kappa;
                row.train_length = cfg.train_lengths[ni];
                row.support_length = m;
                std::tie(row.mean_gap, row.gap_stderr) = mean_stderr(gaps);
                std::tie(row.mean_eps_q, row.eps_stderr) = mean_stderr(errs);
                row.bound = c * std::sqrt(cfg.c_on * row.mean_eps_q);
                row.q_bound = q_error_bound(cfg.dim, cov, m, row.train_length);
                row.violated = !(row.mean_gap <= row.bound);
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_e2_csv(std::ostream& out, const std::vector<E2Row>& rows)
{
    out << "kappa,N,M,mean_gap,gap_stderr,mean_eps_q,bound,violated\n";
    char buf[512];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%d,%d,%.10g,%.10g,%.10g,%.10g,%s\n", r.kappa, r.train_length,
                      r.support_length, r.mean_gap, r.gap_stderr, r.mean_eps_q, r.bound,
                      r.violated ? "true" : "false");
        out << buf;
    }
}

void write_e2_csv(const std::filesystem::path& path, const std::vector<E2Row>& rows)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open " + path.string() + " for writing");
    }
    write_e2_csv(out, rows);
}

} // namespace icdm::theory
