#include "icdm/core/error.hpp"
#include "icdm/theory/linear.hpp"
#include "icdm/theory/lsa.hpp"
#include "icdm/theory/simulation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace icdm;
using namespace icdm::theory;

TEST(Features, IdentityCovarianceIsRecovered)
{
    FeatureSampler sampler(MatrixXd::Identity(2, 2));
    Rng rng(1);
    const int n = 100000;
    MatrixXd acc = MatrixXd::Zero(2, 2);
    for (int i = 0; i < n; ++i) {
        const VectorXd x = sampler.sample(rng);
        acc += x * x.transpose();
    }
    acc /= n;
    EXPECT_LT((acc - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Features, ScalarVariance)
{
    FeatureSampler sampler(MatrixXd::Constant(1, 1, 4.0));
    Rng rng(2);
    const int n = 100000;
    double sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sampler.sample(rng)(0);
        sq += x * x;
    }
    // var of x^2 is 2 sigma^4 = 32
    EXPECT_NEAR(sq / n, 4.0, 3.0 * std::sqrt(32.0 / n));
}

TEST(Features, ZeroWeightGivesZeroLabels)
{
    LinearTask task;
    task.dim = 3;
    task.weight = VectorXd::Zero(3);
    task.feature_cov = MatrixXd::Identity(3, 3);
    Rng rng(3);
    const auto prompt = sample_prompt(task, 20, rng);
    for (double y : prompt.ys) {
        EXPECT_EQ(y, 0.0);
    }
}

TEST(Features, LogSpacedCovariance)
{
    const auto cov = log_spaced_covariance(10, 25.0);
    EXPECT_NEAR(cov(0, 0), 1.0 / 25.0, 1e-15);
    EXPECT_NEAR(cov(9, 9), 1.0, 1e-15);
    EXPECT_NEAR(condition_number(cov), 25.0, 1e-9);
    EXPECT_EQ(condition_number(log_spaced_covariance(4, 1.0)), 1.0);
    EXPECT_THROW(condition_number(-MatrixXd::Identity(2, 2)), ModelError);
}

TEST(Shrinkage, LargeSupportLimit)
{
    // d=1, Λ=(σ²): Γ = (1 + 2/N) σ², so the prediction tends to x_q w / (1 + 2/N)
    const double var = 2.0;
    const double n = 100.0;
    LsaPredictor predictor(MatrixXd::Constant(1, 1, var), n);
    LinearTask task;
    task.dim = 1;
    task.weight = VectorXd::Constant(1, 1.3);
    task.feature_cov = MatrixXd::Constant(1, 1, var);
    Rng rng(4);
    const auto prompt = sample_prompt(task, 1000000, rng);
    const double expected = prompt.query(0) * 1.3 / (1.0 + 2.0 / n);
    EXPECT_NEAR(lsa_predict(predictor, prompt), expected, 0.01 * std::abs(expected));
}

TEST(Shrinkage, ZeroMomentAndInfiniteTraining)
{
    const auto cov = log_spaced_covariance(3, 5.0);
    LsaPredictor predictor(cov, 1e12);
    const VectorXd q = VectorXd::Constant(3, 0.7);
    EXPECT_EQ(predictor.predict(q, VectorXd::Zero(3)), 0.0);
    const VectorXd m(VectorXd::LinSpaced(3, -1.0, 2.0));
    const double limit = q.dot(cov.inverse() * m);
    EXPECT_NEAR(predictor.predict(q, m), limit, 1e-6 * std::abs(limit));
}

TEST(Shrinkage, IllConditionedGammaIsRejected)
{
    MatrixXd cov = MatrixXd::Identity(2, 2);
    cov(0, 0) = 1e-15;
    EXPECT_THROW(LsaPredictor(cov, 1e20), IllConditioned);
}

TEST(Bounds, QErrorBoundSubstitution)
{
    const MatrixXd one = MatrixXd::Identity(1, 1);
    for (double m : {1.0, 10.0, 250.0}) {
        EXPECT_NEAR(q_error_bound(1, one, m, m), 2.0 / m + 4.0 / (m * m), 1e-15);
    }
    EXPECT_LT(q_error_bound(10, MatrixXd::Identity(10, 10), 1e12, 1e12), 1e-9);
}

TEST(Bounds, HorizonConstant)
{
    EXPECT_EQ(horizon_constant(10, 1.0), 20.0);
    double series = 0.0;
    for (int t = 1; t <= 10; ++t) {
        series += 2.0 * std::pow(0.95, t - 1);
    }
    EXPECT_NEAR(horizon_constant(10, 0.95), series, 1e-12);
    EXPECT_EQ(gap_bound(10, 0.95, 1.0, 0.0), 0.0);
}

TEST(Bounds, DiscountConventions)
{
    const std::vector<double> r{1.0, 1.0, 1.0};
    EXPECT_NEAR(discounted_sum(r, 0.5, DiscountConvention::from_zero), 1.75, 1e-15);
    EXPECT_NEAR(discounted_sum(r, 0.5, DiscountConvention::from_one), 0.875, 1e-15);
}

TEST(Bounds, SampleComplexity)
{
    const MatrixXd cov = MatrixXd::Identity(10, 10);
    const auto k1 = sample_complexity(1.0, 10, 10, cov, 1.0);
    EXPECT_EQ(k1.k_test_min, 8800);
    const auto k2 = sample_complexity(2.0, 10, 10, cov, 1.0);
    EXPECT_EQ(k2.k_test_min, 2200);
    EXPECT_LE(std::abs(2 * k2.k_min - k1.k_min), 1);
    for (double eps : {0.3, 1.0, 2.5}) {
        const auto k = sample_complexity(eps, 10, 10, cov, 1.0);
        const double bound = gap_bound(10, 1.0, 1.0,
                                       q_error_bound(10, cov, static_cast<double>(k.k_test_min) * 10,
                                                     static_cast<double>(k.k_min) * 10));
        EXPECT_LE(bound, eps * (1.0 + 1e-9)) << eps;
    }
}

TEST(Bounds, EmpiricalErrorBelowBound)
{
    // d=10, Λ=I, M=100, N=1000, 500 tasks
    const MatrixXd cov = MatrixXd::Identity(10, 10);
    LsaPredictor predictor(cov, 1000.0);
    Rng rng(77);
    std::vector<double> errs;
    for (int i = 0; i < 500; ++i) {
        const auto task = sample_linear_task(cov, rng);
        const auto prompt = sample_prompt(task, 100, rng);
        const double e = lsa_predict(predictor, prompt) - prompt.query_target;
        errs.push_back(e * e);
    }
    double mean = 0.0;
    for (double e : errs) {
        mean += e / 500.0;
    }
    double var = 0.0;
    for (double e : errs) {
        var += (e - mean) * (e - mean) / 499.0;
    }
    EXPECT_LE(mean, q_error_bound(10, cov, 100, 1000) + 2.0 * std::sqrt(var / 500.0));
}

TEST(Lsa, ZeroLayerPredictsZero)
{
    const auto layer = LsaLayer::zeros(3);
    LinearTaskSampler sampler{MatrixXd::Identity(3, 3)};
    Rng rng(1);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(layer.predict(sampler.sample(15, rng)), 0.0);
    }
    LsaTrainConfig cfg;
    cfg.steps = 0;
    const auto result = train_lsa(layer, sampler, cfg, rng);
    EXPECT_EQ(result.layer.predict(sampler.sample(15, rng)), 0.0);
}

TEST(Lsa, LayerImplementsShrinkagePredictor)
{
    // W_KQ = [Γ^{-1} 0; 0 0], W_PV bottom row e_{d+1}: f(E) reads out x_q^T Γ^{-1} (1/M) Σ y_i x_i
    const MatrixXd cov = MatrixXd::Identity(2, 2);
    LsaPredictor predictor(cov, 20.0);
    LsaLayer layer = LsaLayer::zeros(2);
    layer.w_kq.topLeftCorner(2, 2) = predictor.gamma_matrix().inverse();
    layer.w_pv(2, 2) = 1.0;
    LinearTaskSampler sampler{cov};
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const auto prompt = sampler.sample(50, rng);
        EXPECT_NEAR(layer.predict(prompt), lsa_predict(predictor, prompt), 1e-12);
    }
}

TEST(Lsa, TrainedLayerMatchesClosedForm)
{
    const MatrixXd cov = MatrixXd::Identity(2, 2);
    LinearTaskSampler sampler{cov};
    Rng rng(7);
    LsaTrainConfig cfg;
    const auto result = train_lsa(LsaLayer::gaussian(2, 1e-3, rng), sampler, cfg, rng);
    for (std::size_t k = 1; k < result.validation_loss.size(); ++k) {
        EXPECT_LE(result.validation_loss[k], result.validation_loss[k - 1]);
    }
    LsaPredictor predictor(cov, cfg.prompt_length);
    double diff = 0.0;
    double ref = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto prompt = sampler.sample(50, rng);
        const double a = result.layer.predict(prompt);
        const double b = lsa_predict(predictor, prompt);
        diff += (a - b) * (a - b);
        ref += b * b;
    }
    EXPECT_LT(std::sqrt(diff / ref), 0.05);
}

TEST(Simulation, SmallGridIsStructurallyValid)
{
    E2Config cfg;
    cfg.tasks_per_config = 4;
    cfg.seed = 3;
    const auto rows = run_e2_simulation(cfg);
    ASSERT_EQ(rows.size(), 63u);
    EXPECT_EQ(rows[0].kappa, 1.0);
    EXPECT_EQ(rows[0].train_length, 100);
    EXPECT_EQ(rows[0].support_length, 10);
    EXPECT_EQ(rows[62].kappa, 25.0);
    EXPECT_EQ(rows[62].support_length, 1000);
    std::ostringstream out;
    write_e2_csv(out, rows);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "kappa,N,M,mean_gap,gap_stderr,mean_eps_q,bound,violated");
    int count = 0;
    while (std::getline(in, line)) {
        ++count;
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7);
        EXPECT_TRUE(line.ends_with(",true") || line.ends_with(",false"));
    }
    EXPECT_EQ(count, 63);
}

TEST(Simulation, IndependentOfJobCount)
{
    E2Config cfg;
    cfg.tasks_per_config = 20;
    cfg.support_lengths = {10, 100};
    cfg.train_lengths = {100};
    cfg.kappas = {5.0};
    cfg.seed = 9;
    std::ostringstream a;
    write_e2_csv(a, run_e2_simulation(cfg));
    cfg.jobs = 3;
    std::ostringstream b;
    write_e2_csv(b, run_e2_simulation(cfg));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Simulation, ErrorMatchesExactExpectationForIdentityCovariance)
{
    // For Λ=I and c = 1/(1 + (d+1)/N) the shrinkage error has expectation
    // d [(1-c)^2 + c^2 (d+1)/M]. Checked cell by cell on the κ=1 panel.
    E2Config cfg;
    cfg.kappas = {1.0};
    cfg.seed = 20240601;
    const auto rows = run_e2_simulation(cfg);
    const double d = cfg.dim;
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double c = 1.0 / (1.0 + (d + 1.0) / r.train_length);
        const double expected = d * ((1 - c) * (1 - c) + c * c * (d + 1.0) / r.support_length);
        EXPECT_NEAR(r.mean_eps_q, expected, 3.0 * r.eps_stderr) << "N=" << r.train_length << " M=" << r.support_length;
        EXPECT_LE(r.mean_gap, r.bound);
        if (r.mean_eps_q < rows[argmin].mean_eps_q) {
            argmin = i;
        }
    }
    EXPECT_EQ(rows[argmin].support_length, 1000);
}

TEST(Simulation, ConfigJson)
{
    E2Config cfg;
    cfg.kappas = {2.0};
    const auto back = e2_config_from_json(to_json(cfg));
    EXPECT_EQ(back.kappas, cfg.kappas);
    EXPECT_EQ(back.support_lengths, cfg.support_lengths);
    EXPECT_THROW(e2_config_from_json({{"dims", 3}}), ConfigError);
    EXPECT_THROW(e2_config_from_json({{"tasks_per_config", 0}}), ConfigError);
}
