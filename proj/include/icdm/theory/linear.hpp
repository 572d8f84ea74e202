#pragma once

#include "icdm/core/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace icdm::theory {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Linear task: Q*(x) = <w*, x>, features x ~ N(0, Λ).
struct LinearTask {
    int dim = 0;
    VectorXd weight;
    MatrixXd feature_cov;
    int num_actions = 5;
    int horizon = 10;
    double discount = 0.95;
};

/// Draws x = L z with L the Cholesky factor of Λ and z standard normal.
class FeatureSampler {
public:
    explicit FeatureSampler(const MatrixXd& cov);
    VectorXd sample(Rng& rng) const;
    int dim() const { return static_cast<int>(chol_.rows()); }

private:
    MatrixXd chol_;
};

/// Diagonal covariance whose eigenvalues are log-spaced from 1/kappa to 1.
MatrixXd log_spaced_covariance(int dim, double kappa);

/// Ratio of extreme eigenvalues of a symmetric positive-definite matrix.
/// Throws ModelError if the matrix is not symmetric positive definite.
double condition_number(const MatrixXd& spd);

/// Task with w* ~ N(0, I_d).
LinearTask sample_linear_task(const MatrixXd& cov, Rng& rng, int num_actions = 5, int horizon = 10,
                              double discount = 0.95);

/// M noiseless pairs (x_i, <w*, x_i>) and a query x_q, all x ~ N(0, Λ).
struct Prompt {
    std::vector<VectorXd> xs;
    std::vector<double> ys;
    VectorXd query;
    /// <w*, x_q>, the noiseless label of the query.
    double query_target = 0.0;

    int size() const { return static_cast<int>(xs.size()); }
};

Prompt sample_prompt(const LinearTask& task, int m, Rng& rng);

/// (1/M) sum_i y_i x_i.
VectorXd prompt_moment(const Prompt& prompt);

/// Closed-form trained-LSA predictor x_q^T Γ^{-1} moment with
/// Γ = (1 + 1/N) Λ + (tr Λ / N) I. Γ is Cholesky-factored once.
class LsaPredictor {
public:
    /// Throws IllConditioned if cond(Γ) > kMaxCondition.
    LsaPredictor(const MatrixXd& cov, double train_length);

    static constexpr double kMaxCondition = 1e12;

    const MatrixXd& gamma_matrix() const { return gamma_; }
    double train_length() const { return train_length_; }
    double condition() const { return condition_; }

    /// Γ^{-1} moment.
    VectorXd coefficients(const VectorXd& moment) const;
    double predict(const VectorXd& query, const VectorXd& moment) const;

private:
    MatrixXd gamma_;
    Eigen::LLT<MatrixXd> llt_;
    double train_length_;
    double condition_;
};

double lsa_predict(const LsaPredictor& predictor, const Prompt& prompt);

/// (d+1) tr Λ / M + (1 + 2d + d^2 κ) tr Λ / N^2.
double q_error_bound(int dim, const MatrixXd& cov, double m, double n);

/// C_{T,γ} = 2(1 - γ^T)/(1 - γ); 2T when γ = 1.
double horizon_constant(int horizon, double discount);

/// C_{T,γ} sqrt(C_on eps_q).
double gap_bound(int horizon, double discount, double c_on, double eps_q);

/// Exponent convention for per-step regrets indexed t = 1..T.
enum class DiscountConvention {
    from_zero,  // γ^(t-1), the return convention
    from_one,   // γ^t, the bound-validation convention
};

double discounted_sum(const std::vector<double>& per_step, double discount, DiscountConvention convention);

struct SampleComplexity {
    std::int64_t k_test_min = 0;
    std::int64_t k_min = 0;
};

/// Smallest support count K_test and training count K for an eps-optimal
/// policy: K_test >= 8 C_on T (d+1) tr Λ / eps^2 and
/// K >= sqrt(8 C_on (1 + 2d + d^2 κ) tr Λ) / eps.
SampleComplexity sample_complexity(double eps, int horizon, int dim, const MatrixXd& cov, double c_on);

} // namespace icdm::theory
