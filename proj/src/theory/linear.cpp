#include "icdm/theory/linear.hpp"

#include "icdm/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace icdm::theory {

namespace {

void require_spd_shape(const MatrixXd& m, const char* what)
{
    if (m.rows() == 0 || m.rows() != m.cols()) {
        throw ModelError(std::string(what) + " must be a non-empty square matrix");
    }
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) {
        throw ModelError(std::string(what) + " must be symmetric");
    }
}

} // namespace

FeatureSampler::FeatureSampler(const MatrixXd& cov)
{
    require_spd_shape(cov, "feature covariance");
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw ModelError("feature covariance is not positive definite");
    }
    chol_ = llt.matrixL();
}

VectorXd FeatureSampler::sample(Rng& rng) const
{
    VectorXd z(chol_.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = rng.normal();
    }
    return chol_.triangularView<Eigen::Lower>() * z;
}

MatrixXd log_spaced_covariance(int dim, double kappa)
{
    if (dim < 1 || !(kappa >= 1.0)) {
        throw ConfigError("kappa", "need dim >= 1 and kappa >= 1");
    }
    VectorXd eig(dim);
    for (int i = 0; i < dim; ++i) {
        const double frac = dim == 1 ? 1.0 : static_cast<double>(i) / (dim - 1);
        eig[i] = std::pow(kappa, frac - 1.0);
    }
    return eig.asDiagonal();
}

double condition_number(const MatrixXd& spd)
{
    require_spd_shape(spd, "matrix");
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(spd, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) {
        throw ModelError("matrix is not positive definite");
    }
    return hi / lo;
}

LinearTask sample_linear_task(const MatrixXd& cov, Rng& rng, int num_actions, int horizon, double discount)
{
    LinearTask task;
    task.dim = static_cast<int>(cov.rows());
    task.feature_cov = cov;
    task.weight.resize(task.dim);
    for (int i = 0; i < task.dim; ++i) {
        task.weight[i] = rng.normal();
    }
    task.num_actions = num_actions;
    task.horizon = horizon;
    task.discount = discount;
    return task;
}

Prompt sample_prompt(const LinearTask& task, int m, Rng& rng)
{
    if (m < 1) {
        throw ConfigError("m", "prompt length must be at least 1");
    }
    const FeatureSampler sampler(task.feature_cov);
    Prompt p;
    for (int i = 0; i < m; ++i) {
        p.xs.push_back(sampler.sample(rng));
        p.ys.push_back(task.weight.dot(p.xs.back()));
    }
    p.query = sampler.sample(rng);
    p.query_target = task.weight.dot(p.query);
    return p;
}

VectorXd prompt_moment(const Prompt& prompt)
{
    if (prompt.xs.empty()) {
        throw ConfigError("prompt", "empty prompt");
    }
    VectorXd moment = VectorXd::Zero(prompt.xs.front().size());
    for (std::size_t i = 0; i < prompt.xs.size(); ++i) {
        moment += prompt.ys[i] * prompt.xs[i];
    }
    return moment / static_cast<double>(prompt.xs.size());
}

LsaPredictor::LsaPredictor(const MatrixXd& cov, double train_length) : train_length_(train_length)
{
    if (!(train_length > 0.0)) {
        throw ConfigError("N", "training length must be positive");
    }
    require_spd_shape(cov, "feature covariance");
    const auto d = cov.rows();
    gamma_ = (1.0 + 1.0 / train_length) * cov + (cov.trace() / train_length) * MatrixXd::Identity(d, d);
    condition_ = condition_number(gamma_);
    if (condition_ > kMaxCondition) {
        throw IllConditioned("condition number of Gamma exceeds 1e12");
    }
    llt_.compute(gamma_);
    if (llt_.info() != Eigen::Success) {
        throw IllConditioned("Gamma is not numerically positive definite");
    }
}

VectorXd LsaPredictor::coefficients(const VectorXd& moment) const
{
    if (moment.size() != gamma_.rows()) {
        throw ConfigError("moment", "dimension mismatch");
    }
    return llt_.solve(moment);
}

double LsaPredictor::predict(const VectorXd& query, const VectorXd& moment) const
{
    if (query.size() != gamma_.rows()) {
        throw ConfigError("query", "dimension mismatch");
    }
    return query.dot(coefficients(moment));
}

double lsa_predict(const LsaPredictor& predictor, const Prompt& prompt)
{
    return predictor.predict(prompt.query, prompt_moment(prompt));
}

double q_error_bound(int dim, const MatrixXd& cov, double m, double n)
{
    if (!(m >= 1.0) || !(n >= 1.0)) {
        throw ConfigError("M/N", "must be at least 1");
    }
    const double d = dim;
    const double tr = cov.trace();
    const double kappa = condition_number(cov);
    return (d + 1.0) * tr / m + (1.0 + 2.0 * d + d * d * kappa) * tr / (n * n);
}

double horizon_constant(int horizon, double discount)
{
    if (horizon < 0 || !(discount > 0.0 && discount <= 1.0)) {
        throw ConfigError("discount", "need T >= 0 and 0 < gamma <= 1");
    }
    if (discount == 1.0) {
        return 2.0 * horizon;
    }
    return 2.0 * (1.0 - std::pow(discount, horizon)) / (1.0 - discount);
}

double gap_bound(int horizon, double discount, double c_on, double eps_q)
{
    if (!(eps_q >= 0.0) || !(c_on >= 1.0)) {
        throw ConfigError("eps_q/C_on", "need eps_q >= 0 and C_on >= 1");
    }
    return horizon_constant(horizon, discount) * std::sqrt(c_on * eps_q);
}

double discounted_sum(const std::vector<double>& per_step, double discount, DiscountConvention convention)
{
    double weight = convention == DiscountConvention::from_one ? discount : 1.0;
    double total = 0.0;
    for (const double v : per_step) {
        total += weight * v;
        weight *= discount;
    }
    return total;
}

SampleComplexity sample_complexity(double eps, int horizon, int dim, const MatrixXd& cov, double c_on)
{
    if (!(eps > 0.0)) {
        throw ConfigError("eps", "must be positive");
    }
    const double d = dim;
    const double tr = cov.trace();
    const double kappa = condition_number(cov);
    const double k_test = 8.0 * c_on * horizon * (d + 1.0) * tr / (eps * eps);
    const double k = std::sqrt(8.0 * c_on * (1.0 + 2.0 * d + d * d * kappa) * tr) / eps;
    // Guard against ceil() overshooting an exact integer by one ulp.
    const auto ceil_tight = [](double x) {
        const double r = std::round(x);
        return static_cast<std::int64_t>(std::abs(x - r) <= 1e-9 * std::max(1.0, r) ? r : std::ceil(x));
    };
    return {ceil_tight(k_test), ceil_tight(k)};
}

} // namespace icdm::theory
