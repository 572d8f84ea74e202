#include "icdm/theory/lsa.hpp"

#include "icdm/core/error.hpp"

#include <cmath>

namespace icdm::theory {

namespace {

/// E E^T for the prompt's embedding, with the query column (x_q, 0).
MatrixXd embedding_gram(const Prompt& prompt)
{
    const auto d = prompt.query.size();
    MatrixXd gram = MatrixXd::Zero(d + 1, d + 1);
    VectorXd z(d + 1);
    for (std::size_t i = 0; i < prompt.xs.size(); ++i) {
        z.head(d) = prompt.xs[i];
        z[d] = prompt.ys[i];
        gram.selfadjointView<Eigen::Lower>().rankUpdate(z);
    }
    z.head(d) = prompt.query;
    z[d] = 0.0;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z);
    return gram.selfadjointView<Eigen::Lower>();
}

VectorXd query_embedding(const Prompt& prompt)
{
    VectorXd e = VectorXd::Zero(prompt.query.size() + 1);
    e.head(prompt.query.size()) = prompt.query;
    return e;
}

struct Gradient {
    MatrixXd w_kq;
    MatrixXd w_pv;
    double loss = 0.0;
};

Gradient batch_gradient(const LsaLayer& layer, const std::vector<Prompt>& batch)
{
    const int d = layer.dim();
    Gradient g{MatrixXd::Zero(d + 1, d + 1), MatrixXd::Zero(d + 1, d + 1), 0.0};
    for (const auto& p : batch) {
        const MatrixXd gram = embedding_gram(p) / static_cast<double>(p.size());
        const VectorXd e_q = query_embedding(p);
        const VectorXd u = layer.w_pv.row(d).transpose();
        const VectorXd kq_e = layer.w_kq * e_q;
        const double residual = u.dot(gram * kq_e) - p.query_target;
        g.loss += 0.5 * residual * residual;
        g.w_kq += residual * (gram * u) * e_q.transpose();
        g.w_pv.row(d) += residual * (gram * kq_e).transpose();
    }
    const double n = static_cast<double>(batch.size());
    g.w_kq /= n;
    g.w_pv /= n;
    g.loss /= n;
    return g;
}

} // namespace

LsaLayer LsaLayer::zeros(int dim)
{
    return {MatrixXd::Zero(dim + 1, dim + 1), MatrixXd::Zero(dim + 1, dim + 1)};
}

LsaLayer LsaLayer::gaussian(int dim, double init_scale, Rng& rng)
{
    LsaLayer layer = zeros(dim);
    for (auto* m : {&layer.w_kq, &layer.w_pv}) {
        for (Eigen::Index i = 0; i < m->size(); ++i) {
            m->data()[i] = init_scale * rng.normal();
        }
    }
    return layer;
}

double LsaLayer::predict(const Prompt& prompt) const
{
    const int d = dim();
    if (prompt.query.size() != d || prompt.xs.empty()) {
        throw ConfigError("prompt", "dimension mismatch or empty prompt");
    }
    const MatrixXd gram = embedding_gram(prompt);
    const double m = static_cast<double>(prompt.size());
    // bottom-right entry of E + W_PV E E^T W_KQ E / M; E's own entry there is 0
    return w_pv.row(d).dot(gram * (w_kq * query_embedding(prompt))) / m;
}

Prompt LinearTaskSampler::sample(int length, Rng& rng) const
{
    const LinearTask task = sample_linear_task(feature_cov, rng);
    return sample_prompt(task, length, rng);
}

double lsa_loss(const LsaLayer& layer, const std::vector<Prompt>& prompts)
{
    if (prompts.empty()) {
        return 0.0;
    }
    double total = 0.0;
    for (const auto& p : prompts) {
        const double r = layer.predict(p) - p.query_target;
        total += 0.5 * r * r;
    }
    return total / static_cast<double>(prompts.size());
}

LsaTrainResult train_lsa(LsaLayer layer, const LinearTaskSampler& sampler, const LsaTrainConfig& config, Rng& rng)
{
    if (config.steps < 0 || config.batch < 1 || config.prompt_length < 1 || config.eval_every < 1 ||
        config.validation_prompts < 1 || !(config.step_size > 0.0)) {
        throw ConfigError("train", "invalid training configuration");
    }
    std::vector<Prompt> validation;
    for (int i = 0; i < config.validation_prompts; ++i) {
        validation.push_back(sampler.sample(config.prompt_length, rng));
    }
    LsaTrainResult result;
    double step = config.step_size;
    double current = lsa_loss(layer, validation);
    const double initial = current;
    const double ceiling = 1e3 * std::max(initial, 1e-300);
    result.validation_loss.push_back(current);

    LsaLayer checkpoint = layer;
    std::vector<Prompt> batch(static_cast<std::size_t>(config.batch));
    for (int s = 1; s <= config.steps; ++s) {
        for (auto& p : batch) {
            p = sampler.sample(config.prompt_length, rng);
        }
        const Gradient g = batch_gradient(layer, batch);
        if (!std::isfinite(g.loss) || g.loss > ceiling) {
            throw Diverged("training loss exceeded 1e3 times its initial value");
        }
        layer.w_kq -= step * g.w_kq;
        layer.w_pv -= step * g.w_pv;
        if (s % config.eval_every == 0 || s == config.steps) {
            const double loss = lsa_loss(layer, validation);
            if (!std::isfinite(loss) || loss > ceiling) {
                throw Diverged("validation loss exceeded 1e3 times its initial value");
            }
            if (loss > current) {
                layer = checkpoint;
                step *= 0.5;
                if (++result.halvings > config.max_halvings) {
                    break;
                }
            } else {
                current = loss;
                checkpoint = layer;
                result.validation_loss.push_back(current);
            }
        }
    }
    result.layer = checkpoint;
    result.final_step_size = step;
    return result;
}

} // namespace icdm::theory
