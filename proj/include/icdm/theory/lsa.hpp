#pragma once

#include "icdm/theory/linear.hpp"

#include <vector>

namespace icdm::theory {

/// Single linear self-attention layer on the embedding
///
///   E = [ x_1 ... x_M  x_q ]
///       [ y_1 ... y_M   0  ]   ((d+1) x (M+1)),
///
/// f(E) = E + W_PV E E^T W_KQ E / M; the prediction is f(E)'s bottom-right entry.
struct LsaLayer {
    MatrixXd w_kq;
    MatrixXd w_pv;

    static LsaLayer zeros(int dim);
    /// Independent N(0, init_scale^2) entries.
    static LsaLayer gaussian(int dim, double init_scale, Rng& rng);

    int dim() const { return static_cast<int>(w_kq.rows()) - 1; }
    double predict(const Prompt& prompt) const;
};

/// Draws training and evaluation problems: w ~ N(0, I_d), x ~ N(0, Λ).
struct LinearTaskSampler {
    MatrixXd feature_cov;

    Prompt sample(int length, Rng& rng) const;
};

struct LsaTrainConfig {
    int steps = 4000;
    double step_size = 0.05;
    int batch = 64;
    /// Training prompt length N.
    int prompt_length = 20;
    /// Steps between validation checks.
    int eval_every = 50;
    int validation_prompts = 2000;
    /// Training stops once the step size has been halved this many times.
    int max_halvings = 12;
};

struct LsaTrainResult {
    LsaLayer layer;
    /// Validation loss after each accepted epoch, starting with the initial loss.
    std::vector<double> validation_loss;
    int halvings = 0;
    double final_step_size = 0.0;
};

/// Mean of ½(prediction − query_target)² over `prompts`.
double lsa_loss(const LsaLayer& layer, const std::vector<Prompt>& prompts);

/// Mini-batch gradient descent on ½(prediction − <w, x_q>)² with fresh
/// prompts every step. After each epoch the loss on a fixed validation set is
/// measured; an increase reverts the epoch and halves the step size, so the
/// recorded validation curve is non-increasing. Throws Diverged if a training
/// batch loss exceeds 1e3 times the initial validation loss.
LsaTrainResult train_lsa(LsaLayer layer, const LinearTaskSampler& sampler, const LsaTrainConfig& config, Rng& rng);

} // namespace icdm::theory
