#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hed/dataset.hpp"
#include "hed/model.hpp"

namespace hed {

class Rng;

struct TrainingPair {
    Index user;
    Index bundle;
};

// negatives holds `negatives_per_positive` sampled pairs per positive (fewer
// when a user has nearly exhausted the catalog), each bound to its user.
struct Batch {
    std::vector<TrainingPair> positives;
    std::vector<TrainingPair> negatives;
};

// Numerically stable log(1 + e^x): max(x,0) + log1p(e^{-|x|}).
double softplus(double x);
double logistic(double x);

// Sum over positives of softplus(boundary - score) plus sum over negatives of
// softplus(score - boundary): positives are pushed above the user's boundary,
// negatives below it.
double uib_loss(std::span<const double> pos_scores, std::span<const double> pos_boundaries,
                std::span<const double> neg_scores, std::span<const double> neg_boundaries);

// Uniform sample of k distinct bundles the user has no train interaction
// with; returns all of them (ascending) when fewer than k exist.
std::vector<Index> sample_negatives(const SparseBinaryMatrix& train, Index user, Index k,
                                    Rng& rng);

struct Gradients {
    DenseMatrix e_u, e_i, e_b;
    std::vector<double> w;
};

// Analytic gradient of the batch loss with respect to the level-1 tables and
// the boundary vector. The propagation is linear, so the backward pass runs
// the recorded operator chains transposed; combine coefficients follow the
// forward combination over all trace levels.
Gradients backward(const Batch& batch, const LayerTrace& trace, const ModelParams& params,
                   const FinalEmbeddings& finals);

struct OptimizerState {
    DenseMatrix m_u, v_u, m_i, v_i, m_b, v_b;
    std::vector<double> m_w, v_w;
    std::uint64_t step = 0;

    static OptimizerState like(const ModelParams& params);
};

struct AdamWSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Decoupled weight decay on the embedding tables only; the boundary vector w
// is never decayed (decay would drag every user's boundary toward 0 rather
// than regularize the geometry).
void adamw_step(ModelParams& params, const Gradients& grads, OptimizerState& state, double lr,
                double weight_decay, const AdamWSettings& settings = {});

struct ModelHyper {
    Index dim = 64;
    Index n_layers = 2;
    double alpha = 0.5;
    double beta = 0.01;
};

struct AblationFlags {
    bool disable_ub_conv = false;
    bool zero_h_uu = false;
    bool zero_h_bb = false;
    bool ii_identity = false;
};

struct TrainConfig {
    double learning_rate = 5e-3;
    double weight_decay = 0.1;
    Index epochs = 300;
    Index batch_size = 1024;
    Index negatives_per_positive = 1;
    double hypergraph_dropout = 0.0;
    double ub_dropout = 0.0;
    LayerScheme layer_scheme = LayerScheme::literal;
    std::uint64_t seed = 0;
    Index eval_every = 10;  // validation cadence in epochs; 0 = final epoch only
};

struct EpochStats {
    Index epoch = 0;
    double loss = 0.0;  // mean loss per positive pair
    bool evaluated = false;
    double recall = 0.0;  // at k = min(20, n_bundles)
    double ndcg = 0.0;
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> history;
};

// Applies the ablations to the graph, builds operators from the train split,
// and runs mini-batch training with per-epoch validation on the test split.
// Throws DivergenceError on non-finite loss or parameters.
TrainResult train(const Split& split, const CompleteHypergraph& graph, const ModelHyper& hyper,
                  const TrainConfig& config, const AblationFlags& flags);

}  // namespace hed
