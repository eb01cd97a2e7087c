#pragma once

#include <cstdint>
#include <vector>

#include "hed/hypergraph.hpp"

namespace hed {

class Rng;

struct ModelParams {
    DenseMatrix e_u;  // n_users x dim
    DenseMatrix e_i;  // n_items x dim
    DenseMatrix e_b;  // n_bundles x dim
    std::vector<double> w;  // boundary vector, length dim
    Index dim = 0;
    Index n_layers = 2;
    double alpha = 0.5;
    double beta = 0.01;
};

// Embeddings ~ N(0, 0.01^2) from the "init" sub-stream of `seed`; w starts at
// zero (the boundary begins neutral).
ModelParams init_embeddings(Index n_users, Index n_items, Index n_bundles, Index dim,
                            std::uint64_t seed);

// Level-1 table: user rows, then item rows, then bundle rows.
DenseMatrix stack_embeddings(const ModelParams& params);

// How stacked depth maps to propagation passes and combined terms.
//   literal: n_layers terms, n_layers - 1 passes (depth counts tables).
//   depth_l: n_layers + 1 terms, n_layers passes (depth counts passes).
enum class LayerScheme { literal, depth_l };

Index pass_count(LayerScheme scheme, Index n_layers);
Index term_count(LayerScheme scheme, Index n_layers);

// Operators actually used by one propagation pass (dropout variants when
// training). ub_* are empty when the pass ran without the user-bundle chain.
struct PassOperators {
    NormalizedOperator hyper;
    NormalizedOperator ub_user;
    NormalizedOperator ub_bundle;
    bool ub_active = false;
};

struct LayerTrace {
    std::vector<DenseMatrix> e;       // e[l] is the level-(l+1) table
    std::vector<PassOperators> ops;   // ops[j] produced e[j+1] from e[j]
    BlockRanges ranges;
    double alpha = 0.5;
    double beta = 0.01;
};

struct ForwardSettings {
    LayerScheme scheme = LayerScheme::literal;
    bool train_mode = false;
    double hypergraph_dropout = 0.0;
    double ub_dropout = 0.0;
    bool disable_ub = false;  // drop the user-bundle chain entirely
};

// One pass: e_bar = hyper(e); user and bundle blocks are then blended with
// their user-bundle-chain refinements (alpha * e_bar + beta * refinement),
// items pass through e_bar unchanged. The user-bundle chain is skipped —
// computing nothing and consuming no randomness — when disabled or beta == 0.
struct PassResult {
    DenseMatrix e_next;
    PassOperators used;
};
PassResult dual_conv_pass(const DenseMatrix& e, const PropagationOperators& base, double alpha,
                          double beta, const ForwardSettings& settings, Rng* dropout_rng);

// Runs pass_count passes from the stacked level-1 table. dropout_rng is
// required only when train_mode is set with a nonzero dropout rate.
LayerTrace forward(const ModelParams& params, const PropagationOperators& base,
                   const ForwardSettings& settings, Rng* dropout_rng = nullptr);

struct FinalEmbeddings {
    DenseMatrix users;
    DenseMatrix bundles;
};

// Weighted sum of the first n_terms levels with coefficients 1/(l+1) for
// level l (l = 1-based), keeping only the user and bundle blocks.
FinalEmbeddings combine_layers(const LayerTrace& trace, Index n_terms);
FinalEmbeddings combine_all_layers(const LayerTrace& trace);

double score(const FinalEmbeddings& finals, Index user, Index bundle);
DenseMatrix score_all(const FinalEmbeddings& finals);  // users x bundles

// Per-user acceptance boundary: b_u = w . e_u.
std::vector<double> boundary(const DenseMatrix& final_users, std::span<const double> w);

}  // namespace hed
