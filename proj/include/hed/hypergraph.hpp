#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hed/sparse.hpp"

namespace hed {

// Node layout of the unified graph: users first, then items, then bundles.
struct BlockRanges {
    Index n_users = 0;
    Index n_items = 0;
    Index n_bundles = 0;

    Index user_begin() const { return 0; }
    Index user_end() const { return n_users; }
    Index item_begin() const { return n_users; }
    Index item_end() const { return n_users + n_items; }
    Index bundle_begin() const { return n_users + n_items; }
    Index bundle_end() const { return n_users + n_items + n_bundles; }
    Index total() const { return n_users + n_items + n_bundles; }
};

// How the item-item diagonal block is filled.
enum class ItemBlockMode { zero, identity };

struct HypergraphConfig {
    // Two entities are co-interacting when they share strictly more than
    // n_threshold interaction partners.
    Index n_threshold = 10;
    ItemBlockMode ii_mode = ItemBlockMode::zero;
};

// Symmetric (U+I+B)^2 incidence structure combining all interaction views:
//
//        users     items     bundles
// users  co-int    a_ui      a_ub
// items  a_ui^T    0 or I    a_bi^T
// bund.  a_ub^T    a_bi      co-int
//
// Binary, symmetric; the co-interaction diagonals are 1 (self-loops).
class CompleteHypergraph {
public:
    CompleteHypergraph() = default;
    CompleteHypergraph(std::shared_ptr<const SparseBinaryMatrix> h, BlockRanges ranges,
                       HypergraphConfig config)
        : h_(std::move(h)), ranges_(ranges), config_(config) {}

    const SparseBinaryMatrix& h() const { return *h_; }
    std::shared_ptr<const SparseBinaryMatrix> h_ptr() const { return h_; }
    const BlockRanges& ranges() const { return ranges_; }
    const HypergraphConfig& config() const { return config_; }

private:
    std::shared_ptr<const SparseBinaryMatrix> h_;
    BlockRanges ranges_;
    HypergraphConfig config_;
};

// Co-interaction graph over the rows of `interactions`: entry (a, b) is 1 when
// rows a and b share strictly more than `threshold` columns (presence counts;
// values are ignored). Diagonal entries are always 1, even for all-zero rows.
SparseBinaryMatrix build_co_interaction(const SparseBinaryMatrix& interactions, Index threshold);

CompleteHypergraph assemble(const SparseBinaryMatrix& a_ub_train, const SparseBinaryMatrix& a_ui,
                            const SparseBinaryMatrix& a_bi, const HypergraphConfig& config);

// Structural ablations: zero out the user-user and/or bundle-bundle blocks
// (including their diagonals), and/or force the item-item block to identity.
CompleteHypergraph with_block_ablations(const CompleteHypergraph& hg, bool zero_uu, bool zero_bb,
                                        bool ii_identity);

// Degree-normalized propagation chain
//
//   y = D_o^{-1/2} M D_i^{-1/2} M^T D_o^{-1/2} x
//
// held in factored form; the dense normalized matrix is never materialized.
// The chain is symmetric (it has the form A D A^T up to the outer scaling),
// so applying its transpose is the same operation. Zero degrees contribute a
// scale of 0. with_matrix() swaps the sparse factors (dropout variants) while
// keeping the scales fixed to the undropped degrees.
class NormalizedOperator {
public:
    NormalizedOperator() = default;
    NormalizedOperator(std::shared_ptr<const SparseBinaryMatrix> mat,
                       std::shared_ptr<const SparseBinaryMatrix> mat_t,
                       std::vector<double> outer_inv_sqrt, std::vector<double> inner_inv_sqrt);

    bool empty() const { return mat_ == nullptr; }
    Index size() const { return mat_ ? mat_->n_rows() : 0; }

    DenseMatrix apply(const DenseMatrix& x) const;
    DenseMatrix apply_transpose(const DenseMatrix& x) const;

    NormalizedOperator with_matrix(std::shared_ptr<const SparseBinaryMatrix> mat,
                                   std::shared_ptr<const SparseBinaryMatrix> mat_t) const;

    std::shared_ptr<const SparseBinaryMatrix> matrix_ptr() const { return mat_; }
    std::shared_ptr<const SparseBinaryMatrix> matrix_t_ptr() const { return mat_t_; }
    std::span<const double> outer_inv_sqrt() const { return outer_; }
    std::span<const double> inner_inv_sqrt() const { return inner_; }

    // Explicit normalized matrix (apply to identity); for tests and debugging.
    DenseMatrix to_dense() const;

private:
    std::shared_ptr<const SparseBinaryMatrix> mat_;
    std::shared_ptr<const SparseBinaryMatrix> mat_t_;
    std::vector<double> outer_;
    std::vector<double> inner_;
};

// Chain over the full graph: D_V^{-1/2} H D_E^{-1/2} H^T D_V^{-1/2}.
NormalizedOperator normalize_hypergraph(const CompleteHypergraph& hg);

// Chains over the train user-bundle matrix h = a_ub:
//   user side   (U x U): D_v^{-1/2} h   D_e^{-1/2} h^T D_v^{-1/2}
//   bundle side (B x B): D_e^{-1/2} h^T D_v^{-1/2} h   D_e^{-1/2}
// where D_v are user degrees and D_e bundle degrees. The two share storage.
struct UbOperators {
    NormalizedOperator user_side;
    NormalizedOperator bundle_side;
};
UbOperators normalize_ub(const SparseBinaryMatrix& a_ub_train);

// Everything the propagation step needs, built once per training run.
struct PropagationOperators {
    NormalizedOperator hyper;
    NormalizedOperator ub_user;
    NormalizedOperator ub_bundle;
    BlockRanges ranges;
};
PropagationOperators build_operators(const CompleteHypergraph& hg,
                                     const SparseBinaryMatrix& a_ub_train);

// Entry dropout that preserves symmetry: the fate of (i, j) and (j, i) is one
// shared keyed coin, so the result equals its own transpose and a single CSR
// can serve as both factors of a chain. Survivors are scaled by 1/(1-p).
// Deterministic in (matrix, p, nonce); p == 0 returns the input unchanged.
SparseBinaryMatrix dropout_symmetric(const SparseBinaryMatrix& m, double p, std::uint64_t nonce);

}  // namespace hed
