#include "hed/hypergraph.hpp"

#include <algorithm>
#include <cmath>

#include "hed/error.hpp"
#include "hed/parallel.hpp"
#include "hed/rng.hpp"

namespace hed {

namespace {

std::vector<double> inv_sqrt(std::vector<double> degrees) {
    for (auto& d : degrees) d = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    return degrees;
}

}  // namespace

SparseBinaryMatrix build_co_interaction(const SparseBinaryMatrix& interactions, Index threshold) {
    const Index n = interactions.n_rows();
    auto t = transpose(interactions);

    std::vector<std::vector<Index>> rows(n);
    parallel_for(n, [&](Index lo, Index hi) {
        std::vector<Index> shared(n, 0);
        std::vector<Index> touched;
        for (Index a = lo; a < hi; ++a) {
            touched.clear();
            for (Index col : interactions.row_cols(a)) {
                for (Index b : t.row_cols(col)) {
                    if (shared[b] == 0) touched.push_back(b);
                    ++shared[b];
                }
            }
            auto& out = rows[a];
            out.push_back(a);  // self-loop regardless of activity
            for (Index b : touched) {
                if (b != a && shared[b] > threshold) out.push_back(b);
                shared[b] = 0;
            }
            std::sort(out.begin(), out.end());
        }
    }, 64);

    std::vector<Index> offs(n + 1, 0);
    for (Index r = 0; r < n; ++r) offs[r + 1] = offs[r] + rows[r].size();
    std::vector<Index> cols;
    cols.reserve(offs[n]);
    for (Index r = 0; r < n; ++r) cols.insert(cols.end(), rows[r].begin(), rows[r].end());
    std::vector<double> vals(cols.size(), 1.0);
    return SparseBinaryMatrix(n, n, std::move(offs), std::move(cols), std::move(vals));
}

CompleteHypergraph assemble(const SparseBinaryMatrix& a_ub_train, const SparseBinaryMatrix& a_ui,
                            const SparseBinaryMatrix& a_bi, const HypergraphConfig& config) {
    const Index U = a_ub_train.n_rows();
    const Index B = a_ub_train.n_cols();
    const Index I = a_ui.n_cols();
    if (a_ui.n_rows() != U)
        throw ConfigError("assemble: user-item matrix row count does not match user count");
    if (a_bi.n_rows() != B || a_bi.n_cols() != I)
        throw ConfigError("assemble: bundle-item matrix shape mismatch");

    auto h_uu = build_co_interaction(a_ub_train, config.n_threshold);
    auto a_bu = transpose(a_ub_train);
    auto h_bb = build_co_interaction(a_bu, config.n_threshold);
    auto a_iu = transpose(a_ui);
    auto a_ib = transpose(a_bi);

    BlockRanges ranges{U, I, B};
    const Index N = ranges.total();
    const bool ii_identity = config.ii_mode == ItemBlockMode::identity;

    Index nnz = h_uu.nnz() + h_bb.nnz() + 2 * (a_ui.nnz() + a_ub_train.nnz() + a_bi.nnz()) +
                (ii_identity ? I : 0);
    std::vector<Index> offs(N + 1, 0);
    std::vector<Index> cols;
    std::vector<double> vals;
    cols.reserve(nnz);

    Index row_out = 0;
    auto end_row = [&] { offs[++row_out] = cols.size(); };

    for (Index u = 0; u < U; ++u) {
        for (Index c : h_uu.row_cols(u)) cols.push_back(c);
        for (Index c : a_ui.row_cols(u)) cols.push_back(U + c);
        for (Index c : a_ub_train.row_cols(u)) cols.push_back(U + I + c);
        end_row();
    }
    for (Index i = 0; i < I; ++i) {
        for (Index c : a_iu.row_cols(i)) cols.push_back(c);
        if (ii_identity) cols.push_back(U + i);
        for (Index c : a_ib.row_cols(i)) cols.push_back(U + I + c);
        end_row();
    }
    for (Index b = 0; b < B; ++b) {
        for (Index c : a_bu.row_cols(b)) cols.push_back(c);
        for (Index c : a_bi.row_cols(b)) cols.push_back(U + c);
        for (Index c : h_bb.row_cols(b)) cols.push_back(U + I + c);
        end_row();
    }
    vals.assign(cols.size(), 1.0);

    auto h = std::make_shared<const SparseBinaryMatrix>(N, N, std::move(offs), std::move(cols),
                                                        std::move(vals));
    return CompleteHypergraph(std::move(h), ranges, config);
}

CompleteHypergraph with_block_ablations(const CompleteHypergraph& hg, bool zero_uu, bool zero_bb,
                                        bool ii_identity) {
    const auto& h = hg.h();
    const auto& rg = hg.ranges();
    std::vector<CooEntry> kept;
    kept.reserve(h.nnz() + (ii_identity ? rg.n_items : 0));
    for (Index r = 0; r < h.n_rows(); ++r) {
        const bool r_user = r < rg.user_end();
        const bool r_bundle = r >= rg.bundle_begin();
        auto cs = h.row_cols(r);
        auto vs = h.row_vals(r);
        for (Index k = 0; k < cs.size(); ++k) {
            Index c = cs[k];
            if (zero_uu && r_user && c < rg.user_end()) continue;
            if (zero_bb && r_bundle && c >= rg.bundle_begin()) continue;
            kept.push_back({r, c, vs[k]});
        }
    }
    HypergraphConfig config = hg.config();
    if (ii_identity && config.ii_mode == ItemBlockMode::zero) {
        for (Index i = 0; i < rg.n_items; ++i)
            kept.push_back({rg.item_begin() + i, rg.item_begin() + i, 1.0});
        config.ii_mode = ItemBlockMode::identity;
    }
    auto h2 = std::make_shared<const SparseBinaryMatrix>(
        from_coo(kept, h.n_rows(), h.n_cols()));
    return CompleteHypergraph(std::move(h2), rg, config);
}

NormalizedOperator::NormalizedOperator(std::shared_ptr<const SparseBinaryMatrix> mat,
                                       std::shared_ptr<const SparseBinaryMatrix> mat_t,
                                       std::vector<double> outer_inv_sqrt,
                                       std::vector<double> inner_inv_sqrt)
    : mat_(std::move(mat)),
      mat_t_(std::move(mat_t)),
      outer_(std::move(outer_inv_sqrt)),
      inner_(std::move(inner_inv_sqrt)) {
    if (!mat_ || !mat_t_) throw Error("NormalizedOperator: null matrix");
    if (mat_->n_rows() != mat_t_->n_cols() || mat_->n_cols() != mat_t_->n_rows())
        throw Error("NormalizedOperator: factor shapes are not transposes");
    if (outer_.size() != mat_->n_rows() || inner_.size() != mat_->n_cols())
        throw Error("NormalizedOperator: scale length mismatch");
}

DenseMatrix NormalizedOperator::apply(const DenseMatrix& x) const {
    if (empty()) throw Error("NormalizedOperator: apply on empty operator");
    if (x.n_rows() != size()) throw Error("NormalizedOperator: input row count mismatch");
    DenseMatrix t = x;
    scale_rows(t, outer_);
    DenseMatrix u = spmm(*mat_t_, t);
    scale_rows(u, inner_);
    DenseMatrix y = spmm(*mat_, u);
    scale_rows(y, outer_);
    return y;
}

DenseMatrix NormalizedOperator::apply_transpose(const DenseMatrix& x) const {
    // (D_o M D_i M^T D_o)^T reverses the factor list and transposes each
    // factor, which reproduces the original sequence: the chain is symmetric.
    return apply(x);
}

NormalizedOperator NormalizedOperator::with_matrix(
    std::shared_ptr<const SparseBinaryMatrix> mat,
    std::shared_ptr<const SparseBinaryMatrix> mat_t) const {
    return NormalizedOperator(std::move(mat), std::move(mat_t), outer_, inner_);
}

DenseMatrix NormalizedOperator::to_dense() const {
    return apply(DenseMatrix::identity(size()));
}

NormalizedOperator normalize_hypergraph(const CompleteHypergraph& hg) {
    const auto& h = hg.h();
    if (h.n_rows() != h.n_cols()) throw Error("normalize_hypergraph: H must be square");
    return NormalizedOperator(hg.h_ptr(), hg.h_ptr(), inv_sqrt(row_degrees(h)),
                              inv_sqrt(col_degrees(h)));
}

UbOperators normalize_ub(const SparseBinaryMatrix& a_ub_train) {
    auto h = std::make_shared<const SparseBinaryMatrix>(a_ub_train);
    auto ht = std::make_shared<const SparseBinaryMatrix>(transpose(a_ub_train));
    auto user_scale = inv_sqrt(row_degrees(*h));
    auto bundle_scale = inv_sqrt(col_degrees(*h));
    UbOperators ops;
    ops.user_side = NormalizedOperator(h, ht, user_scale, bundle_scale);
    ops.bundle_side = NormalizedOperator(ht, h, std::move(bundle_scale), std::move(user_scale));
    return ops;
}

PropagationOperators build_operators(const CompleteHypergraph& hg,
                                     const SparseBinaryMatrix& a_ub_train) {
    const auto& rg = hg.ranges();
    if (a_ub_train.n_rows() != rg.n_users || a_ub_train.n_cols() != rg.n_bundles)
        throw ConfigError("build_operators: user-bundle matrix shape does not match graph");
    PropagationOperators ops;
    ops.hyper = normalize_hypergraph(hg);
    auto ub = normalize_ub(a_ub_train);
    ops.ub_user = std::move(ub.user_side);
    ops.ub_bundle = std::move(ub.bundle_side);
    ops.ranges = rg;
    return ops;
}

SparseBinaryMatrix dropout_symmetric(const SparseBinaryMatrix& m, double p, std::uint64_t nonce) {
    if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout_symmetric: p must be in [0, 1)");
    if (m.n_rows() != m.n_cols()) throw Error("dropout_symmetric: matrix must be square");
    if (p == 0.0) return m;
    const double scale = 1.0 / (1.0 - p);
    const Index n = m.n_rows();

    std::vector<Index> offs(n + 1, 0);
    std::vector<Index> keep_count(n, 0);
    parallel_for(n, [&](Index lo, Index hi) {
        for (Index r = lo; r < hi; ++r) {
            Index cnt = 0;
            for (Index c : m.row_cols(r))
                if (keyed_keep(nonce, std::min(r, c), std::max(r, c), p)) ++cnt;
            keep_count[r] = cnt;
        }
    }, 512);
    for (Index r = 0; r < n; ++r) offs[r + 1] = offs[r] + keep_count[r];

    std::vector<Index> cols(offs[n]);
    std::vector<double> vals(offs[n]);
    parallel_for(n, [&](Index lo, Index hi) {
        for (Index r = lo; r < hi; ++r) {
            Index pos = offs[r];
            auto rc = m.row_cols(r);
            auto rv = m.row_vals(r);
            for (Index k = 0; k < rc.size(); ++k) {
                Index c = rc[k];
                if (keyed_keep(nonce, std::min(r, c), std::max(r, c), p)) {
                    cols[pos] = c;
                    vals[pos] = rv[k] * scale;
                    ++pos;
                }
            }
        }
    }, 512);
    return SparseBinaryMatrix(n, n, std::move(offs), std::move(cols), std::move(vals));
}

}  // namespace hed
