#include "hed/model.hpp"

#include "hed/error.hpp"
#include "hed/rng.hpp"

namespace hed {

ModelParams init_embeddings(Index n_users, Index n_items, Index n_bundles, Index dim,
                            std::uint64_t seed) {
    if (dim == 0) throw ConfigError("init_embeddings: dim must be positive");
    Rng rng = Rng::stream(seed, "init");
    ModelParams p;
    p.dim = dim;
    p.e_u = DenseMatrix(n_users, dim);
    p.e_i = DenseMatrix(n_items, dim);
    p.e_b = DenseMatrix(n_bundles, dim);
    for (auto& x : p.e_u.data()) x = rng.normal(0.0, 0.01);
    for (auto& x : p.e_i.data()) x = rng.normal(0.0, 0.01);
    for (auto& x : p.e_b.data()) x = rng.normal(0.0, 0.01);
    p.w.assign(dim, 0.0);
    return p;
}

DenseMatrix stack_embeddings(const ModelParams& params) {
    const Index u = params.e_u.n_rows(), i = params.e_i.n_rows(), b = params.e_b.n_rows();
    DenseMatrix e(u + i + b, params.dim);
    set_block_rows(e, 0, params.e_u);
    set_block_rows(e, u, params.e_i);
    set_block_rows(e, u + i, params.e_b);
    return e;
}

Index pass_count(LayerScheme scheme, Index n_layers) {
    if (n_layers == 0) throw ConfigError("n_layers must be positive");
    return scheme == LayerScheme::literal ? n_layers - 1 : n_layers;
}

Index term_count(LayerScheme scheme, Index n_layers) {
    return pass_count(scheme, n_layers) + 1;
}

PassResult dual_conv_pass(const DenseMatrix& e, const PropagationOperators& base, double alpha,
                          double beta, const ForwardSettings& settings, Rng* dropout_rng) {
    const auto& rg = base.ranges;
    if (e.n_rows() != rg.total()) throw Error("dual_conv_pass: table row count mismatch");

    const bool hyper_drop = settings.train_mode && settings.hypergraph_dropout > 0.0;
    const bool ub_active = !settings.disable_ub && beta != 0.0;
    const bool ub_drop = ub_active && settings.train_mode && settings.ub_dropout > 0.0;
    if ((hyper_drop || ub_drop) && dropout_rng == nullptr)
        throw Error("dual_conv_pass: dropout requires an rng");

    PassOperators used;
    used.ub_active = ub_active;

    if (hyper_drop) {
        auto dropped = std::make_shared<const SparseBinaryMatrix>(dropout_symmetric(
            *base.hyper.matrix_ptr(), settings.hypergraph_dropout, dropout_rng->next()));
        used.hyper = base.hyper.with_matrix(dropped, dropped);
    } else {
        used.hyper = base.hyper;
    }

    DenseMatrix e_bar = used.hyper.apply(e);
    DenseMatrix e_next(e.n_rows(), e.n_cols());
    set_block_rows(e_next, 0, e_bar);  // whole table; blocks adjusted below

    if (ub_active) {
        if (ub_drop) {
            auto dropped = std::make_shared<const SparseBinaryMatrix>(dropout_nonzeros(
                *base.ub_user.matrix_ptr(), settings.ub_dropout, *dropout_rng));
            auto dropped_t = std::make_shared<const SparseBinaryMatrix>(transpose(*dropped));
            used.ub_user = base.ub_user.with_matrix(dropped, dropped_t);
            used.ub_bundle = base.ub_bundle.with_matrix(dropped_t, dropped);
        } else {
            used.ub_user = base.ub_user;
            used.ub_bundle = base.ub_bundle;
        }
        DenseMatrix bar_u = block_rows(e_bar, rg.user_begin(), rg.user_end());
        DenseMatrix bar_b = block_rows(e_bar, rg.bundle_begin(), rg.bundle_end());
        DenseMatrix tilde_u = used.ub_user.apply(bar_u);
        DenseMatrix tilde_b = used.ub_bundle.apply(bar_b);

        for (Index r = rg.user_begin(); r < rg.user_end(); ++r) {
            auto bar = e_bar.row(r);
            auto til = tilde_u.row(r - rg.user_begin());
            auto out = e_next.row(r);
            for (Index c = 0; c < e.n_cols(); ++c) out[c] = alpha * bar[c] + beta * til[c];
        }
        for (Index r = rg.bundle_begin(); r < rg.bundle_end(); ++r) {
            auto bar = e_bar.row(r);
            auto til = tilde_b.row(r - rg.bundle_begin());
            auto out = e_next.row(r);
            for (Index c = 0; c < e.n_cols(); ++c) out[c] = alpha * bar[c] + beta * til[c];
        }
    } else {
        for (Index r = rg.user_begin(); r < rg.user_end(); ++r) {
            auto out = e_next.row(r);
            for (Index c = 0; c < e.n_cols(); ++c) out[c] *= alpha;
        }
        for (Index r = rg.bundle_begin(); r < rg.bundle_end(); ++r) {
            auto out = e_next.row(r);
            for (Index c = 0; c < e.n_cols(); ++c) out[c] *= alpha;
        }
    }
    return {std::move(e_next), std::move(used)};
}

LayerTrace forward(const ModelParams& params, const PropagationOperators& base,
                   const ForwardSettings& settings, Rng* dropout_rng) {
    LayerTrace trace;
    trace.ranges = base.ranges;
    trace.alpha = params.alpha;
    trace.beta = params.beta;
    trace.e.push_back(stack_embeddings(params));
    const Index passes = pass_count(settings.scheme, params.n_layers);
    for (Index j = 0; j < passes; ++j) {
        auto res = dual_conv_pass(trace.e.back(), base, params.alpha, params.beta, settings,
                                  dropout_rng);
        trace.e.push_back(std::move(res.e_next));
        trace.ops.push_back(std::move(res.used));
    }
    return trace;
}

FinalEmbeddings combine_layers(const LayerTrace& trace, Index n_terms) {
    if (n_terms == 0 || n_terms > trace.e.size())
        throw ConfigError("combine_layers: n_terms out of range");
    const auto& rg = trace.ranges;
    const Index d = trace.e[0].n_cols();
    FinalEmbeddings f;
    f.users = DenseMatrix(rg.n_users, d);
    f.bundles = DenseMatrix(rg.n_bundles, d);
    for (Index l = 1; l <= n_terms; ++l) {
        const double c = 1.0 / static_cast<double>(l + 1);
        const DenseMatrix& e = trace.e[l - 1];
        for (Index r = 0; r < rg.n_users; ++r) {
            auto src = e.row(rg.user_begin() + r);
            auto dst = f.users.row(r);
            for (Index k = 0; k < d; ++k) dst[k] += c * src[k];
        }
        for (Index r = 0; r < rg.n_bundles; ++r) {
            auto src = e.row(rg.bundle_begin() + r);
            auto dst = f.bundles.row(r);
            for (Index k = 0; k < d; ++k) dst[k] += c * src[k];
        }
    }
    return f;
}

FinalEmbeddings combine_all_layers(const LayerTrace& trace) {
    return combine_layers(trace, trace.e.size());
}

double score(const FinalEmbeddings& finals, Index user, Index bundle) {
    auto eu = finals.users.row(user);
    auto eb = finals.bundles.row(bundle);
    double s = 0.0;
    for (Index k = 0; k < eu.size(); ++k) s += eu[k] * eb[k];
    return s;
}

DenseMatrix score_all(const FinalEmbeddings& finals) {
    return matmul_nt(finals.users, finals.bundles);
}

std::vector<double> boundary(const DenseMatrix& final_users, std::span<const double> w) {
    if (w.size() != final_users.n_cols()) throw Error("boundary: w length mismatch");
    std::vector<double> b(final_users.n_rows(), 0.0);
    for (Index u = 0; u < final_users.n_rows(); ++u) {
        auto row = final_users.row(u);
        double s = 0.0;
        for (Index k = 0; k < w.size(); ++k) s += row[k] * w[k];
        b[u] = s;
    }
    return b;
}

}  // namespace hed
