#include "hed/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hed/error.hpp"
#include "hed/evaluation.hpp"
#include "hed/rng.hpp"

namespace hed {

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double logistic(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

double uib_loss(std::span<const double> pos_scores, std::span<const double> pos_boundaries,
                std::span<const double> neg_scores, std::span<const double> neg_boundaries) {
    if (pos_scores.size() != pos_boundaries.size() || neg_scores.size() != neg_boundaries.size())
        throw Error("uib_loss: score/boundary length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < pos_scores.size(); ++i)
        loss += softplus(pos_boundaries[i] - pos_scores[i]);
    for (std::size_t i = 0; i < neg_scores.size(); ++i)
        loss += softplus(neg_scores[i] - neg_boundaries[i]);
    return loss;
}

std::vector<Index> sample_negatives(const SparseBinaryMatrix& train, Index user, Index k,
                                    Rng& rng) {
    if (user >= train.n_rows()) throw Error("sample_negatives: user out of range");
    const Index n_bundles = train.n_cols();
    auto row = train.row_cols(user);
    const Index avail = n_bundles - row.size();
    if (k == 0 || avail == 0) return {};

    auto is_positive = [&](Index b) { return std::binary_search(row.begin(), row.end(), b); };

    if (k >= avail) {
        std::vector<Index> all;
        all.reserve(avail);
        for (Index b = 0; b < n_bundles; ++b)
            if (!is_positive(b)) all.push_back(b);
        return all;
    }
    if (k * 2 >= avail) {
        // Dense user: draw from the explicit complement.
        std::vector<Index> pool;
        pool.reserve(avail);
        for (Index b = 0; b < n_bundles; ++b)
            if (!is_positive(b)) pool.push_back(b);
        std::vector<Index> out;
        out.reserve(k);
        for (Index i = 0; i < k; ++i) {
            Index j = i + static_cast<Index>(rng.uniform_index(avail - i));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }
    // Sparse user: rejection sampling.
    std::vector<Index> out;
    out.reserve(k);
    while (out.size() < k) {
        Index b = static_cast<Index>(rng.uniform_index(n_bundles));
        if (is_positive(b)) continue;
        if (std::find(out.begin(), out.end(), b) != out.end()) continue;
        out.push_back(b);
    }
    return out;
}

namespace {

// Gradient of a pass, run backwards: the adjoint of
//   e_next = blend(hyper(e))
// where blend applies (alpha I + beta W) on the user/bundle blocks and
// identity on items. All chains are symmetric so their adjoints reuse
// apply_transpose of the recorded operators.
DenseMatrix pass_backward(const DenseMatrix& grad_next, const PassOperators& ops, double alpha,
                          double beta, const BlockRanges& rg) {
    DenseMatrix mid = grad_next;
    const Index d = grad_next.n_cols();
    if (ops.ub_active) {
        DenseMatrix gu = block_rows(grad_next, rg.user_begin(), rg.user_end());
        DenseMatrix gb = block_rows(grad_next, rg.bundle_begin(), rg.bundle_end());
        DenseMatrix tu = ops.ub_user.apply_transpose(gu);
        DenseMatrix tb = ops.ub_bundle.apply_transpose(gb);
        for (Index r = rg.user_begin(); r < rg.user_end(); ++r) {
            auto g = grad_next.row(r);
            auto t = tu.row(r - rg.user_begin());
            auto o = mid.row(r);
            for (Index c = 0; c < d; ++c) o[c] = alpha * g[c] + beta * t[c];
        }
        for (Index r = rg.bundle_begin(); r < rg.bundle_end(); ++r) {
            auto g = grad_next.row(r);
            auto t = tb.row(r - rg.bundle_begin());
            auto o = mid.row(r);
            for (Index c = 0; c < d; ++c) o[c] = alpha * g[c] + beta * t[c];
        }
    } else {
        for (Index r = rg.user_begin(); r < rg.user_end(); ++r) {
            auto o = mid.row(r);
            for (Index c = 0; c < d; ++c) o[c] *= alpha;
        }
        for (Index r = rg.bundle_begin(); r < rg.bundle_end(); ++r) {
            auto o = mid.row(r);
            for (Index c = 0; c < d; ++c) o[c] *= alpha;
        }
    }
    return ops.hyper.apply_transpose(mid);
}

}  // namespace

Gradients backward(const Batch& batch, const LayerTrace& trace, const ModelParams& params,
                   const FinalEmbeddings& finals) {
    const auto& rg = trace.ranges;
    const Index d = params.dim;
    if (finals.users.n_cols() != d) throw Error("backward: dim mismatch");

    // Loss layer: gradients w.r.t. the combined user/bundle tables and w.
    DenseMatrix g_fu(rg.n_users, d), g_fb(rg.n_bundles, d);
    std::vector<double> g_w(d, 0.0);

    auto dot = [&](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (Index c = 0; c < d; ++c) s += a[c] * b[c];
        return s;
    };

    for (const auto& [u, p] : batch.positives) {
        auto eu = finals.users.row(u);
        auto eb = finals.bundles.row(p);
        double b_u = dot(eu, params.w);
        double y = dot(eu, eb);
        double s = logistic(b_u - y);
        auto gu = g_fu.row(u);
        auto gb = g_fb.row(p);
        for (Index c = 0; c < d; ++c) {
            gu[c] += s * (params.w[c] - eb[c]);
            gb[c] -= s * eu[c];
            g_w[c] += s * eu[c];
        }
    }
    for (const auto& [u, n] : batch.negatives) {
        auto eu = finals.users.row(u);
        auto eb = finals.bundles.row(n);
        double b_u = dot(eu, params.w);
        double y = dot(eu, eb);
        double s = logistic(y - b_u);
        auto gu = g_fu.row(u);
        auto gb = g_fb.row(n);
        for (Index c = 0; c < d; ++c) {
            gu[c] += s * (eb[c] - params.w[c]);
            gb[c] += s * eu[c];
            g_w[c] -= s * eu[c];
        }
    }

    // Reverse the combination: every level receives its 1/(l+1) share of the
    // loss-layer gradient, then flows back through the recorded passes.
    const Index n_levels = trace.e.size();
    auto scatter = [&](Index level) {  // 1-based level
        DenseMatrix g(rg.total(), d);
        const double c = 1.0 / static_cast<double>(level + 1);
        add_scaled_block_rows(g, rg.user_begin(), g_fu, c);
        add_scaled_block_rows(g, rg.bundle_begin(), g_fb, c);
        return g;
    };

    DenseMatrix acc = scatter(n_levels);
    for (Index j = n_levels - 1; j > 0; --j) {
        acc = pass_backward(acc, trace.ops[j - 1], trace.alpha, trace.beta, rg);
        add_scaled(acc, scatter(j), 1.0);
    }

    Gradients g;
    g.e_u = block_rows(acc, rg.user_begin(), rg.user_end());
    g.e_i = block_rows(acc, rg.item_begin(), rg.item_end());
    g.e_b = block_rows(acc, rg.bundle_begin(), rg.bundle_end());
    g.w = std::move(g_w);
    return g;
}

OptimizerState OptimizerState::like(const ModelParams& params) {
    OptimizerState s;
    s.m_u = DenseMatrix(params.e_u.n_rows(), params.dim);
    s.v_u = DenseMatrix(params.e_u.n_rows(), params.dim);
    s.m_i = DenseMatrix(params.e_i.n_rows(), params.dim);
    s.v_i = DenseMatrix(params.e_i.n_rows(), params.dim);
    s.m_b = DenseMatrix(params.e_b.n_rows(), params.dim);
    s.v_b = DenseMatrix(params.e_b.n_rows(), params.dim);
    s.m_w.assign(params.dim, 0.0);
    s.v_w.assign(params.dim, 0.0);
    return s;
}

namespace {

void adamw_tensor(std::span<double> p, std::span<const double> g, std::span<double> m,
                  std::span<double> v, double lr, double decay, const AdamWSettings& s,
                  double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        double m_hat = m[i] / bc1;
        double v_hat = v[i] / bc2;
        p[i] -= lr * (m_hat / (std::sqrt(v_hat) + s.eps) + decay * p[i]);
    }
}

}  // namespace

void adamw_step(ModelParams& params, const Gradients& grads, OptimizerState& state, double lr,
                double weight_decay, const AdamWSettings& settings) {
    if (grads.e_u.n_rows() != params.e_u.n_rows() || grads.w.size() != params.w.size())
        throw Error("adamw_step: gradient shape mismatch");
    state.step += 1;
    const double bc1 = 1.0 - std::pow(settings.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(settings.beta2, static_cast<double>(state.step));
    adamw_tensor(params.e_u.data(), grads.e_u.data(), state.m_u.data(), state.v_u.data(), lr,
                 weight_decay, settings, bc1, bc2);
    adamw_tensor(params.e_i.data(), grads.e_i.data(), state.m_i.data(), state.v_i.data(), lr,
                 weight_decay, settings, bc1, bc2);
    adamw_tensor(params.e_b.data(), grads.e_b.data(), state.m_b.data(), state.v_b.data(), lr,
                 weight_decay, settings, bc1, bc2);
    adamw_tensor(params.w, grads.w, state.m_w, state.v_w, lr, 0.0, settings, bc1, bc2);
}

TrainResult train(const Split& split, const CompleteHypergraph& graph, const ModelHyper& hyper,
                  const TrainConfig& config, const AblationFlags& flags) {
    const auto& rg = graph.ranges();
    if (split.train.n_rows() != rg.n_users || split.train.n_cols() != rg.n_bundles)
        throw ConfigError("train: split shape does not match graph");
    if (config.batch_size == 0) throw ConfigError("train: batch_size must be positive");
    if (split.train.nnz() == 0) throw ConfigError("train: no training interactions");

    const bool structural =
        flags.zero_h_uu || flags.zero_h_bb || flags.ii_identity;
    CompleteHypergraph run_graph =
        structural ? with_block_ablations(graph, flags.zero_h_uu, flags.zero_h_bb,
                                          flags.ii_identity)
                   : graph;
    PropagationOperators ops = build_operators(run_graph, split.train);

    ModelParams params = init_embeddings(rg.n_users, rg.n_items, rg.n_bundles, hyper.dim,
                                         config.seed);
    params.n_layers = hyper.n_layers;
    params.alpha = hyper.alpha;
    params.beta = hyper.beta;
    OptimizerState opt = OptimizerState::like(params);

    std::vector<TrainingPair> positives;
    positives.reserve(split.train.nnz());
    for (Index u = 0; u < split.train.n_rows(); ++u)
        for (Index b : split.train.row_cols(u)) positives.push_back({u, b});

    Rng sampling_rng = Rng::stream(config.seed, "sampling");
    Rng dropout_rng = Rng::stream(config.seed, "dropout");

    ForwardSettings train_settings;
    train_settings.scheme = config.layer_scheme;
    train_settings.train_mode = true;
    train_settings.hypergraph_dropout = config.hypergraph_dropout;
    train_settings.ub_dropout = config.ub_dropout;
    train_settings.disable_ub = flags.disable_ub_conv;

    ForwardSettings eval_settings;
    eval_settings.scheme = config.layer_scheme;
    eval_settings.disable_ub = flags.disable_ub_conv;

    const Index eval_k = std::min<Index>(20, rg.n_bundles);

    std::vector<Index> perm(positives.size());
    std::iota(perm.begin(), perm.end(), Index{0});

    TrainResult result;
    for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
        sampling_rng.shuffle(perm);
        double loss_sum = 0.0;

        for (Index start = 0; start < perm.size(); start += config.batch_size) {
            const Index end = std::min<Index>(start + config.batch_size, perm.size());
            Batch batch;
            batch.positives.reserve(end - start);
            for (Index i = start; i < end; ++i) batch.positives.push_back(positives[perm[i]]);
            for (const auto& pos : batch.positives)
                for (Index b : sample_negatives(split.train, pos.user,
                                                config.negatives_per_positive, sampling_rng))
                    batch.negatives.push_back({pos.user, b});

            LayerTrace trace = forward(params, ops, train_settings, &dropout_rng);
            FinalEmbeddings finals = combine_all_layers(trace);

            std::vector<double> ps, pb, ns, nb;
            ps.reserve(batch.positives.size());
            pb.reserve(batch.positives.size());
            auto bounds = boundary(finals.users, params.w);
            for (const auto& [u, b] : batch.positives) {
                ps.push_back(score(finals, u, b));
                pb.push_back(bounds[u]);
            }
            for (const auto& [u, b] : batch.negatives) {
                ns.push_back(score(finals, u, b));
                nb.push_back(bounds[u]);
            }
            double batch_loss = uib_loss(ps, pb, ns, nb);
            if (!std::isfinite(batch_loss))
                throw DivergenceError("train: non-finite loss at epoch " +
                                      std::to_string(epoch));
            loss_sum += batch_loss;

            Gradients grads = backward(batch, trace, params, finals);
            adamw_step(params, grads, opt, config.learning_rate, config.weight_decay);
        }

        if (!params.e_u.all_finite() || !params.e_i.all_finite() || !params.e_b.all_finite() ||
            !std::all_of(params.w.begin(), params.w.end(),
                         [](double x) { return std::isfinite(x); }))
            throw DivergenceError("train: non-finite parameters at epoch " +
                                  std::to_string(epoch));

        EpochStats stats;
        stats.epoch = epoch;
        stats.loss = loss_sum / static_cast<double>(positives.size());

        const bool do_eval = (config.eval_every > 0 && epoch % config.eval_every == 0) ||
                             epoch == config.epochs;
        if (do_eval && split.test.nnz() > 0) {
            LayerTrace trace = forward(params, ops, eval_settings, nullptr);
            FinalEmbeddings finals = combine_all_layers(trace);
            const Index ks[] = {eval_k};
            MetricsReport report = evaluate(finals, split, ks);
            stats.evaluated = true;
            stats.recall = report.recall[0];
            stats.ndcg = report.ndcg[0];
        }
        result.history.push_back(stats);
    }
    result.params = std::move(params);
    return result;
}

}  // namespace hed
