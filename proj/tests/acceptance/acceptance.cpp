// End-to-end acceptance checks for the bundle recommendation engine. Each
// criterion prints exactly one line:
//
//   criterion N: PASS — <detail>
//   criterion N: FAIL — <detail>
//   criterion N: [SKIP] dataset not present at <path>
//
// Dataset-backed criteria skip honestly when the data files are absent; all
// numeric tolerances are pinned here, next to the checks that use them.

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hed/config.hpp"
#include "hed/dataset.hpp"
#include "hed/error.hpp"
#include "hed/evaluation.hpp"
#include "hed/hypergraph.hpp"
#include "hed/io.hpp"
#include "hed/model.hpp"
#include "hed/rng.hpp"
#include "hed/training.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hed;
namespace ts = hed::testsupport;

namespace {

struct Outcome {
    enum class Status { pass, fail, skip } status;
    std::string detail;

    static Outcome pass(std::string d) { return {Status::pass, std::move(d)}; }
    static Outcome fail(std::string d) { return {Status::fail, std::move(d)}; }
    static Outcome skip(std::string d) { return {Status::skip, std::move(d)}; }
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------- datasets

struct DatasetPaths {
    fs::path user_bundle, user_item, bundle_item;
    fs::path base;
};

std::optional<DatasetPaths> find_dataset(const std::string& name) {
    DatasetPaths p;
    p.base = fs::path(HED_DATA_DIR) / name;
    p.user_bundle = p.base / "user_bundle.txt";
    p.user_item = p.base / "user_item.txt";
    p.bundle_item = p.base / "bundle_item.txt";
    for (const auto& f : {p.user_bundle, p.user_item, p.bundle_item})
        if (!fs::exists(f)) return std::nullopt;
    return p;
}

// Seed for the large-data runs; pinned so reruns reuse cached checkpoints.
constexpr std::uint64_t kExperimentSeed = 7;

struct ExperimentSetup {
    InteractionDataset ds;
    Split split;
    CompleteHypergraph graph;
    ModelHyper hyper;
    TrainConfig config;
};

ExperimentSetup youshu_setup(const DatasetPaths& paths) {
    ExperimentSetup s;
    s.ds = load_dataset(paths.user_bundle, paths.user_item, paths.bundle_item, 8039, 32770, 4771);
    s.split = split_train_test(s.ds.a_ub, 0.8, kExperimentSeed);
    HypergraphConfig hc;
    hc.n_threshold = 10;
    s.graph = assemble(s.split.train, s.ds.a_ui, s.ds.a_bi, hc);
    s.hyper = {64, 2, 0.5, 0.01};
    s.config.learning_rate = 5e-3;
    s.config.weight_decay = 0.1;
    s.config.epochs = 300;
    s.config.batch_size = 1024;
    s.config.negatives_per_positive = 1;
    s.config.hypergraph_dropout = 0.2;
    s.config.ub_dropout = 0.01;
    s.config.seed = kExperimentSeed;
    s.config.eval_every = 50;
    return s;
}

std::string setup_fingerprint(const ExperimentSetup& s, const AblationFlags& flags) {
    std::ostringstream f;
    f.precision(17);
    f << "nnz_ub=" << s.ds.a_ub.nnz() << " nnz_ui=" << s.ds.a_ui.nnz()
      << " nnz_bi=" << s.ds.a_bi.nnz() << " split=" << s.split.seed << '/'
      << s.split.train_fraction << " dim=" << s.hyper.dim << " layers=" << s.hyper.n_layers
      << " alpha=" << s.hyper.alpha << " beta=" << s.hyper.beta
      << " lr=" << s.config.learning_rate << " wd=" << s.config.weight_decay
      << " epochs=" << s.config.epochs << " batch=" << s.config.batch_size
      << " negs=" << s.config.negatives_per_positive << " hdrop="
      << s.config.hypergraph_dropout << " ubdrop=" << s.config.ub_dropout
      << " seed=" << s.config.seed << " ablate=" << ablation_to_string(flags) << '\n';
    return f.str();
}

// Trains once per (setup, ablation) and caches the checkpoint next to a
// fingerprint of everything that influenced it, so reruns and the sibling
// criterion reuse the result instead of repeating hours of work.
ModelParams train_cached(const ExperimentSetup& s, const AblationFlags& flags,
                         const std::string& tag) {
    const fs::path dir = fs::path("acceptance_artifacts") / tag;
    const fs::path ckpt = dir / "checkpoint.bin";
    const fs::path fp = dir / "fingerprint.txt";
    const std::string want = setup_fingerprint(s, flags);

    if (fs::exists(ckpt) && fs::exists(fp)) {
        std::ifstream in(fp, std::ios::binary);
        std::ostringstream have;
        have << in.rdbuf();
        if (have.str() == want) return read_checkpoint(ckpt);
    }
    auto result = train(s.split, s.graph, s.hyper, s.config, flags);
    fs::create_directories(dir);
    write_checkpoint(ckpt, result.params);
    atomic_write_text(fp, want);
    return result.params;
}

MetricsReport evaluate_setup(const ExperimentSetup& s, const AblationFlags& flags,
                             const ModelParams& params, const std::vector<Index>& ks) {
    auto graph = with_block_ablations(s.graph, flags.zero_h_uu, flags.zero_h_bb,
                                      flags.ii_identity);
    auto ops = build_operators(graph, s.split.train);
    ForwardSettings settings;
    settings.disable_ub = flags.disable_ub_conv;
    auto finals = combine_all_layers(forward(params, ops, settings));
    return evaluate(finals, s.split, ks);
}

// ---------------------------------------------------------------- criteria

// Analytic gradients against central finite differences on a complete tiny
// model, for the full variant and the four named ablations.
Outcome criterion_1() {
    auto ds = ts::random_dataset(5, 7, 4, 0.5, 0.4, 0.5, 4242);
    HypergraphConfig hc;
    hc.n_threshold = 0;
    auto graph = assemble(ds.a_ub, ds.a_ui, ds.a_bi, hc);

    struct Variant {
        const char* name;
        AblationFlags flags;
    };
    const std::vector<Variant> variants = {
        {"full", {}},
        {"no-ub-conv", {true, false, false, false}},
        {"no-ub-conv+zero-uu", {true, true, false, false}},
        {"no-ub-conv+zero-bb", {true, false, true, false}},
        {"no-ub-conv+zero-both", {true, true, true, false}},
    };

    const double step = 1e-4;
    const double tol = 1e-4;
    double worst = 0.0;
    for (const auto& variant : variants) {
        auto varied = with_block_ablations(graph, variant.flags.zero_h_uu,
                                           variant.flags.zero_h_bb, variant.flags.ii_identity);
        auto ops = build_operators(varied, ds.a_ub);

        auto params = init_embeddings(5, 7, 4, 8, 4243);
        Rng wr(4244);
        for (auto& x : params.w) x = wr.normal(0.0, 0.5);

        Batch batch;
        batch.positives = {{0, 1}, {1, 2}, {2, 3}, {4, 0}};
        batch.negatives = {{0, 3}, {1, 0}, {2, 1}, {4, 2}};

        ForwardSettings settings;
        settings.disable_ub = variant.flags.disable_ub_conv;

        auto fd = ts::fd_gradient(params, ops, settings, batch, step);
        auto an = ts::analytic_gradient(params, ops, settings, batch);
        if (fd.size() != an.size()) return Outcome::fail("gradient length mismatch");
        for (std::size_t i = 0; i < fd.size(); ++i) {
            const double rel = ts::relative_error(fd[i], an[i]);
            worst = std::max(worst, rel);
            if (rel > tol)
                return Outcome::fail(std::string("variant ") + variant.name + " parameter " +
                                     std::to_string(i) + " relative error " + fmt(rel));
        }
    }
    return Outcome::pass("136 parameters x 5 variants, worst relative error " + fmt(worst));
}

// Factored normalized operators against dense chain multiplication.
Outcome criterion_2() {
    Rng rng(515);
    const double tol = 1e-12;
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        const Index u = 2 + rng.uniform_index(9);   // <= 10
        const Index i = 2 + rng.uniform_index(9);
        const Index b = 2 + rng.uniform_index(9);   // total <= 30 nodes
        auto ds = ts::random_dataset(u, i, b, 0.4, 0.35, 0.4, 5150 + inst);
        HypergraphConfig hc;
        hc.n_threshold = rng.uniform_index(2);
        auto graph = assemble(ds.a_ub, ds.a_ui, ds.a_bi, hc);

        auto hyper_op = normalize_hypergraph(graph);
        DenseMatrix x(graph.ranges().total(), 3);
        for (auto& v : x.data()) v = rng.normal(0.0, 1.0);
        worst = std::max(worst, max_abs_diff(hyper_op.apply(x),
                                             ts::dense_normalized_chain_apply(graph.h(), x)));

        auto ub = normalize_ub(ds.a_ub);
        DenseMatrix xu(u, 3), xb(b, 3);
        for (auto& v : xu.data()) v = rng.normal(0.0, 1.0);
        for (auto& v : xb.data()) v = rng.normal(0.0, 1.0);
        worst = std::max(worst, max_abs_diff(ub.user_side.apply(xu),
                                             ts::dense_normalized_chain_apply(ds.a_ub, xu)));
        worst = std::max(
            worst, max_abs_diff(ub.bundle_side.apply(xb),
                                ts::dense_normalized_chain_apply(transpose(ds.a_ub), xb)));
        if (worst > tol)
            return Outcome::fail("instance " + std::to_string(inst) + " deviates by " +
                                 fmt(worst));
    }
    return Outcome::pass("50 instances, all three chains within " + fmt(worst) +
                         " of the dense reference");
}

// Co-interaction construction against brute-force common-neighbour counting.
Outcome criterion_3() {
    Rng rng(525);
    for (int inst = 0; inst < 50; ++inst) {
        const Index entities = 2 + rng.uniform_index(49);  // <= 50
        const Index partners = 2 + rng.uniform_index(20);
        const Index threshold = rng.uniform_index(4);
        auto a = ts::random_binary(entities, partners, 0.3, rng);

        auto fast = build_co_interaction(a, threshold);
        auto slow = ts::brute_co_interaction(a, threshold);
        if (max_abs_diff(fast.to_dense(), slow) != 0.0)
            return Outcome::fail("instance " + std::to_string(inst) +
                                 " disagrees with brute-force counting");
        for (Index e = 0; e < entities; ++e)
            if (fast.value_at(e, e) != 1.0)
                return Outcome::fail("instance " + std::to_string(inst) + " diagonal " +
                                     std::to_string(e) + " is not 1");
    }

    // Assembled graphs are exactly symmetric.
    for (int inst = 0; inst < 10; ++inst) {
        auto ds = ts::random_dataset(5 + rng.uniform_index(10), 4 + rng.uniform_index(10),
                                     3 + rng.uniform_index(10), 0.4, 0.3, 0.4, 5250 + inst);
        HypergraphConfig hc;
        hc.n_threshold = rng.uniform_index(3);
        auto graph = assemble(ds.a_ub, ds.a_ui, ds.a_bi, hc);
        auto t = transpose(graph.h());
        if (t.row_offsets() != graph.h().row_offsets() ||
            t.col_indices() != graph.h().col_indices() || t.values() != graph.h().values())
            return Outcome::fail("assembled graph " + std::to_string(inst) +
                                 " is not exactly symmetric");
    }
    return Outcome::pass("50 construction instances exact; 10 assembled graphs symmetric");
}

// Ranking metrics against direct-definition brute force.
Outcome criterion_4() {
    // Hand values first.
    {
        std::vector<double> scores = {0.3, 0.2, 0.9, 0.25, 0.01};
        auto ranked = rank_bundles(scores, {});
        std::vector<Index> test = {2, 4};
        if (recall_at_k(ranked, test, 3) != 0.5)
            return Outcome::fail("hand recall value is not exactly 0.5");
        std::vector<double> s2 = {0.9, 0.5, 0.1};
        auto r2 = rank_bundles(s2, {});
        std::vector<Index> t2 = {1};
        if (ndcg_at_k(r2, t2, 2) != 1.0 / std::log2(3.0))
            return Outcome::fail("hand ndcg value is not exactly 1/log2(3)");
    }

    Rng rng(535);
    const double tol = 1e-12;
    double worst = 0.0;
    for (int inst = 0; inst < 1000; ++inst) {
        const Index n = 5 + rng.uniform_index(30);
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.uniform();
        if (inst % 4 == 0 && n > 7) scores[2] = scores[6];  // exercise tie-breaking

        std::set<Index> masked, test;
        for (Index b = 0; b < n; ++b) {
            const double u = rng.uniform();
            if (u < 0.2) masked.insert(b);
            else if (u < 0.5) test.insert(b);
        }
        for (Index b : masked) test.erase(b);
        if (test.empty())
            for (Index b = 0; b < n; ++b)
                if (!masked.count(b)) {
                    test.insert(b);
                    break;
                }
        if (test.empty()) continue;  // everything masked; vanishingly rare

        std::vector<Index> masked_v(masked.begin(), masked.end());
        std::vector<Index> test_v(test.begin(), test.end());
        const Index k = 1 + rng.uniform_index(n);
        auto ranked = rank_bundles(scores, masked_v);
        worst = std::max(worst, std::abs(recall_at_k(ranked, test_v, k) -
                                         ts::brute_recall(scores, masked, test, k)));
        worst = std::max(worst, std::abs(ndcg_at_k(ranked, test_v, k) -
                                         ts::brute_ndcg(scores, masked, test, k)));
        if (worst > tol)
            return Outcome::fail("instance " + std::to_string(inst) + " deviates by " +
                                 fmt(worst));
    }
    return Outcome::pass("hand values exact; 1000 random rankings within " + fmt(worst));
}

// Full model beats the variant without the user-bundle convolution.
Outcome criterion_5() {
    auto paths = find_dataset("youshu");
    if (!paths) return Outcome::skip((fs::path(HED_DATA_DIR) / "youshu").string());

    auto setup = youshu_setup(*paths);
    auto full = train_cached(setup, {}, "youshu_full");
    AblationFlags hedc;
    hedc.disable_ub_conv = true;
    auto reduced = train_cached(setup, hedc, "youshu_hedc");

    std::vector<Index> ks = {20};
    auto full_m = evaluate_setup(setup, {}, full, ks);
    auto hedc_m = evaluate_setup(setup, hedc, reduced, ks);

    std::ostringstream d;
    d << "full recall@20 " << fmt(full_m.recall[0]) << " vs " << fmt(hedc_m.recall[0])
      << ", ndcg@20 " << fmt(full_m.ndcg[0]) << " vs " << fmt(hedc_m.ndcg[0]);
    if (full_m.recall[0] > hedc_m.recall[0] && full_m.ndcg[0] > hedc_m.ndcg[0])
        return Outcome::pass(d.str());
    return Outcome::fail("no directional win: " + d.str());
}

// Absolute quality thresholds plus a subsampled smoke run on the larger set.
Outcome criterion_6() {
    auto youshu = find_dataset("youshu");
    if (!youshu) return Outcome::skip((fs::path(HED_DATA_DIR) / "youshu").string());
    auto netease = find_dataset("netease");
    if (!netease) return Outcome::skip((fs::path(HED_DATA_DIR) / "netease").string());

    auto setup = youshu_setup(*youshu);
    auto params = train_cached(setup, {}, "youshu_full");
    std::vector<Index> ks = {20};
    auto metrics = evaluate_setup(setup, {}, params, ks);
    const double min_recall = 0.30, min_ndcg = 0.18;
    if (metrics.recall[0] < min_recall || metrics.ndcg[0] < min_ndcg)
        return Outcome::fail("recall@20 " + fmt(metrics.recall[0]) + " (need >= 0.30), ndcg@20 " +
                             fmt(metrics.ndcg[0]) + " (need >= 0.18)");

    // 10% user subsample of the larger dataset: 20 epochs must run without
    // divergence and validation recall must improve over the stretch — no
    // epoch may fall below 0.8x the best seen so far, and the final epoch
    // must beat the first.
    auto big = load_dataset(netease->user_bundle, netease->user_item, netease->bundle_item,
                            18528, 123628, 22864);
    auto small = subsample_users(big, 0.1, kExperimentSeed);
    auto split = split_train_test(small.a_ub, 0.8, kExperimentSeed);
    HypergraphConfig hc;
    hc.n_threshold = 3;
    auto graph = assemble(split.train, small.a_ui, small.a_bi, hc);

    ModelHyper hyper{128, 2, 0.5, 0.01};
    TrainConfig config;
    config.learning_rate = 5e-3;
    config.weight_decay = 0.1;
    config.epochs = 20;
    config.batch_size = 2048;
    config.hypergraph_dropout = 0.1;
    config.ub_dropout = 0.01;
    config.seed = kExperimentSeed;
    config.eval_every = 1;

    std::vector<EpochStats> history;
    try {
        history = train(split, graph, hyper, config, {}).history;
    } catch (const DivergenceError& e) {
        return Outcome::fail(std::string("subsample run diverged: ") + e.what());
    }

    double best = 0.0;
    for (const auto& epoch : history) {
        if (!epoch.evaluated)
            return Outcome::fail("epoch " + std::to_string(epoch.epoch) + " was not evaluated");
        if (epoch.recall < 0.8 * best)
            return Outcome::fail("epoch " + std::to_string(epoch.epoch) + " recall " +
                                 fmt(epoch.recall) + " fell below 0.8x best " + fmt(best));
        best = std::max(best, epoch.recall);
    }
    if (history.back().recall <= history.front().recall)
        return Outcome::fail("no improvement: first epoch recall " +
                             fmt(history.front().recall) + ", final " +
                             fmt(history.back().recall));

    return Outcome::pass("recall@20 " + fmt(metrics.recall[0]) + ", ndcg@20 " +
                         fmt(metrics.ndcg[0]) + "; subsample recall " +
                         fmt(history.front().recall) + " -> " + fmt(history.back().recall));
}

// Internal consistency: ablation flag vs beta=0, layer combination weights,
// and recall monotonicity in k.
Outcome criterion_7() {
    // (a) Disabling the user-bundle chain must equal beta = 0 bit for bit.
    // The fixture carries 48 bundles so the k = 20 / k = 40 comparison below
    // runs at its real cutoffs.
    auto ds = ts::planted_dataset(40, 24, 48, 4, 0.08, 6001);
    auto split = split_train_test(ds.a_ub, 0.8, 11);
    HypergraphConfig hc;
    hc.n_threshold = 1;
    auto graph = assemble(split.train, ds.a_ui, ds.a_bi, hc);

    ModelHyper hyper{8, 2, 0.5, 0.01};
    TrainConfig config;
    config.epochs = 5;
    config.batch_size = 16;
    config.hypergraph_dropout = 0.2;
    config.ub_dropout = 0.1;
    config.seed = 13;
    config.eval_every = 0;

    AblationFlags hedc;
    hedc.disable_ub_conv = true;
    auto flagged = train(split, graph, hyper, config, hedc);
    ModelHyper beta0 = hyper;
    beta0.beta = 0.0;
    auto zeroed = train(split, graph, beta0, config, {});
    if (max_abs_diff(flagged.params.e_u, zeroed.params.e_u) != 0.0 ||
        max_abs_diff(flagged.params.e_i, zeroed.params.e_i) != 0.0 ||
        max_abs_diff(flagged.params.e_b, zeroed.params.e_b) != 0.0 ||
        flagged.params.w != zeroed.params.w)
        return Outcome::fail("ablation flag and beta=0 trained to different parameters");

    // (b) Two-level combination = 1/2 E1 + 1/3 E2.
    auto ops = build_operators(graph, split.train);
    auto params = init_embeddings(40, 24, 48, 8, 6007);
    ForwardSettings settings;
    auto trace = forward(params, ops, settings);
    if (trace.e.size() != 2) return Outcome::fail("two-layer trace has wrong depth");
    auto finals = combine_all_layers(trace);
    const auto& rg = ops.ranges;
    double worst = 0.0;
    for (Index u = 0; u < rg.n_users; ++u)
        for (Index c = 0; c < 8; ++c)
            worst = std::max(worst, std::abs(finals.users(u, c) - (0.5 * trace.e[0](u, c) +
                                                                   trace.e[1](u, c) / 3.0)));
    for (Index b = 0; b < rg.n_bundles; ++b)
        for (Index c = 0; c < 8; ++c)
            worst = std::max(worst,
                             std::abs(finals.bundles(b, c) -
                                      (0.5 * trace.e[0](rg.bundle_begin() + b, c) +
                                       trace.e[1](rg.bundle_begin() + b, c) / 3.0)));
    if (worst > 1e-12)
        return Outcome::fail("layer combination deviates from 1/2 E1 + 1/3 E2 by " + fmt(worst));

    // (c) Recall@40 >= Recall@20 for every evaluated user.
    auto finals_trained = [&] {
        ForwardSettings ev;
        auto tr = forward(flagged.params, ops, ev);
        return combine_all_layers(tr);
    }();
    auto scores = score_all(finals_trained);
    Index checked = 0;
    for (Index u = 0; u < rg.n_users; ++u) {
        std::vector<Index> test_b, masked;
        for (Index b = 0; b < rg.n_bundles; ++b) {
            if (split.test.has_entry(u, b)) test_b.push_back(b);
            if (split.train.has_entry(u, b)) masked.push_back(b);
        }
        if (test_b.empty()) continue;
        ++checked;
        std::vector<double> row(scores.row(u).begin(), scores.row(u).end());
        auto ranked = rank_bundles(row, masked);
        if (recall_at_k(ranked, test_b, 40) < recall_at_k(ranked, test_b, 20))
            return Outcome::fail("recall not monotone in k for user " + std::to_string(u));
    }
    if (checked == 0) return Outcome::fail("no users with test interactions in the fixture");

    return Outcome::pass("flag/beta equivalence exact; combination within 1e-12; recall "
                         "monotone over " +
                         std::to_string(checked) + " users");
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::function<Outcome()>> criteria = {
        {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
        {5, criterion_5}, {6, criterion_6}, {7, criterion_7},
    };

    std::vector<int> selected;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--criterion") == 0 && a + 1 < argc) {
            selected.push_back(std::atoi(argv[++a]));
        } else {
            std::cerr << "usage: acceptance [--criterion N]...\n";
            return 2;
        }
    }
    if (selected.empty())
        for (const auto& [id, fn] : criteria) selected.push_back(id);

    bool any_fail = false;
    for (int id : selected) {
        auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::cerr << "unknown criterion " << id << "\n";
            return 2;
        }
        Outcome outcome = [&] {
            try {
                return it->second();
            } catch (const std::exception& e) {
                return Outcome::fail(std::string("unexpected exception: ") + e.what());
            }
        }();
        switch (outcome.status) {
            case Outcome::Status::pass:
                std::cout << "criterion " << id << ": PASS — " << outcome.detail << "\n";
                break;
            case Outcome::Status::fail:
                std::cout << "criterion " << id << ": FAIL — " << outcome.detail << "\n";
                any_fail = true;
                break;
            case Outcome::Status::skip:
                std::cout << "criterion " << id << ": [SKIP] dataset not present at "
                          << outcome.detail << "\n";
                break;
        }
    }
    return any_fail ? 1 : 0;
}
