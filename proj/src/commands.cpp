#include "hed/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include "hed/error.hpp"
#include "hed/evaluation.hpp"
#include "hed/io.hpp"

namespace hed {

namespace fs = std::filesystem;

namespace {

struct Workspace {
    InteractionDataset ds;
    Split split;
    CompleteHypergraph graph;
    bool graph_from_cache = false;
};

void require_inputs(const RunConfig& c) {
    if (c.user_bundle_path.empty() || c.user_item_path.empty() || c.bundle_item_path.empty())
        throw ConfigError("config: all three interaction paths must be set");
    if (c.n_users == 0 || c.n_items == 0 || c.n_bundles == 0)
        throw ConfigError("config: n_users, n_items and n_bundles must be positive");
}

HypergraphCacheMeta meta_of(const RunConfig& c, const Workspace& w) {
    HypergraphCacheMeta meta;
    meta.split_seed = c.train.seed;
    meta.train_fraction = c.train_fraction;
    meta.nnz_ub = w.ds.a_ub.nnz();
    meta.nnz_ui = w.ds.a_ui.nnz();
    meta.nnz_bi = w.ds.a_bi.nnz();
    return meta;
}

bool cache_matches(const RunConfig& c, const Workspace& w, const HypergraphCache& cache) {
    const auto& rg = cache.graph.ranges();
    const auto& cfg = cache.graph.config();
    return rg.n_users == c.n_users && rg.n_items == c.n_items && rg.n_bundles == c.n_bundles &&
           cfg.n_threshold == c.hypergraph.n_threshold &&
           cfg.ii_mode == c.hypergraph.ii_mode && cache.meta.split_seed == c.train.seed &&
           cache.meta.train_fraction == c.train_fraction &&
           cache.meta.nnz_ub == w.ds.a_ub.nnz() && cache.meta.nnz_ui == w.ds.a_ui.nnz() &&
           cache.meta.nnz_bi == w.ds.a_bi.nnz();
}

fs::path cache_path(const RunConfig& c) { return fs::path(c.out_dir) / "hypergraph.bin"; }

Workspace prepare_workspace(const RunConfig& c, bool allow_cache_read) {
    require_inputs(c);
    Workspace w;
    w.ds = load_dataset(c.user_bundle_path, c.user_item_path, c.bundle_item_path, c.n_users,
                        c.n_items, c.n_bundles);
    w.split = split_train_test(w.ds.a_ub, c.train_fraction, c.train.seed);

    const fs::path cache = cache_path(c);
    if (allow_cache_read && c.use_cache && fs::exists(cache)) {
        try {
            HypergraphCache loaded = read_hypergraph_cache(cache);
            if (cache_matches(c, w, loaded)) {
                w.graph = std::move(loaded.graph);
                w.graph_from_cache = true;
                return w;
            }
            std::cout << "cached graph does not match this configuration; rebuilding\n";
        } catch (const ConfigError& e) {
            std::cout << "ignoring unreadable graph cache (" << e.what() << "); rebuilding\n";
        }
    }
    w.graph = assemble(w.split.train, w.ds.a_ui, w.ds.a_bi, c.hypergraph);
    return w;
}

void write_cache_if_wanted(const RunConfig& c, const Workspace& w) {
    if (!c.use_cache || w.graph_from_cache) return;
    fs::create_directories(c.out_dir);
    write_hypergraph_cache(cache_path(c), w.graph, meta_of(c, w));
}

std::vector<std::string> metrics_metadata(const RunConfig& c) {
    return {
        "config_hash=" + config_hash_hex(c),
        "seed=" + std::to_string(c.train.seed),
        "dataset=" + c.user_bundle_path,
        "ablation=" + ablation_to_string(c.ablation),
    };
}

MetricsReport evaluate_params(const RunConfig& c, const Workspace& w,
                              const ModelParams& params) {
    const bool structural =
        c.ablation.zero_h_uu || c.ablation.zero_h_bb || c.ablation.ii_identity;
    CompleteHypergraph run_graph =
        structural ? with_block_ablations(w.graph, c.ablation.zero_h_uu, c.ablation.zero_h_bb,
                                          c.ablation.ii_identity)
                   : w.graph;
    PropagationOperators ops = build_operators(run_graph, w.split.train);
    ForwardSettings settings;
    settings.scheme = c.train.layer_scheme;
    settings.disable_ub = c.ablation.disable_ub_conv;
    LayerTrace trace = forward(params, ops, settings, nullptr);
    FinalEmbeddings finals = combine_all_layers(trace);
    return evaluate(finals, w.split, c.ks);
}

void print_metrics(const MetricsReport& report) {
    std::ostringstream out;
    out.precision(6);
    for (std::size_t i = 0; i < report.ks.size(); ++i)
        out << "k=" << report.ks[i] << "  recall=" << report.recall[i]
            << "  ndcg=" << report.ndcg[i] << '\n';
    std::cout << out.str();
}

int run_mapped(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

MetricsReport train_and_report(const RunConfig& c) {
    Workspace w = prepare_workspace(c, /*allow_cache_read=*/true);
    write_cache_if_wanted(c, w);
    fs::create_directories(c.out_dir);

    TrainResult result = train(w.split, w.graph, c.hyper, c.train, c.ablation);
    write_checkpoint(fs::path(c.out_dir) / "checkpoint.bin", result.params);
    atomic_write_text(fs::path(c.out_dir) / "history.csv", history_to_csv(result.history));

    MetricsReport report = evaluate_params(c, w, result.params);
    atomic_write_text(fs::path(c.out_dir) / "metrics.csv",
                      metrics_to_csv(report, metrics_metadata(c)));

    if (!result.history.empty()) {
        std::ostringstream out;
        out.precision(6);
        out << "final epoch " << result.history.back().epoch << "  loss "
            << result.history.back().loss << '\n';
        std::cout << out.str();
    }
    print_metrics(report);
    return report;
}

}  // namespace

int run_build_graph(const RunConfig& config) {
    return run_mapped([&] {
        RunConfig c = config;
        c.use_cache = true;  // the whole point of the command is the cache file
        Workspace w = prepare_workspace(c, /*allow_cache_read=*/false);
        write_cache_if_wanted(c, w);
        const auto& rg = w.graph.ranges();
        std::cout << "graph nodes " << rg.total() << " (users " << rg.n_users << ", items "
                  << rg.n_items << ", bundles " << rg.n_bundles << ")\n"
                  << "graph nnz " << w.graph.h().nnz() << '\n'
                  << "cache " << cache_path(c).string() << '\n';
        return 0;
    });
}

int run_train(const RunConfig& config) {
    return run_mapped([&] {
        train_and_report(config);
        return 0;
    });
}

int run_evaluate(const RunConfig& config, const std::string& checkpoint_path) {
    return run_mapped([&] {
        std::string path = checkpoint_path.empty()
                               ? (fs::path(config.out_dir) / "checkpoint.bin").string()
                               : checkpoint_path;
        ModelParams params = read_checkpoint(path);
        Workspace w = prepare_workspace(config, /*allow_cache_read=*/true);
        if (params.e_u.n_rows() != config.n_users || params.e_i.n_rows() != config.n_items ||
            params.e_b.n_rows() != config.n_bundles)
            throw ConfigError("checkpoint entity counts do not match the configured dataset");

        MetricsReport report = evaluate_params(config, w, params);
        fs::create_directories(config.out_dir);
        atomic_write_text(fs::path(config.out_dir) / "metrics.csv",
                          metrics_to_csv(report, metrics_metadata(config)));
        print_metrics(report);
        return 0;
    });
}

int run_sweep(const RunConfig& config, const std::string& param,
              const std::vector<double>& values) {
    return run_mapped([&] {
        static const std::vector<std::string> kParams = {"embedding_size", "n", "alpha", "beta",
                                                         "learning_rate"};
        if (std::find(kParams.begin(), kParams.end(), param) == kParams.end())
            throw ConfigError("sweep: unsupported parameter \"" + param +
                              "\" (expected embedding_size, n, alpha, beta or learning_rate)");
        if (values.empty()) throw ConfigError("sweep: no values given");

        const bool integral = param == "embedding_size" || param == "n";
        std::ostringstream summary;
        summary.precision(10);
        summary << "param,value,k,recall,ndcg\n";

        const fs::path sweep_dir = fs::path(config.out_dir) / ("sweep_" + param);
        for (double v : values) {
            if (integral && (v < 0.0 || v != std::floor(v)))
                throw ConfigError("sweep: " + param + " values must be nonnegative integers");
            std::ostringstream tag;
            tag << v;

            RunConfig job = config;
            job.out_dir = (sweep_dir / tag.str()).string();
            if (param == "embedding_size") job.hyper.dim = static_cast<Index>(v);
            else if (param == "n") job.hypergraph.n_threshold = static_cast<Index>(v);
            else if (param == "alpha") job.hyper.alpha = v;
            else if (param == "beta") job.hyper.beta = v;
            else job.train.learning_rate = v;

            std::cout << "sweep " << param << "=" << tag.str() << " -> " << job.out_dir << '\n';
            MetricsReport report = train_and_report(job);
            for (std::size_t i = 0; i < report.ks.size(); ++i)
                summary << param << ',' << tag.str() << ',' << report.ks[i] << ','
                        << report.recall[i] << ',' << report.ndcg[i] << '\n';
        }
        fs::create_directories(sweep_dir);
        atomic_write_text(sweep_dir / "summary.csv", summary.str());
        return 0;
    });
}

}  // namespace hed
