#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hed/commands.hpp"
#include "hed/error.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string ablate;
    std::string out;
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool out_given = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "flat key=value configuration file")
        ->required();
    sub->add_option("--set", args.sets, "override a config entry, key=value (repeatable)");
    sub->add_option("--ablate", args.ablate,
                    "comma-separated ablations: hed-c|ub, uu, bb, ii");
    auto* seed = sub->add_option("--seed", args.seed, "override the run seed");
    auto* out = sub->add_option("--out", args.out, "override the output directory");
    sub->callback([&args, seed, out] {
        args.seed_given = seed->count() > 0;
        args.out_given = out->count() > 0;
    });
}

hed::RunConfig build_config(const CommonArgs& args) {
    hed::RunConfig config = hed::parse_config_file(args.config_path);
    for (const auto& kv : args.sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw hed::ConfigError("--set expects key=value, got \"" + kv + "\"");
        hed::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (args.seed_given) config.train.seed = args.seed;
    if (args.out_given) config.out_dir = args.out;
    if (!args.ablate.empty()) config.ablation = hed::parse_ablation(args.ablate);
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypergraph bundle recommender"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string checkpoint;
    std::string sweep_param;
    std::vector<double> sweep_values;

    CLI::App* build = app.add_subcommand("build-graph", "assemble and cache the unified graph");
    add_common(build, args);

    CLI::App* train = app.add_subcommand("train", "train a model and write a checkpoint");
    add_common(train, args);

    CLI::App* evaluate = app.add_subcommand("evaluate", "rank with a trained checkpoint");
    add_common(evaluate, args);
    evaluate->add_option("--checkpoint", checkpoint,
                         "checkpoint path (default <out_dir>/checkpoint.bin)");

    CLI::App* sweep = app.add_subcommand("sweep", "train across one parameter's values");
    add_common(sweep, args);
    sweep->add_option("--param", sweep_param,
                      "embedding_size, n, alpha, beta or learning_rate")
        ->required();
    sweep->add_option("--values", sweep_values, "comma-separated values")
        ->required()
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        hed::RunConfig config = build_config(args);
        if (build->parsed()) return hed::run_build_graph(config);
        if (train->parsed()) return hed::run_train(config);
        if (evaluate->parsed()) return hed::run_evaluate(config, checkpoint);
        return hed::run_sweep(config, sweep_param, sweep_values);
    } catch (const hed::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const hed::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
