#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hed/hypergraph.hpp"
#include "hed/training.hpp"

namespace hed {

// Everything a run needs, assembled from a flat key=value file plus CLI
// overrides. Unknown keys are rejected.
struct RunConfig {
    std::string user_bundle_path;
    std::string user_item_path;
    std::string bundle_item_path;
    Index n_users = 0;
    Index n_items = 0;
    Index n_bundles = 0;
    double train_fraction = 0.8;
    HypergraphConfig hypergraph;
    ModelHyper hyper;
    TrainConfig train;
    AblationFlags ablation;
    std::vector<Index> ks{20, 40, 80};
    std::string out_dir = "out";
    bool use_cache = true;
};

// Applies one key=value override; throws ConfigError on unknown keys or
// unparseable values.
void apply_override(RunConfig& config, std::string_view key, std::string_view value);

// Lines of "key=value"; '#' comments and blank lines are skipped.
RunConfig parse_config_file(const std::filesystem::path& path);

// Comma-separated ablation tokens: hed-c|ub (skip the user-bundle chain),
// uu, bb (zero a co-interaction block), ii|ii-identity, none.
AblationFlags parse_ablation(std::string_view spec);
std::string ablation_to_string(const AblationFlags& flags);

// Canonical sorted key=value rendering; the hash identifies a configuration
// in output metadata.
std::string canonical_config_text(const RunConfig& config);
std::string config_hash_hex(const RunConfig& config);

}  // namespace hed
