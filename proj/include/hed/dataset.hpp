#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hed/sparse.hpp"

namespace hed {

// Binary interaction data for one dataset.
//   a_ub: user x bundle, a_ui: user x item, a_bi: bundle x item.
struct InteractionDataset {
    Index n_users = 0;
    Index n_items = 0;
    Index n_bundles = 0;
    SparseBinaryMatrix a_ub;
    SparseBinaryMatrix a_ui;
    SparseBinaryMatrix a_bi;
};

struct Split {
    SparseBinaryMatrix train;
    SparseBinaryMatrix test;
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
};

// Reads whitespace-separated "row col" pairs, one per line. Blank lines and
// lines starting with '#' are skipped. Malformed lines and ids >= the given
// bounds raise ConfigError naming the line.
SparseBinaryMatrix load_interaction_pairs(const std::filesystem::path& path, Index n_rows,
                                          Index n_cols);

// Raw pair list with no bounds applied (used for id remapping).
std::vector<std::pair<std::uint64_t, std::uint64_t>> read_pair_file(
    const std::filesystem::path& path);

// One "row col" line per stored entry, row-major. Inverse of
// load_interaction_pairs for binary matrices.
void write_interaction_pairs(const std::filesystem::path& path, const SparseBinaryMatrix& m);

InteractionDataset load_dataset(const std::filesystem::path& user_bundle,
                                const std::filesystem::path& user_item,
                                const std::filesystem::path& bundle_item, Index n_users,
                                Index n_items, Index n_bundles);

// Per-pair Bernoulli split of the user-bundle interactions: each stored pair
// goes to train with probability train_fraction, else to test. Deterministic
// in (matrix, fraction, seed); train and test are disjoint and exhaustive.
Split split_train_test(const SparseBinaryMatrix& a_ub, double train_fraction,
                       std::uint64_t seed);

struct DatasetStats {
    Index n_users = 0, n_items = 0, n_bundles = 0;
    Index nnz_ub = 0, nnz_ui = 0, nnz_bi = 0;
    double density_ub = 0, density_ui = 0, density_bi = 0;
};

DatasetStats dataset_stats(const InteractionDataset& ds);
std::string stats_to_csv(const DatasetStats& s);

// Rewrites pair files whose ids are sparse/non-contiguous into dense 0-based
// ids. Users/items/bundles are each remapped by sorted original id. Returns
// the mappings (new id -> original id per entity class).
struct DatasetRemap {
    std::vector<std::uint64_t> users;    // users[new] = original
    std::vector<std::uint64_t> items;
    std::vector<std::uint64_t> bundles;
};

DatasetRemap remap_dataset_files(const std::filesystem::path& in_ub,
                                 const std::filesystem::path& in_ui,
                                 const std::filesystem::path& in_bi,
                                 const std::filesystem::path& out_ub,
                                 const std::filesystem::path& out_ui,
                                 const std::filesystem::path& out_bi);

// Keeps a seeded Bernoulli sample of users plus the bundles/items they touch
// (directly or through kept bundles), reindexed densely in original order.
InteractionDataset subsample_users(const InteractionDataset& ds, double user_fraction,
                                   std::uint64_t seed);

}  // namespace hed
