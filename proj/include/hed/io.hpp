#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "hed/evaluation.hpp"
#include "hed/hypergraph.hpp"
#include "hed/model.hpp"
#include "hed/training.hpp"

namespace hed {

// Little-endian primitives (explicit byte order; files are portable).
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
std::uint64_t get_u64(std::istream& in, const std::string& context);
double get_f64(std::istream& in, const std::string& context);

// Writes via "<path>.tmp" then renames, so a failed write never leaves a
// partial file at the target path.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer);
void atomic_write_text(const std::filesystem::path& path, const std::string& text);

// Identifies the inputs a cached graph was built from.
struct HypergraphCacheMeta {
    std::uint64_t split_seed = 0;
    double train_fraction = 0.0;
    std::uint64_t nnz_ub = 0;
    std::uint64_t nnz_ui = 0;
    std::uint64_t nnz_bi = 0;
};

void write_hypergraph_cache(const std::filesystem::path& path, const CompleteHypergraph& hg,
                            const HypergraphCacheMeta& meta);

struct HypergraphCache {
    CompleteHypergraph graph;
    HypergraphCacheMeta meta;
};

// Raises ConfigError on a bad magic, version, truncation, or degree vectors
// inconsistent with the stored structure.
HypergraphCache read_hypergraph_cache(const std::filesystem::path& path);

void write_checkpoint(const std::filesystem::path& path, const ModelParams& params);
ModelParams read_checkpoint(const std::filesystem::path& path);

std::string history_to_csv(const std::vector<EpochStats>& history);
std::string metrics_to_csv(const MetricsReport& report,
                           const std::vector<std::string>& metadata);

}  // namespace hed
