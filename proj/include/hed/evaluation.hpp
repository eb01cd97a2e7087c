#pragma once

#include <span>
#include <vector>

#include "hed/dataset.hpp"
#include "hed/model.hpp"

namespace hed {

// Full descending-score ordering of bundle ids, excluding `masked_sorted`
// (ascending id list). Ties break toward the smaller id, which makes the
// ordering total and rankings reproducible.
std::vector<Index> rank_bundles(std::span<const double> scores,
                                std::span<const Index> masked_sorted);

// Fraction of the user's test bundles that appear in the first k ranked ids.
double recall_at_k(std::span<const Index> ranked, std::span<const Index> test_sorted, Index k);

// DCG over hits in the first k positions (gain 1/log2(pos+1), pos 1-based)
// divided by the ideal DCG for min(k, |test|) hits.
double ndcg_at_k(std::span<const Index> ranked, std::span<const Index> test_sorted, Index k);

struct MetricsReport {
    std::vector<Index> ks;
    std::vector<double> recall;  // aligned with ks
    std::vector<double> ndcg;
    Index n_evaluated_users = 0;
};

// Ranks every user's bundles with train interactions masked out, averages
// recall/ndcg uniformly over users that have at least one test interaction.
// Per-user work is parallel; the averages use compensated summation in user
// order, so results do not depend on thread count.
MetricsReport evaluate(const FinalEmbeddings& finals, const Split& split,
                       std::span<const Index> ks);

}  // namespace hed
