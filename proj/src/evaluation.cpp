#include "hed/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hed/error.hpp"
#include "hed/parallel.hpp"

namespace hed {

namespace {

bool contains(std::span<const Index> sorted, Index x) {
    return std::binary_search(sorted.begin(), sorted.end(), x);
}

double ideal_dcg(Index n_hits) {
    double s = 0.0;
    for (Index p = 1; p <= n_hits; ++p) s += 1.0 / std::log2(static_cast<double>(p) + 1.0);
    return s;
}

// Kahan compensated sum in index order.
double compensated_sum(std::span<const double> xs) {
    double sum = 0.0, comp = 0.0;
    for (double x : xs) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace

std::vector<Index> rank_bundles(std::span<const double> scores,
                                std::span<const Index> masked_sorted) {
    std::vector<Index> ids;
    ids.reserve(scores.size());
    for (Index b = 0; b < scores.size(); ++b)
        if (!contains(masked_sorted, b)) ids.push_back(b);
    std::sort(ids.begin(), ids.end(), [&](Index a, Index b) {
        return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    });
    return ids;
}

double recall_at_k(std::span<const Index> ranked, std::span<const Index> test_sorted, Index k) {
    if (k == 0) throw ConfigError("recall_at_k: k must be positive");
    if (test_sorted.empty()) throw ConfigError("recall_at_k: empty test set");
    const Index top = std::min<Index>(k, ranked.size());
    Index hits = 0;
    for (Index p = 0; p < top; ++p)
        if (contains(test_sorted, ranked[p])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(test_sorted.size());
}

double ndcg_at_k(std::span<const Index> ranked, std::span<const Index> test_sorted, Index k) {
    if (k == 0) throw ConfigError("ndcg_at_k: k must be positive");
    if (test_sorted.empty()) throw ConfigError("ndcg_at_k: empty test set");
    const Index top = std::min<Index>(k, ranked.size());
    double dcg = 0.0;
    for (Index p = 0; p < top; ++p)
        if (contains(test_sorted, ranked[p]))
            dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
    const Index n_ideal = std::min<Index>(k, test_sorted.size());
    return dcg / ideal_dcg(n_ideal);
}

MetricsReport evaluate(const FinalEmbeddings& finals, const Split& split,
                       std::span<const Index> ks) {
    const Index n_users = finals.users.n_rows();
    const Index n_bundles = finals.bundles.n_rows();
    const Index d = finals.users.n_cols();
    if (split.train.n_rows() != n_users || split.test.n_rows() != n_users ||
        split.train.n_cols() != n_bundles || split.test.n_cols() != n_bundles)
        throw ConfigError("evaluate: split shape does not match embeddings");
    if (ks.empty()) throw ConfigError("evaluate: no k values");
    for (Index k : ks) {
        if (k == 0) throw ConfigError("evaluate: k must be positive");
        if (k > n_bundles)
            throw ConfigError("evaluate: k=" + std::to_string(k) + " exceeds bundle count " +
                              std::to_string(n_bundles));
    }

    std::vector<char> has_test(n_users, 0);
    Index n_eval = 0;
    for (Index u = 0; u < n_users; ++u) {
        if (!split.test.row_cols(u).empty()) {
            has_test[u] = 1;
            ++n_eval;
        }
    }
    if (n_eval == 0) throw ConfigError("evaluate: no users with test interactions");

    // per_user[ki] holds each evaluated user's metric, packed in user order.
    const Index max_k = *std::max_element(ks.begin(), ks.end());
    std::vector<std::vector<double>> per_user_recall(ks.size()), per_user_ndcg(ks.size());
    for (auto& v : per_user_recall) v.assign(n_users, 0.0);
    for (auto& v : per_user_ndcg) v.assign(n_users, 0.0);

    parallel_for(n_users, [&](Index lo, Index hi) {
        std::vector<double> scores(n_bundles);
        std::vector<Index> top;
        for (Index u = lo; u < hi; ++u) {
            if (!has_test[u]) continue;
            auto eu = finals.users.row(u);
            for (Index b = 0; b < n_bundles; ++b) {
                auto eb = finals.bundles.row(b);
                double s = 0.0;
                for (Index c = 0; c < d; ++c) s += eu[c] * eb[c];
                scores[b] = s;
            }
            auto masked = split.train.row_cols(u);
            auto test = split.test.row_cols(u);

            top.clear();
            for (Index b = 0; b < n_bundles; ++b)
                if (!contains(masked, b)) top.push_back(b);
            auto better = [&](Index a, Index b) {
                return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
            };
            const Index cut = std::min<Index>(max_k, top.size());
            std::partial_sort(top.begin(), top.begin() + cut, top.end(), better);
            top.resize(cut);

            for (std::size_t ki = 0; ki < ks.size(); ++ki) {
                per_user_recall[ki][u] = recall_at_k(top, test, ks[ki]);
                per_user_ndcg[ki][u] = ndcg_at_k(top, test, ks[ki]);
            }
        }
    }, 16);

    MetricsReport report;
    report.ks.assign(ks.begin(), ks.end());
    report.n_evaluated_users = n_eval;
    for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        // Pack evaluated users in user order before the compensated sum.
        std::vector<double> r, n;
        r.reserve(n_eval);
        n.reserve(n_eval);
        for (Index u = 0; u < n_users; ++u) {
            if (!has_test[u]) continue;
            r.push_back(per_user_recall[ki][u]);
            n.push_back(per_user_ndcg[ki][u]);
        }
        report.recall.push_back(compensated_sum(r) / static_cast<double>(n_eval));
        report.ndcg.push_back(compensated_sum(n) / static_cast<double>(n_eval));
    }
    return report;
}

}  // namespace hed
