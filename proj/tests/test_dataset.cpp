#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>
#include <set>

#include "hed/dataset.hpp"
#include "hed/error.hpp"
#include "support/synthetic.hpp"
#include "support/tmpdir.hpp"

using namespace hed;
namespace ts = hed::testsupport;

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::set<std::pair<Index, Index>> coo_set(const SparseBinaryMatrix& m) {
    std::set<std::pair<Index, Index>> s;
    for (const auto& e : m.to_coo()) s.insert({e.row, e.col});
    return s;
}

}  // namespace

TEST_CASE("pair loading handles comments, duplicates and tabs") {
    ts::TempDir dir;
    write_text(dir.file("ub.txt"),
               "# header comment\n"
               "0 1\n"
               "0\t1\n"       // duplicate collapses to one binary entry
               "\n"
               "2 0\n");
    auto m = load_interaction_pairs(dir.file("ub.txt"), 3, 2);
    CHECK(m.nnz() == 2);
    CHECK(m.value_at(0, 1) == 1.0);
    CHECK(m.value_at(2, 0) == 1.0);
}

TEST_CASE("pair loading reports malformed lines and bound violations") {
    ts::TempDir dir;
    write_text(dir.file("bad.txt"), "0 1\nnot numbers\n");
    CHECK_THROWS_WITH_AS(load_interaction_pairs(dir.file("bad.txt"), 3, 3),
                         doctest::Contains(":2:"), ConfigError);

    write_text(dir.file("oob.txt"), "0 1\n7 1\n");
    CHECK_THROWS_WITH_AS(load_interaction_pairs(dir.file("oob.txt"), 3, 3),
                         doctest::Contains("(7, 1)"), ConfigError);

    CHECK_THROWS_AS(load_interaction_pairs(dir.file("missing.txt"), 3, 3), ConfigError);
}

TEST_CASE("pair files round-trip") {
    ts::TempDir dir;
    Rng rng(41);
    auto m = ts::random_binary(14, 11, 0.3, rng);
    write_interaction_pairs(dir.file("m.txt"), m);
    auto back = load_interaction_pairs(dir.file("m.txt"), 14, 11);
    CHECK(back.row_offsets() == m.row_offsets());
    CHECK(back.col_indices() == m.col_indices());
    CHECK(back.values() == m.values());
}

TEST_CASE("split is disjoint, exhaustive and deterministic") {
    Rng rng(43);
    auto a = ts::random_binary(50, 40, 0.5, rng);
    auto s = split_train_test(a, 0.8, 7);

    auto train = coo_set(s.train);
    auto test = coo_set(s.test);
    auto all = coo_set(a);
    CHECK(train.size() + test.size() == all.size());
    for (const auto& e : train) {
        CHECK(all.count(e) == 1);
        CHECK(test.count(e) == 0);
    }
    for (const auto& e : test) CHECK(all.count(e) == 1);

    auto s2 = split_train_test(a, 0.8, 7);
    CHECK(coo_set(s2.train) == train);

    auto s3 = split_train_test(a, 0.8, 8);
    CHECK(coo_set(s3.train) != train);
}

TEST_CASE("split fraction lands near its expectation") {
    Rng rng(47);
    auto a = ts::random_binary(100, 100, 0.2, rng);
    const double nnz = static_cast<double>(a.nnz());
    auto s = split_train_test(a, 0.8, 11);
    // 3 sigma around 0.8 * nnz
    const double sigma = std::sqrt(nnz * 0.8 * 0.2);
    CHECK(s.train.nnz() >= Index(0.8 * nnz - 3 * sigma));
    CHECK(s.train.nnz() <= Index(0.8 * nnz + 3 * sigma));
}

TEST_CASE("split rejects degenerate fractions") {
    Rng rng(1);
    auto a = ts::random_binary(5, 5, 0.5, rng);
    CHECK_THROWS_AS(split_train_test(a, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_train_test(a, 1.0, 1), ConfigError);
}

TEST_CASE("dataset stats and csv") {
    auto ds = ts::random_dataset(10, 20, 5, 0.2, 0.1, 0.3, 53);
    auto s = dataset_stats(ds);
    CHECK(s.n_users == 10);
    CHECK(s.nnz_ub == ds.a_ub.nnz());
    CHECK(s.density_ub == doctest::Approx(double(ds.a_ub.nnz()) / (10.0 * 5.0)).epsilon(1e-12));
    auto csv = stats_to_csv(s);
    CHECK(csv.find("n_users,") == 0);
    CHECK(csv.find('\n') != std::string::npos);
}

TEST_CASE("remap compacts sparse ids preserving order") {
    ts::TempDir dir;
    write_text(dir.file("ub.txt"), "100 7\n5 7\n100 900\n");
    write_text(dir.file("ui.txt"), "5 40\n42 41\n");
    write_text(dir.file("bi.txt"), "7 40\n900 41\n");
    auto remap = remap_dataset_files(dir.file("ub.txt"), dir.file("ui.txt"), dir.file("bi.txt"),
                                     dir.file("ub2.txt"), dir.file("ui2.txt"),
                                     dir.file("bi2.txt"));
    CHECK(remap.users == std::vector<std::uint64_t>{5, 42, 100});
    CHECK(remap.items == std::vector<std::uint64_t>{40, 41});
    CHECK(remap.bundles == std::vector<std::uint64_t>{7, 900});

    auto ub = load_interaction_pairs(dir.file("ub2.txt"), 3, 2);
    CHECK(ub.value_at(2, 0) == 1.0);  // 100 -> 2, 7 -> 0
    CHECK(ub.value_at(0, 0) == 1.0);  // 5 -> 0
    CHECK(ub.value_at(2, 1) == 1.0);  // 900 -> 1
}

TEST_CASE("user subsample keeps exactly the touched entities") {
    auto ds = ts::planted_dataset(40, 24, 16, 4, 0.05, 59);
    auto sub = subsample_users(ds, 0.5, 61);

    CHECK(sub.n_users > 0);
    CHECK(sub.n_users < 40);
    // Every kept bundle has at least one interaction (it was touched).
    auto bu = transpose(sub.a_ub);
    for (Index b = 0; b < sub.n_bundles; ++b) CHECK(bu.row_cols(b).size() > 0);

    auto again = subsample_users(ds, 0.5, 61);
    CHECK(again.n_users == sub.n_users);
    CHECK(again.a_ub.col_indices() == sub.a_ub.col_indices());

    auto full = subsample_users(ds, 1.0, 61);
    CHECK(full.n_users == 40);
    CHECK(full.a_ub.col_indices() == ds.a_ub.col_indices());
    CHECK(full.a_ui.col_indices() == ds.a_ui.col_indices());
}

TEST_CASE("subsample rejects bad fractions") {
    auto ds = ts::random_dataset(5, 5, 5, 0.5, 0.5, 0.5, 1);
    CHECK_THROWS_AS(subsample_users(ds, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(subsample_users(ds, 1.5, 1), ConfigError);
}
