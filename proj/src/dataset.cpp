#include "hed/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "hed/error.hpp"
#include "hed/rng.hpp"

namespace hed {

namespace {

bool parse_u64(std::string_view tok, std::uint64_t& out) {
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && p == tok.data() + tok.size();
}

// Splits a line into whitespace-separated tokens.
std::vector<std::string_view> tokens_of(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) toks.push_back(line.substr(i, j - i));
        i = j;
    }
    return toks;
}

std::vector<std::pair<std::uint64_t, std::uint64_t>> read_pairs_impl(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open interaction file: " + path.string());
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokens_of(line);
        if (toks.empty() || toks[0].starts_with('#')) continue;
        std::uint64_t a = 0, b = 0;
        if (toks.size() != 2 || !parse_u64(toks[0], a) || !parse_u64(toks[1], b))
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected two nonnegative integers, got \"" + line + "\"");
        pairs.emplace_back(a, b);
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return pairs;
}

}  // namespace

std::vector<std::pair<std::uint64_t, std::uint64_t>> read_pair_file(
    const std::filesystem::path& path) {
    return read_pairs_impl(path);
}

SparseBinaryMatrix load_interaction_pairs(const std::filesystem::path& path, Index n_rows,
                                          Index n_cols) {
    auto pairs = read_pairs_impl(path);
    std::vector<CooEntry> entries;
    entries.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        auto [a, b] = pairs[i];
        if (a >= n_rows || b >= n_cols)
            throw ConfigError(path.string() + ": pair " + std::to_string(i + 1) + " (" +
                              std::to_string(a) + ", " + std::to_string(b) +
                              ") exceeds bounds " + std::to_string(n_rows) + "x" +
                              std::to_string(n_cols));
        entries.push_back({static_cast<Index>(a), static_cast<Index>(b), 1.0});
    }
    // Repeated interactions collapse to a single binary entry.
    auto m = from_coo(entries, n_rows, n_cols);
    std::vector<double> ones(m.nnz(), 1.0);
    return SparseBinaryMatrix(m.n_rows(), m.n_cols(), m.row_offsets(), m.col_indices(),
                              std::move(ones));
}

void write_interaction_pairs(const std::filesystem::path& path, const SparseBinaryMatrix& m) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (Index r = 0; r < m.n_rows(); ++r)
        for (Index c : m.row_cols(r)) out << r << '\t' << c << '\n';
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

InteractionDataset load_dataset(const std::filesystem::path& user_bundle,
                                const std::filesystem::path& user_item,
                                const std::filesystem::path& bundle_item, Index n_users,
                                Index n_items, Index n_bundles) {
    InteractionDataset ds;
    ds.n_users = n_users;
    ds.n_items = n_items;
    ds.n_bundles = n_bundles;
    ds.a_ub = load_interaction_pairs(user_bundle, n_users, n_bundles);
    ds.a_ui = load_interaction_pairs(user_item, n_users, n_items);
    ds.a_bi = load_interaction_pairs(bundle_item, n_bundles, n_items);
    return ds;
}

Split split_train_test(const SparseBinaryMatrix& a_ub, double train_fraction,
                       std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0, 1)");
    Rng rng = Rng::stream(seed, "split");
    std::vector<CooEntry> train, test;
    for (Index r = 0; r < a_ub.n_rows(); ++r) {
        for (Index c : a_ub.row_cols(r)) {
            if (rng.uniform() < train_fraction)
                train.push_back({r, c, 1.0});
            else
                test.push_back({r, c, 1.0});
        }
    }
    Split s;
    s.train = from_coo(train, a_ub.n_rows(), a_ub.n_cols());
    s.test = from_coo(test, a_ub.n_rows(), a_ub.n_cols());
    s.seed = seed;
    s.train_fraction = train_fraction;
    return s;
}

DatasetStats dataset_stats(const InteractionDataset& ds) {
    DatasetStats s;
    s.n_users = ds.n_users;
    s.n_items = ds.n_items;
    s.n_bundles = ds.n_bundles;
    s.nnz_ub = ds.a_ub.nnz();
    s.nnz_ui = ds.a_ui.nnz();
    s.nnz_bi = ds.a_bi.nnz();
    auto density = [](Index nnz, Index r, Index c) {
        return r == 0 || c == 0 ? 0.0
                                : static_cast<double>(nnz) /
                                      (static_cast<double>(r) * static_cast<double>(c));
    };
    s.density_ub = density(s.nnz_ub, s.n_users, s.n_bundles);
    s.density_ui = density(s.nnz_ui, s.n_users, s.n_items);
    s.density_bi = density(s.nnz_bi, s.n_bundles, s.n_items);
    return s;
}

std::string stats_to_csv(const DatasetStats& s) {
    std::ostringstream out;
    out << "n_users,n_items,n_bundles,nnz_ub,nnz_ui,nnz_bi,density_ub,density_ui,density_bi\n";
    out.precision(10);
    out << s.n_users << ',' << s.n_items << ',' << s.n_bundles << ',' << s.nnz_ub << ','
        << s.nnz_ui << ',' << s.nnz_bi << ',' << s.density_ub << ',' << s.density_ui << ','
        << s.density_bi << '\n';
    return out.str();
}

namespace {

std::vector<std::uint64_t> sorted_unique(std::vector<std::uint64_t> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

Index mapped_of(const std::vector<std::uint64_t>& table, std::uint64_t original) {
    auto it = std::lower_bound(table.begin(), table.end(), original);
    return static_cast<Index>(it - table.begin());
}

void write_mapped_pairs(const std::filesystem::path& path,
                        const std::vector<std::pair<std::uint64_t, std::uint64_t>>& pairs,
                        const std::vector<std::uint64_t>& row_map,
                        const std::vector<std::uint64_t>& col_map) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    for (auto [a, b] : pairs)
        out << mapped_of(row_map, a) << '\t' << mapped_of(col_map, b) << '\n';
    out.flush();
    if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace

DatasetRemap remap_dataset_files(const std::filesystem::path& in_ub,
                                 const std::filesystem::path& in_ui,
                                 const std::filesystem::path& in_bi,
                                 const std::filesystem::path& out_ub,
                                 const std::filesystem::path& out_ui,
                                 const std::filesystem::path& out_bi) {
    auto ub = read_pairs_impl(in_ub);
    auto ui = read_pairs_impl(in_ui);
    auto bi = read_pairs_impl(in_bi);

    std::vector<std::uint64_t> users, items, bundles;
    for (auto [u, b] : ub) {
        users.push_back(u);
        bundles.push_back(b);
    }
    for (auto [u, i] : ui) {
        users.push_back(u);
        items.push_back(i);
    }
    for (auto [b, i] : bi) {
        bundles.push_back(b);
        items.push_back(i);
    }
    DatasetRemap remap;
    remap.users = sorted_unique(std::move(users));
    remap.items = sorted_unique(std::move(items));
    remap.bundles = sorted_unique(std::move(bundles));

    write_mapped_pairs(out_ub, ub, remap.users, remap.bundles);
    write_mapped_pairs(out_ui, ui, remap.users, remap.items);
    write_mapped_pairs(out_bi, bi, remap.bundles, remap.items);
    return remap;
}

InteractionDataset subsample_users(const InteractionDataset& ds, double user_fraction,
                                   std::uint64_t seed) {
    if (!(user_fraction > 0.0 && user_fraction <= 1.0))
        throw ConfigError("user_fraction must be in (0, 1]");
    Rng rng = Rng::stream(seed, "subsample");
    std::vector<bool> keep_user(ds.n_users, false);
    for (Index u = 0; u < ds.n_users; ++u) keep_user[u] = rng.uniform() < user_fraction;

    std::vector<bool> keep_bundle(ds.n_bundles, false);
    for (Index u = 0; u < ds.n_users; ++u)
        if (keep_user[u])
            for (Index b : ds.a_ub.row_cols(u)) keep_bundle[b] = true;

    std::vector<bool> keep_item(ds.n_items, false);
    for (Index u = 0; u < ds.n_users; ++u)
        if (keep_user[u])
            for (Index i : ds.a_ui.row_cols(u)) keep_item[i] = true;
    for (Index b = 0; b < ds.n_bundles; ++b)
        if (keep_bundle[b])
            for (Index i : ds.a_bi.row_cols(b)) keep_item[i] = true;

    auto build_map = [](const std::vector<bool>& keep) {
        std::vector<Index> map(keep.size(), 0);
        Index next = 0;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (keep[i]) map[i] = next++;
        return std::pair{map, next};
    };
    auto [user_map, nu] = build_map(keep_user);
    auto [bundle_map, nb] = build_map(keep_bundle);
    auto [item_map, ni] = build_map(keep_item);

    auto induced = [&](const SparseBinaryMatrix& m, const std::vector<bool>& keep_r,
                       const std::vector<Index>& map_r, Index out_rows,
                       const std::vector<bool>& keep_c, const std::vector<Index>& map_c,
                       Index out_cols) {
        std::vector<CooEntry> entries;
        for (Index r = 0; r < m.n_rows(); ++r) {
            if (!keep_r[r]) continue;
            for (Index c : m.row_cols(r))
                if (keep_c[c]) entries.push_back({map_r[r], map_c[c], 1.0});
        }
        return from_coo(entries, out_rows, out_cols);
    };

    InteractionDataset out;
    out.n_users = nu;
    out.n_items = ni;
    out.n_bundles = nb;
    out.a_ub = induced(ds.a_ub, keep_user, user_map, nu, keep_bundle, bundle_map, nb);
    out.a_ui = induced(ds.a_ui, keep_user, user_map, nu, keep_item, item_map, ni);
    out.a_bi = induced(ds.a_bi, keep_bundle, bundle_map, nb, keep_item, item_map, ni);
    return out;
}

}  // namespace hed
