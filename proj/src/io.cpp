#include "hed/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hed/error.hpp"

namespace hed {

namespace {

constexpr char kGraphMagic[8] = {'H', 'E', 'D', 'H', 'G', '0', '0', '1'};
constexpr char kCheckpointMagic[8] = {'H', 'E', 'D', 'C', 'P', '0', '0', '1'};

void put_magic(std::ostream& out, const char (&magic)[8]) { out.write(magic, 8); }

void expect_magic(std::istream& in, const char (&magic)[8], const std::string& context) {
    char buf[8];
    in.read(buf, 8);
    if (in.gcount() != 8 || std::memcmp(buf, magic, 8) != 0)
        throw ConfigError(context + ": bad or missing file signature");
}

void expect_eof(std::istream& in, const std::string& context) {
    char c;
    if (in.read(&c, 1))
        throw ConfigError(context + ": trailing data after expected end of file");
}

std::ifstream open_binary_for_read(const std::filesystem::path& path,
                                   const std::string& context) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(context + ": cannot open " + path.string());
    return in;
}

}  // namespace

void put_u64(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in, const std::string& context) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (in.gcount() != 8) throw ConfigError(context + ": truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in, const std::string& context) {
    return std::bit_cast<double>(get_u64(in, context));
}

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp.string());
        try {
            writer(out);
        } catch (...) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw;
        }
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError("write failure on " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

void atomic_write_text(const std::filesystem::path& path, const std::string& text) {
    atomic_write(path, [&](std::ostream& out) { out.write(text.data(), text.size()); });
}

void write_hypergraph_cache(const std::filesystem::path& path, const CompleteHypergraph& hg,
                            const HypergraphCacheMeta& meta) {
    atomic_write(path, [&](std::ostream& out) {
        const auto& rg = hg.ranges();
        const auto& h = hg.h();
        put_magic(out, kGraphMagic);
        put_u64(out, rg.n_users);
        put_u64(out, rg.n_items);
        put_u64(out, rg.n_bundles);
        put_u64(out, hg.config().n_threshold);
        put_u64(out, hg.config().ii_mode == ItemBlockMode::identity ? 1 : 0);
        put_u64(out, meta.split_seed);
        put_f64(out, meta.train_fraction);
        put_u64(out, meta.nnz_ub);
        put_u64(out, meta.nnz_ui);
        put_u64(out, meta.nnz_bi);
        put_u64(out, h.nnz());
        for (Index v : h.row_offsets()) put_u64(out, v);
        for (Index v : h.col_indices()) put_u64(out, v);
        for (double v : h.values()) put_f64(out, v);
        for (double v : row_degrees(h)) put_f64(out, v);
        for (double v : col_degrees(h)) put_f64(out, v);
    });
}

HypergraphCache read_hypergraph_cache(const std::filesystem::path& path) {
    const std::string ctx = "hypergraph cache";
    auto in = open_binary_for_read(path, ctx);
    expect_magic(in, kGraphMagic, ctx);

    BlockRanges rg;
    rg.n_users = get_u64(in, ctx);
    rg.n_items = get_u64(in, ctx);
    rg.n_bundles = get_u64(in, ctx);
    HypergraphConfig config;
    config.n_threshold = get_u64(in, ctx);
    const std::uint64_t ii = get_u64(in, ctx);
    if (ii > 1) throw ConfigError(ctx + ": invalid item block mode");
    config.ii_mode = ii == 1 ? ItemBlockMode::identity : ItemBlockMode::zero;

    HypergraphCacheMeta meta;
    meta.split_seed = get_u64(in, ctx);
    meta.train_fraction = get_f64(in, ctx);
    meta.nnz_ub = get_u64(in, ctx);
    meta.nnz_ui = get_u64(in, ctx);
    meta.nnz_bi = get_u64(in, ctx);

    const Index n = rg.total();
    const std::uint64_t nnz = get_u64(in, ctx);
    std::vector<Index> offs(n + 1);
    for (auto& v : offs) v = get_u64(in, ctx);
    std::vector<Index> cols(nnz);
    for (auto& v : cols) v = get_u64(in, ctx);
    std::vector<double> vals(nnz);
    for (auto& v : vals) v = get_f64(in, ctx);

    CompleteHypergraph hg;
    try {
        auto h = std::make_shared<const SparseBinaryMatrix>(n, n, std::move(offs),
                                                            std::move(cols), std::move(vals));
        hg = CompleteHypergraph(std::move(h), rg, config);
    } catch (const Error& e) {
        throw ConfigError(ctx + ": corrupted structure: " + e.what());
    }

    auto dv = row_degrees(hg.h());
    auto de = col_degrees(hg.h());
    for (double expect : dv)
        if (get_f64(in, ctx) != expect)
            throw ConfigError(ctx + ": stored node degrees do not match structure");
    for (double expect : de)
        if (get_f64(in, ctx) != expect)
            throw ConfigError(ctx + ": stored edge degrees do not match structure");
    expect_eof(in, ctx);
    return {std::move(hg), meta};
}

void write_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    atomic_write(path, [&](std::ostream& out) {
        put_magic(out, kCheckpointMagic);
        put_u64(out, params.e_u.n_rows());
        put_u64(out, params.e_i.n_rows());
        put_u64(out, params.e_b.n_rows());
        put_u64(out, params.dim);
        put_u64(out, params.n_layers);
        put_f64(out, params.alpha);
        put_f64(out, params.beta);
        for (double v : params.e_u.data()) put_f64(out, v);
        for (double v : params.e_i.data()) put_f64(out, v);
        for (double v : params.e_b.data()) put_f64(out, v);
        for (double v : params.w) put_f64(out, v);
    });
}

ModelParams read_checkpoint(const std::filesystem::path& path) {
    const std::string ctx = "checkpoint";
    auto in = open_binary_for_read(path, ctx);
    expect_magic(in, kCheckpointMagic, ctx);
    const Index n_users = get_u64(in, ctx);
    const Index n_items = get_u64(in, ctx);
    const Index n_bundles = get_u64(in, ctx);
    const Index dim = get_u64(in, ctx);
    const Index n_layers = get_u64(in, ctx);
    if (dim == 0 || n_layers == 0) throw ConfigError(ctx + ": invalid dimensions");

    ModelParams p;
    p.dim = dim;
    p.n_layers = n_layers;
    p.alpha = get_f64(in, ctx);
    p.beta = get_f64(in, ctx);
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta))
        throw ConfigError(ctx + ": non-finite blend weights");
    p.e_u = DenseMatrix(n_users, dim);
    p.e_i = DenseMatrix(n_items, dim);
    p.e_b = DenseMatrix(n_bundles, dim);
    for (auto& v : p.e_u.data()) v = get_f64(in, ctx);
    for (auto& v : p.e_i.data()) v = get_f64(in, ctx);
    for (auto& v : p.e_b.data()) v = get_f64(in, ctx);
    p.w.resize(dim);
    for (auto& v : p.w) v = get_f64(in, ctx);
    expect_eof(in, ctx);
    return p;
}

std::string history_to_csv(const std::vector<EpochStats>& history) {
    std::ostringstream out;
    out.precision(10);
    out << "epoch,loss,recall@20,ndcg@20\n";
    for (const auto& s : history) {
        out << s.epoch << ',' << s.loss << ',';
        if (s.evaluated)
            out << s.recall << ',' << s.ndcg;
        else
            out << ',';
        out << '\n';
    }
    return out.str();
}

std::string metrics_to_csv(const MetricsReport& report,
                           const std::vector<std::string>& metadata) {
    std::ostringstream out;
    out.precision(10);
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "k,recall,ndcg\n";
    for (std::size_t i = 0; i < report.ks.size(); ++i)
        out << report.ks[i] << ',' << report.recall[i] << ',' << report.ndcg[i] << '\n';
    return out.str();
}

}  // namespace hed
