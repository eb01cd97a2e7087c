#include "hed/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "hed/error.hpp"
#include "hed/rng.hpp"

namespace hed {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::uint64_t parse_u64_value(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config: " + std::string(key) + " expects a nonnegative integer, got \"" +
                          std::string(v) + "\"");
    return out;
}

double parse_f64_value(std::string_view key, std::string_view v) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw ConfigError("config: " + std::string(key) + " expects a number, got \"" +
                          std::string(v) + "\"");
    return out;
}

bool parse_bool_value(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("config: " + std::string(key) + " expects true/false, got \"" +
                      std::string(v) + "\"");
}

std::vector<Index> parse_ks_value(std::string_view v) {
    std::vector<Index> ks;
    std::size_t start = 0;
    while (start <= v.size()) {
        std::size_t comma = v.find(',', start);
        std::string_view tok = trim(v.substr(start, comma == std::string_view::npos
                                                        ? std::string_view::npos
                                                        : comma - start));
        if (!tok.empty()) ks.push_back(parse_u64_value("ks", tok));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (ks.empty()) throw ConfigError("config: ks expects a comma-separated list of integers");
    return ks;
}

}  // namespace

void apply_override(RunConfig& c, std::string_view key, std::string_view value) {
    key = trim(key);
    value = trim(value);
    if (key == "user_bundle_path") c.user_bundle_path = value;
    else if (key == "user_item_path") c.user_item_path = value;
    else if (key == "bundle_item_path") c.bundle_item_path = value;
    else if (key == "n_users") c.n_users = parse_u64_value(key, value);
    else if (key == "n_items") c.n_items = parse_u64_value(key, value);
    else if (key == "n_bundles") c.n_bundles = parse_u64_value(key, value);
    else if (key == "train_fraction") c.train_fraction = parse_f64_value(key, value);
    else if (key == "n") c.hypergraph.n_threshold = parse_u64_value(key, value);
    else if (key == "ii_mode") {
        if (value == "zero") c.hypergraph.ii_mode = ItemBlockMode::zero;
        else if (value == "identity") c.hypergraph.ii_mode = ItemBlockMode::identity;
        else throw ConfigError("config: ii_mode expects zero|identity");
    }
    else if (key == "embedding_size") {
        c.hyper.dim = parse_u64_value(key, value);
        if (c.hyper.dim == 0) throw ConfigError("config: embedding_size must be positive");
    }
    else if (key == "layers") {
        c.hyper.n_layers = parse_u64_value(key, value);
        if (c.hyper.n_layers == 0) throw ConfigError("config: layers must be positive");
    }
    else if (key == "alpha") c.hyper.alpha = parse_f64_value(key, value);
    else if (key == "beta") c.hyper.beta = parse_f64_value(key, value);
    else if (key == "layer_scheme") {
        if (value == "literal") c.train.layer_scheme = LayerScheme::literal;
        else if (value == "depth_l") c.train.layer_scheme = LayerScheme::depth_l;
        else throw ConfigError("config: layer_scheme expects literal|depth_l");
    }
    else if (key == "epochs") c.train.epochs = parse_u64_value(key, value);
    else if (key == "batch_size") {
        c.train.batch_size = parse_u64_value(key, value);
        if (c.train.batch_size == 0) throw ConfigError("config: batch_size must be positive");
    }
    else if (key == "learning_rate") c.train.learning_rate = parse_f64_value(key, value);
    else if (key == "l2_norm") c.train.weight_decay = parse_f64_value(key, value);
    else if (key == "hypergraph_dropout") c.train.hypergraph_dropout = parse_f64_value(key, value);
    else if (key == "ub_dropout") c.train.ub_dropout = parse_f64_value(key, value);
    else if (key == "negatives_per_positive")
        c.train.negatives_per_positive = parse_u64_value(key, value);
    else if (key == "seed") c.train.seed = parse_u64_value(key, value);
    else if (key == "eval_every") c.train.eval_every = parse_u64_value(key, value);
    else if (key == "ks") c.ks = parse_ks_value(value);
    else if (key == "out_dir") c.out_dir = value;
    else if (key == "use_cache") c.use_cache = parse_bool_value(key, value);
    else throw ConfigError("config: unknown key \"" + std::string(key) + "\"");
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    RunConfig c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::size_t eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key=value, got \"" + std::string(sv) + "\"");
        try {
            apply_override(c, sv.substr(0, eq), sv.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (in.bad()) throw IoError("read failure on " + path.string());
    return c;
}

AblationFlags parse_ablation(std::string_view spec) {
    AblationFlags flags;
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t comma = spec.find(',', start);
        std::string_view tok = trim(spec.substr(
            start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!tok.empty()) {
            if (tok == "none") {
            } else if (tok == "hed-c" || tok == "ub") {
                flags.disable_ub_conv = true;
            } else if (tok == "uu") {
                flags.zero_h_uu = true;
            } else if (tok == "bb") {
                flags.zero_h_bb = true;
            } else if (tok == "ii" || tok == "ii-identity") {
                flags.ii_identity = true;
            } else {
                throw ConfigError("unknown ablation token \"" + std::string(tok) +
                                  "\" (expected none, hed-c|ub, uu, bb, ii)");
            }
        }
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return flags;
}

std::string ablation_to_string(const AblationFlags& f) {
    std::string s;
    auto append = [&](const char* tok) {
        if (!s.empty()) s += ',';
        s += tok;
    };
    if (f.disable_ub_conv) append("ub");
    if (f.zero_h_uu) append("uu");
    if (f.zero_h_bb) append("bb");
    if (f.ii_identity) append("ii");
    return s.empty() ? "none" : s;
}

// out_dir is deliberately excluded: where results land does not change what
// was computed.
std::string canonical_config_text(const RunConfig& c) {
    std::ostringstream out;
    out.precision(17);
    out << "ablation=" << ablation_to_string(c.ablation) << '\n';
    out << "alpha=" << c.hyper.alpha << '\n';
    out << "batch_size=" << c.train.batch_size << '\n';
    out << "beta=" << c.hyper.beta << '\n';
    out << "bundle_item_path=" << c.bundle_item_path << '\n';
    out << "embedding_size=" << c.hyper.dim << '\n';
    out << "epochs=" << c.train.epochs << '\n';
    out << "eval_every=" << c.train.eval_every << '\n';
    out << "hypergraph_dropout=" << c.train.hypergraph_dropout << '\n';
    out << "ii_mode=" << (c.hypergraph.ii_mode == ItemBlockMode::identity ? "identity" : "zero")
        << '\n';
    out << "ks=";
    for (std::size_t i = 0; i < c.ks.size(); ++i) out << (i ? "," : "") << c.ks[i];
    out << '\n';
    out << "l2_norm=" << c.train.weight_decay << '\n';
    out << "layer_scheme="
        << (c.train.layer_scheme == LayerScheme::literal ? "literal" : "depth_l") << '\n';
    out << "layers=" << c.hyper.n_layers << '\n';
    out << "learning_rate=" << c.train.learning_rate << '\n';
    out << "n=" << c.hypergraph.n_threshold << '\n';
    out << "n_bundles=" << c.n_bundles << '\n';
    out << "n_items=" << c.n_items << '\n';
    out << "n_users=" << c.n_users << '\n';
    out << "negatives_per_positive=" << c.train.negatives_per_positive << '\n';
    out << "seed=" << c.train.seed << '\n';
    out << "train_fraction=" << c.train_fraction << '\n';
    out << "ub_dropout=" << c.train.ub_dropout << '\n';
    out << "use_cache=" << (c.use_cache ? "true" : "false") << '\n';
    out << "user_bundle_path=" << c.user_bundle_path << '\n';
    out << "user_item_path=" << c.user_item_path << '\n';
    return out.str();
}

std::string config_hash_hex(const RunConfig& c) {
    std::uint64_t h = hash_str64(canonical_config_text(c));
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

}  // namespace hed
