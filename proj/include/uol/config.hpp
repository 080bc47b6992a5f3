#pragma once
// Experiment configuration: plain `key = value` lines, `#` comments, and
// optional `[section]` headers that prefix the keys below them with
// `section.`. Example:
//
//   process = coin-mixture:0.1,0.9
//   outcome = binary
//   comparator = best-member:16
//   horizon = 100000
//   seeds = 20
//   [expert]
//   dimension = 1
//   max_tier = 4
//   [checks]
//   consistency = true

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uol/epoch_hedge.hpp"
#include "uol/errors.hpp"
#include "uol/expert_family.hpp"
#include "uol/loss_space.hpp"
#include "uol/process_lab.hpp"

namespace uol {

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t from = 0;
    while (true) {
        const auto at = s.find(sep, from);
        out.push_back(trim(s.substr(from, at == std::string_view::npos ? std::string_view::npos : at - from)));
        if (at == std::string_view::npos) break;
        from = at + 1;
    }
    return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

}  // namespace detail

inline KeyValues parse_key_values(std::istream& in) {
    KeyValues kv;
    std::string section;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '[') {
            if (text.back() != ']') throw config_error("line " + std::to_string(lineno), "unterminated section");
            section = detail::trim(std::string_view(text).substr(1, text.size() - 2));
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) throw config_error("line " + std::to_string(lineno), "expected key = value");
        std::string key = detail::trim(std::string_view(text).substr(0, eq));
        if (!section.empty()) key = section + "." + key;
        kv[key] = detail::trim(std::string_view(text).substr(eq + 1));
    }
    return kv;
}

inline KeyValues load_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read config " + path.string());
    return parse_key_values(in);
}

inline double parse_real(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw config_error(key, "expected a number, got '" + text + "'");
    return v;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        if (!text.empty() && text.front() == '-') throw std::invalid_argument("negative");
        v = std::stoull(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw config_error(key, "expected a nonnegative integer, got '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw config_error(key, "expected a boolean, got '" + text + "'");
}

inline std::vector<double> parse_reals(const std::string& key, const std::string& text) {
    std::vector<double> out;
    for (const auto& part : detail::split(text, ',')) out.push_back(parse_real(key, part));
    return out;
}

/// Whitespace-separated square matrix, one row per line; `#` starts a comment.
inline Matrix load_matrix(const std::string& key, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error(key, "cannot read matrix file " + path.string());
    Matrix m;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::vector<double> values;
        double v = 0.0;
        while (row >> v) values.push_back(v);
        if (!row.eof()) throw config_error(key, "non-numeric entry in " + path.string());
        if (!values.empty()) m.push_back(std::move(values));
    }
    return m;
}

/// threshold:<c> | constant:<v> | coin:<p>
inline ResponseRule parse_response_rule(const std::string& key, const std::string& text) {
    if (detail::starts_with(text, "threshold:")) return ThresholdRule{parse_real(key, text.substr(10))};
    if (detail::starts_with(text, "constant:")) return ConstantRule{{parse_real(key, text.substr(9))}};
    if (detail::starts_with(text, "coin:")) return CoinRule{parse_real(key, text.substr(5))};
    throw config_error(key, "unknown response rule '" + text + "'");
}

/// iid-uniform | iid-point:<coords> | markov:<file> | coin-mixture:<p1,p2,...>
/// | drift | ryabko:<file> | adversarial:<alternate|anti-majority|flip-last>.
/// Optional keys: process.y_rule, process.noise, process.weights.
inline ProcessSpec parse_process(const KeyValues& kv, std::size_t dimension, const std::filesystem::path& base) {
    const auto it = kv.find("process");
    if (it == kv.end()) throw config_error("process", "missing");
    const std::string& text = it->second;

    ResponseRule rule = ThresholdRule{0.5};
    if (auto r = kv.find("process.y_rule"); r != kv.end()) rule = parse_response_rule("process.y_rule", r->second);

    ProcessSpec spec;
    spec.dimension = dimension;
    if (auto n = kv.find("process.noise"); n != kv.end()) spec.noise = parse_real("process.noise", n->second);

    auto resolve = [&](const std::string& file) {
        std::filesystem::path p(file);
        return p.is_absolute() ? p : base / p;
    };

    if (text == "iid-uniform") {
        spec.kind = IidSpec{UniformCube{}, rule};
    } else if (detail::starts_with(text, "iid-point:")) {
        spec.kind = IidSpec{PointMass{parse_reals("process", text.substr(10))}, rule};
    } else if (detail::starts_with(text, "markov:")) {
        spec.kind = MarkovSpec{load_matrix("process", resolve(text.substr(7))), rule};
    } else if (detail::starts_with(text, "coin-mixture:")) {
        const auto biases = parse_reals("process", text.substr(13));
        MixtureSpec mix;
        for (double p : biases) {
            ProcessSpec c;
            c.dimension = dimension;
            c.kind = IidSpec{UniformCube{}, CoinRule{p}};
            mix.components.push_back(c);
        }
        mix.weights.assign(biases.size(), 1.0 / static_cast<double>(biases.size()));
        if (auto w = kv.find("process.weights"); w != kv.end()) mix.weights = parse_reals("process.weights", w->second);
        spec.kind = std::move(mix);
    } else if (text == "drift") {
        spec.kind = DriftSpec{};
        spec.dimension = 1;
    } else if (detail::starts_with(text, "ryabko:")) {
        spec.kind = RyabkoSpec{load_matrix("process", resolve(text.substr(7)))};
    } else if (detail::starts_with(text, "adversarial:")) {
        const std::string name = text.substr(12);
        AdversarialRule r;
        if (name == "alternate") {
            r = AdversarialRule::alternate;
        } else if (name == "anti-majority") {
            r = AdversarialRule::anti_majority;
        } else if (name == "flip-last") {
            r = AdversarialRule::flip_last;
        } else {
            throw config_error("process", "unknown adversarial rule '" + name + "'");
        }
        spec.kind = AdversarialSpec{UniformCube{}, r};
    } else {
        throw config_error("process", "unknown process kind '" + text + "'");
    }
    return spec;
}

/// Comparator f0 against which excess loss is measured.
struct ComparatorSpec {
    enum class Kind { member, threshold, custom_table, best_member } kind{Kind::member};
    std::size_t index{1};       // member, or the candidate count M for best_member
    double cut{0.5};            // threshold
    std::vector<Outcome> table; // custom_table cell values
    std::string text{"member:1"};
};

/// member:<i> | threshold:<c> | custom-table:<v0,...> | best-member:<M>
inline ComparatorSpec parse_comparator(const std::string& text) {
    ComparatorSpec c;
    c.text = text;
    if (detail::starts_with(text, "member:")) {
        c.kind = ComparatorSpec::Kind::member;
        c.index = parse_count("comparator", text.substr(7));
        if (c.index < 1) throw config_error("comparator", "member indices start at 1");
    } else if (detail::starts_with(text, "threshold:")) {
        c.kind = ComparatorSpec::Kind::threshold;
        c.cut = parse_real("comparator", text.substr(10));
    } else if (detail::starts_with(text, "custom-table:")) {
        c.kind = ComparatorSpec::Kind::custom_table;
        for (double v : parse_reals("comparator", text.substr(13))) c.table.push_back({v});
    } else if (detail::starts_with(text, "best-member:")) {
        c.kind = ComparatorSpec::Kind::best_member;
        c.index = parse_count("comparator", text.substr(12));
        if (c.index < 1) throw config_error("comparator", "best-member needs at least one candidate");
    } else {
        throw config_error("comparator", "unknown comparator '" + text + "'");
    }
    return c;
}

/// Resolution m with 2^(m d) == cells, if any.
inline std::optional<int> table_resolution(std::size_t cells, std::size_t dimension) {
    for (int m = 0; m < 31; ++m) {
        const std::size_t bits = static_cast<std::size_t>(m) * dimension;
        if (bits >= 62) break;
        if ((std::size_t{1} << bits) == cells) return m;
    }
    return std::nullopt;
}

struct CheckToggles {
    bool lemma31{false};
    bool corollary32{false};
    bool consistency{true};
    bool condition1{false};
    bool density{false};
};

struct ExperimentConfig {
    std::string process_text{"iid-uniform"};
    ProcessSpec process;
    OutcomeSpace outcome{OutcomeSpace::binary()};
    ExpertSpaceConfig expert;
    ComparatorSpec comparator;
    std::size_t horizon{1000};
    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir{"out"};
    bool write_sequences{false};
    std::size_t workers{0};  // 0: one per hardware thread

    CheckToggles checks;

    double consistency_threshold{0.05};
    double consistency_quorum{0.9};

    std::size_t corollary32_n_hat{1000};
    std::size_t corollary32_from{1000};

    std::string condition1_sets{"intervals"};
    std::size_t condition1_count{10};
    double condition1_threshold{0.15};

    std::vector<std::size_t> density_m_grid;
    double density_threshold{0.01};

    std::size_t hedge_n{100};
    std::size_t hedge_experts{10};
    double hedge_delta{0.1};
    std::size_t hedge_trials{2000};
};

/// Command-line values that override the config file.
struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> seeds;
    std::optional<std::size_t> horizon;
    std::optional<std::filesystem::path> out_dir;
};

namespace detail {

inline std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(base + i);
    return out;
}

}  // namespace detail

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "process", "process.y_rule", "process.noise", "process.weights", "outcome", "comparator",
        "horizon", "seed", "seeds", "seed_list", "output", "output.sequences", "workers",
        "expert.dimension", "expert.max_tier",
        "checks.lemma31", "checks.corollary32", "checks.consistency", "checks.condition1", "checks.density",
        "consistency.threshold", "consistency.quorum", "corollary32.n_hat", "corollary32.from",
        "condition1.sets", "condition1.count", "condition1.threshold", "density.m_grid", "density.threshold",
        "hedge.n", "hedge.experts", "hedge.delta", "hedge.trials"};
    return keys;
}

/// Builds and validates a config; errors name the offending key.
inline ExperimentConfig make_config(const KeyValues& kv, const ConfigOverrides& over = {},
                                    const std::filesystem::path& base = ".") {
    for (const auto& [key, value] : kv) {
        if (!known_keys().count(key)) throw config_error(key, "unknown key");
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        if (auto it = kv.find(key); it != kv.end()) return it->second;
        return std::nullopt;
    };

    ExperimentConfig c;
    if (auto v = get("outcome")) c.outcome = parse_outcome_space(*v);
    c.expert.space = c.outcome;
    if (auto v = get("expert.dimension")) c.expert.dimension = parse_count("expert.dimension", *v);
    if (c.expert.dimension < 1) throw config_error("expert.dimension", "must be at least 1");
    if (auto v = get("expert.max_tier")) c.expert.max_tier = static_cast<int>(parse_count("expert.max_tier", *v));

    if (auto v = get("process")) c.process_text = *v;
    KeyValues with_process = kv;
    with_process["process"] = c.process_text;
    c.process = parse_process(with_process, c.expert.dimension, base);
    try {
        validate(c.process, c.outcome);
    } catch (const domain_error& e) {
        throw config_error("process", e.what());
    }

    if (auto v = get("comparator")) c.comparator = parse_comparator(*v);
    if (c.comparator.kind == ComparatorSpec::Kind::custom_table) {
        if (!table_resolution(c.comparator.table.size(), c.expert.dimension)) {
            throw config_error("comparator", "custom table needs 2^(m d) cell values");
        }
        for (auto y : c.comparator.table) {
            if (!c.outcome.contains(y)) throw config_error("comparator", "table value outside the outcome space");
        }
    }
    if (c.comparator.kind == ComparatorSpec::Kind::threshold && c.outcome.finite() && c.outcome.label_count() < 2) {
        throw config_error("comparator", "threshold comparator needs two labels");
    }

    if (auto v = get("horizon")) c.horizon = parse_count("horizon", *v);
    if (over.horizon) c.horizon = *over.horizon;
    if (c.horizon < 1) throw config_error("horizon", "must be at least 1");

    std::uint64_t base_seed = 1;
    std::size_t seed_count = 1;
    if (auto v = get("seed")) base_seed = parse_count("seed", *v);
    if (auto v = get("seeds")) seed_count = parse_count("seeds", *v);
    if (over.seed) base_seed = *over.seed;
    if (over.seeds) seed_count = *over.seeds;
    c.seeds = detail::seed_range(base_seed, seed_count);
    if (auto v = get("seed_list"); v && !over.seed && !over.seeds) {
        c.seeds.clear();
        for (const auto& part : detail::split(*v, ',')) c.seeds.push_back(parse_count("seed_list", part));
    }
    if (c.seeds.empty()) throw config_error("seeds", "seed list is empty");

    if (auto v = get("output")) c.out_dir = *v;
    if (over.out_dir) c.out_dir = *over.out_dir;
    if (auto v = get("output.sequences")) c.write_sequences = parse_bool("output.sequences", *v);
    if (auto v = get("workers")) c.workers = parse_count("workers", *v);

    if (auto v = get("checks.lemma31")) c.checks.lemma31 = parse_bool("checks.lemma31", *v);
    if (auto v = get("checks.corollary32")) c.checks.corollary32 = parse_bool("checks.corollary32", *v);
    if (auto v = get("checks.consistency")) c.checks.consistency = parse_bool("checks.consistency", *v);
    if (auto v = get("checks.condition1")) c.checks.condition1 = parse_bool("checks.condition1", *v);
    if (auto v = get("checks.density")) c.checks.density = parse_bool("checks.density", *v);

    if (auto v = get("consistency.threshold")) c.consistency_threshold = parse_real("consistency.threshold", *v);
    if (auto v = get("consistency.quorum")) c.consistency_quorum = parse_real("consistency.quorum", *v);
    if (auto v = get("corollary32.n_hat")) c.corollary32_n_hat = parse_count("corollary32.n_hat", *v);
    if (auto v = get("corollary32.from")) c.corollary32_from = parse_count("corollary32.from", *v);
    if (auto v = get("condition1.sets")) c.condition1_sets = *v;
    if (c.condition1_sets != "intervals" && c.condition1_sets != "tails" && c.condition1_sets != "empty") {
        throw config_error("condition1.sets", "expected intervals | tails | empty");
    }
    if (auto v = get("condition1.count")) c.condition1_count = parse_count("condition1.count", *v);
    if (c.condition1_count < 1) throw config_error("condition1.count", "must be at least 1");
    if (auto v = get("condition1.threshold")) c.condition1_threshold = parse_real("condition1.threshold", *v);
    if (auto v = get("density.m_grid")) {
        for (const auto& part : detail::split(*v, ',')) c.density_m_grid.push_back(parse_count("density.m_grid", part));
        if (!std::is_sorted(c.density_m_grid.begin(), c.density_m_grid.end()) || c.density_m_grid.front() < 1) {
            throw config_error("density.m_grid", "must be ascending positive integers");
        }
    }
    if (auto v = get("density.threshold")) c.density_threshold = parse_real("density.threshold", *v);

    if (auto v = get("hedge.n")) c.hedge_n = parse_count("hedge.n", *v);
    if (auto v = get("hedge.experts")) c.hedge_experts = parse_count("hedge.experts", *v);
    if (auto v = get("hedge.delta")) c.hedge_delta = parse_real("hedge.delta", *v);
    if (auto v = get("hedge.trials")) c.hedge_trials = parse_count("hedge.trials", *v);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& over = {}) {
    return make_config(load_key_values(path), over, path.parent_path());
}

}  // namespace uol
