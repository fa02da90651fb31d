#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "minrec/common.hpp"
#include "minrec/minimize.hpp"

namespace minrec {

// Flat `key = value` text with '#' comments: the config format and the run
// manifest format are the same thing.
class KvFile {
public:
    KvFile() = default;

    static KvFile parse(const std::string& text, const std::string& origin) {
        KvFile kv;
        std::size_t start = 0, lineno = 0;
        while (start <= text.size()) {
            ++lineno;
            std::size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::string line = text.substr(start, end - start);
            start = end + 1;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            trim(key);
            trim(value);
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            kv.set(key, value);
        }
        return kv;
    }

    static KvFile load(const std::string& path) { return parse(read_file(path), path); }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::string& get(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

    std::string serialize() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
        return out;
    }

    void save(const std::string& path) const { write_file(path, serialize()); }

private:
    static void trim(std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
        while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
        s = s.substr(b, e - b);
    }

    std::map<std::string, std::string> values_;
};

namespace detail {

inline std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t pos = s.find(',', start);
        if (pos == std::string::npos) pos = s.size();
        std::string tok = s.substr(start, pos - start);
        while (!tok.empty() && tok.front() == ' ') tok.erase(0, 1);
        while (!tok.empty() && tok.back() == ' ') tok.pop_back();
        if (!tok.empty()) out.push_back(tok);
        start = pos + 1;
    }
    return out;
}

inline double to_double(const std::string& s, const std::string& key) {
    double v;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("key '" + key + "': bad number '" + s + "'");
    return v;
}

inline long to_long(const std::string& s, const std::string& key) {
    long v;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("key '" + key + "': bad integer '" + s + "'");
    return v;
}

}  // namespace detail

struct RunConfig {
    // data + preprocessing
    std::string data_path;
    std::string col_user = "user", col_item = "item", col_value = "value";
    double positive_threshold = 1.0;
    int min_user_interactions = 5;
    int min_item_interactions = 1;

    // splitting
    int n_val_rec_users = 0;
    int n_val_est_users = 0;
    int n_test_users = 0;
    double fold_in_ratio = 0.8;

    // model
    std::string model_kind = "ease";
    std::vector<double> lambda_grid{1.0, 10.0, 100.0, 1000.0};
    std::vector<int> k_grid{50, 100, 200};

    // ground-truth estimator
    std::vector<int> estimator_k_grid{50, 100, 200, 500, 1000};
    std::vector<double> estimator_gamma_grid{-2.0, -1.0, -0.5, 0.5, 1.0, 2.0};
    int estimator_n_probes = 20;

    // minimization
    std::vector<MinimizerKind> minimizers{MinimizerKind::Rs,  MinimizerKind::Lp,   MinimizerKind::Mp,
                                          MinimizerKind::EmbSim, MinimizerKind::Gfs, MinimizerKind::Gbfs,
                                          MinimizerKind::Gr};
    int beam_width = 5;
    std::vector<double> etas{0.98, 1.0};

    // metric + evaluation
    int metric_cutoff = 100;
    std::vector<int> recall_cutoffs{20, 50};
    int strata_bins = 5;
    double strata_percentile_cap = 95.0;

    // run
    std::string out_dir;
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = hardware concurrency

    static RunConfig from_kv(const KvFile& kv);
    static RunConfig from_file(const std::string& path) { return from_kv(KvFile::load(path)); }

    // `out` and `workers` are runtime knobs that cannot affect any artifact
    // byte; to_kv(false) drops them so the config hash and the manifest echo
    // are stable across output locations and worker counts.
    KvFile to_kv(bool include_runtime = true) const;
    std::string config_hash() const { return to_hex(fnv1a64(to_kv(false).serialize())); }
    void validate() const;
};

inline RunConfig RunConfig::from_kv(const KvFile& kv) {
    static const std::vector<std::string> known = {
        "data.path",           "data.col_user",          "data.col_item",
        "data.col_value",      "prep.positive_threshold", "prep.min_user_interactions",
        "prep.min_item_interactions", "split.n_val_rec_users", "split.n_val_est_users",
        "split.n_test_users",  "split.fold_in_ratio",    "model.kind",
        "model.lambda_grid",   "model.k_grid",           "estimator.k_grid",
        "estimator.gamma_grid", "estimator.n_probes",    "minimize.algorithms",
        "minimize.beam_width", "minimize.etas",          "metric.cutoff",
        "eval.recall_cutoffs", "strata.n_bins",          "strata.percentile_cap",
        "out",                 "seed",                   "workers"};
    for (const auto& [key, value] : kv.entries())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown config key '" + key + "'");

    RunConfig c;
    c.data_path = kv.get("data.path");
    c.col_user = kv.get_or("data.col_user", c.col_user);
    c.col_item = kv.get_or("data.col_item", c.col_item);
    c.col_value = kv.get_or("data.col_value", c.col_value);
    auto num = [&](const char* key, double fallback) {
        return kv.has(key) ? detail::to_double(kv.get(key), key) : fallback;
    };
    auto integer = [&](const char* key, long fallback) {
        return kv.has(key) ? detail::to_long(kv.get(key), key) : fallback;
    };
    c.positive_threshold = num("prep.positive_threshold", c.positive_threshold);
    c.min_user_interactions = static_cast<int>(integer("prep.min_user_interactions", c.min_user_interactions));
    c.min_item_interactions = static_cast<int>(integer("prep.min_item_interactions", c.min_item_interactions));
    c.n_val_rec_users = static_cast<int>(integer("split.n_val_rec_users", c.n_val_rec_users));
    c.n_val_est_users = static_cast<int>(integer("split.n_val_est_users", c.n_val_est_users));
    c.n_test_users = static_cast<int>(integer("split.n_test_users", c.n_test_users));
    c.fold_in_ratio = num("split.fold_in_ratio", c.fold_in_ratio);
    c.model_kind = kv.get_or("model.kind", c.model_kind);
    if (kv.has("model.lambda_grid")) {
        c.lambda_grid.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("model.lambda_grid")))
            c.lambda_grid.push_back(detail::to_double(tok, "model.lambda_grid"));
    }
    if (kv.has("model.k_grid")) {
        c.k_grid.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("model.k_grid")))
            c.k_grid.push_back(static_cast<int>(detail::to_long(tok, "model.k_grid")));
    }
    if (kv.has("estimator.k_grid")) {
        c.estimator_k_grid.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("estimator.k_grid")))
            c.estimator_k_grid.push_back(static_cast<int>(detail::to_long(tok, "estimator.k_grid")));
    }
    if (kv.has("estimator.gamma_grid")) {
        c.estimator_gamma_grid.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("estimator.gamma_grid")))
            c.estimator_gamma_grid.push_back(detail::to_double(tok, "estimator.gamma_grid"));
    }
    c.estimator_n_probes = static_cast<int>(integer("estimator.n_probes", c.estimator_n_probes));
    if (kv.has("minimize.algorithms")) {
        c.minimizers.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("minimize.algorithms")))
            c.minimizers.push_back(minimizer_from_name(tok));
    }
    c.beam_width = static_cast<int>(integer("minimize.beam_width", c.beam_width));
    if (kv.has("minimize.etas")) {
        c.etas.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("minimize.etas")))
            c.etas.push_back(detail::to_double(tok, "minimize.etas"));
    }
    c.metric_cutoff = static_cast<int>(integer("metric.cutoff", c.metric_cutoff));
    if (kv.has("eval.recall_cutoffs")) {
        c.recall_cutoffs.clear();
        for (const auto& tok : detail::split_csv_list(kv.get("eval.recall_cutoffs")))
            c.recall_cutoffs.push_back(static_cast<int>(detail::to_long(tok, "eval.recall_cutoffs")));
    }
    c.strata_bins = static_cast<int>(integer("strata.n_bins", c.strata_bins));
    c.strata_percentile_cap = num("strata.percentile_cap", c.strata_percentile_cap);
    c.out_dir = kv.get("out");
    c.seed = static_cast<std::uint64_t>(integer("seed", static_cast<long>(c.seed)));
    c.workers = static_cast<int>(integer("workers", c.workers));
    c.validate();
    return c;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the short form when it round-trips
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%g", v);
    double back;
    if (std::sscanf(shorter, "%lf", &back) == 1 && back == v) return shorter;
    return buf;
}

inline KvFile RunConfig::to_kv(bool include_runtime) const {
    KvFile kv;
    kv.set("data.path", data_path);
    kv.set("data.col_user", col_user);
    kv.set("data.col_item", col_item);
    kv.set("data.col_value", col_value);
    kv.set("prep.positive_threshold", format_double(positive_threshold));
    kv.set("prep.min_user_interactions", std::to_string(min_user_interactions));
    kv.set("prep.min_item_interactions", std::to_string(min_item_interactions));
    kv.set("split.n_val_rec_users", std::to_string(n_val_rec_users));
    kv.set("split.n_val_est_users", std::to_string(n_val_est_users));
    kv.set("split.n_test_users", std::to_string(n_test_users));
    kv.set("split.fold_in_ratio", format_double(fold_in_ratio));
    kv.set("model.kind", model_kind);
    auto join_doubles = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
        return s;
    };
    auto join_ints = [](const std::vector<int>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
        return s;
    };
    kv.set("model.lambda_grid", join_doubles(lambda_grid));
    kv.set("model.k_grid", join_ints(k_grid));
    kv.set("estimator.k_grid", join_ints(estimator_k_grid));
    kv.set("estimator.gamma_grid", join_doubles(estimator_gamma_grid));
    kv.set("estimator.n_probes", std::to_string(estimator_n_probes));
    std::string algs;
    for (std::size_t i = 0; i < minimizers.size(); ++i)
        algs += std::string(i ? "," : "") + minimizer_name(minimizers[i]);
    kv.set("minimize.algorithms", algs);
    kv.set("minimize.beam_width", std::to_string(beam_width));
    kv.set("minimize.etas", join_doubles(etas));
    kv.set("metric.cutoff", std::to_string(metric_cutoff));
    kv.set("eval.recall_cutoffs", join_ints(recall_cutoffs));
    kv.set("strata.n_bins", std::to_string(strata_bins));
    kv.set("strata.percentile_cap", format_double(strata_percentile_cap));
    kv.set("seed", std::to_string(seed));
    if (include_runtime) {
        kv.set("out", out_dir);
        kv.set("workers", std::to_string(workers));
    }
    return kv;
}

inline void RunConfig::validate() const {
    if (data_path.empty()) throw ConfigError("data.path must be set");
    if (out_dir.empty()) throw ConfigError("out must be set");
    if (model_kind != "ease" && model_kind != "itemknn")
        throw ConfigError("model.kind must be 'ease' or 'itemknn'");
    if (fold_in_ratio <= 0.0 || fold_in_ratio >= 1.0) throw ConfigError("split.fold_in_ratio must lie in (0,1)");
    for (double eta : etas)
        if (eta < 0.0 || eta > 1.0) throw ConfigError("minimize.etas values must lie in [0,1]");
    if (minimizers.empty()) throw ConfigError("minimize.algorithms must be nonempty");
    if (etas.empty()) throw ConfigError("minimize.etas must be nonempty");
    if (metric_cutoff < 1) throw ConfigError("metric.cutoff must be >= 1");
    if (beam_width < 1) throw ConfigError("minimize.beam_width must be >= 1");
    if (estimator_n_probes < 1) throw ConfigError("estimator.n_probes must be >= 1");
    for (int k : estimator_k_grid)
        if (k < 2) throw ConfigError("estimator.k_grid values must be >= 2");
    for (double g : estimator_gamma_grid)
        if (g == 0.0) throw ConfigError("estimator.gamma_grid values must be nonzero");
}

}  // namespace minrec
