#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "minrec/config.hpp"
#include "minrec/evaluation.hpp"
#include "minrec/groundtruth.hpp"
#include "minrec/interactions.hpp"
#include "minrec/minimize.hpp"
#include "minrec/models.hpp"
#include "minrec/split.hpp"

namespace minrec {

struct RunPaths {
    std::string out;

    std::string splits_dir() const { return out + "/splits"; }
    std::string manifest() const { return out + "/manifest.txt"; }
    std::string model_file() const { return out + "/model.bin"; }
    std::string results_csv() const { return out + "/results.csv"; }
    std::string subsets_dir() const { return out + "/subsets"; }
    std::string subsets_file(MinimizerKind alg, const std::string& eta_token) const {
        return subsets_dir() + "/" + minimizer_name(alg) + "_eta" + eta_token + ".tsv";
    }
    std::string report_dir() const { return out + "/report"; }
};

inline int resolve_workers(const RunConfig& config) {
    if (const char* env = std::getenv("MINREC_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    if (config.workers > 0) return config.workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> threads;
    const int t = std::min<int>(workers, static_cast<int>(n));
    threads.reserve(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
}

}  // namespace detail

// --- manifest ---------------------------------------------------------------

inline KvFile load_manifest(const RunPaths& paths) {
    if (!std::filesystem::exists(paths.manifest())) return {};
    return KvFile::load(paths.manifest());
}

inline void update_manifest(const RunPaths& paths, const std::vector<std::pair<std::string, std::string>>& updates) {
    KvFile kv = load_manifest(paths);
    for (const auto& [k, v] : updates) kv.set(k, v);
    kv.save(paths.manifest());
}

// --- results file -----------------------------------------------------------

inline constexpr const char* kResultsHeader =
    "user_id,model,minimizer,eta,hist_size,subset_size,se,metric_full,metric_min,prr,feasible";

inline std::string render_result_row(const ResultRow& row, const std::string& eta_token) {
    std::string s;
    s += std::to_string(row.user);
    s += ',';
    s += row.model;
    s += ',';
    s += minimizer_name(row.minimizer);
    s += ',';
    s += eta_token;
    s += ',';
    s += std::to_string(row.hist_size);
    s += ',';
    s += std::to_string(row.subset_size);
    s += ',';
    s += std::to_string(row.se);
    s += ',';
    s += format_double(row.metric_full);
    s += ',';
    s += format_double(row.metric_min);
    s += ',';
    s += format_double(row.prr);
    s += ',';
    s += row.feasible ? '1' : '0';
    return s;
}

inline std::optional<ResultRow> parse_result_row(const std::string& line, std::string* eta_token = nullptr) {
    auto fields = detail::split_csv_list(line);
    if (fields.size() != 11) return std::nullopt;
    try {
        ResultRow row;
        row.user = static_cast<UserId>(std::stol(fields[0]));
        row.model = fields[1];
        row.minimizer = minimizer_from_name(fields[2]);
        row.eta = std::stod(fields[3]);
        row.hist_size = std::stoi(fields[4]);
        row.subset_size = std::stoi(fields[5]);
        row.se = static_cast<std::uint64_t>(std::stoull(fields[6]));
        row.metric_full = std::stod(fields[7]);
        row.metric_min = std::stod(fields[8]);
        row.prr = std::stod(fields[9]);
        if (fields[10] != "0" && fields[10] != "1") return std::nullopt;
        row.feasible = fields[10] == "1";
        if (eta_token != nullptr) *eta_token = fields[3];
        return row;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

inline std::vector<ResultRow> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open results file: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    std::getline(in, line);  // header
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto row = parse_result_row(line);
        if (!row) throw ParseError(path + ":" + std::to_string(lineno) + ": malformed results row");
        rows.push_back(std::move(*row));
    }
    return rows;
}

// --- prepare ----------------------------------------------------------------

inline void cmd_prepare(const RunConfig& config) {
    RunPaths paths{config.out_dir};
    std::filesystem::create_directories(config.out_dir);
    if (!std::filesystem::exists(config.data_path))
        throw IoError("input dataset does not exist: " + config.data_path);

    const auto checksum = file_checksum(config.data_path);
    ColumnSchema schema{config.col_user, config.col_item, config.col_value};
    InteractionTable raw = load_interactions(config.data_path, schema);
    InteractionTable binary = binarize(raw, config.positive_threshold);
    InteractionTable table = filter_activity(binary, config.min_user_interactions, config.min_item_interactions);
    if (table.nnz() == 0) throw SplitError("preprocessing removed every interaction");

    SplitSpec spec;
    spec.n_val_rec_users = config.n_val_rec_users;
    spec.n_val_est_users = config.n_val_est_users;
    spec.n_test_users = config.n_test_users;
    spec.fold_in_ratio = config.fold_in_ratio;
    spec.seed = config.seed;
    Splits splits = split_strong_generalization(table, spec);
    save_splits(paths.splits_dir(), splits, table);

    KvFile split_manifest;
    split_manifest.set("input.path", config.data_path);
    split_manifest.set("input.checksum", to_hex(checksum));
    split_manifest.set("seed", std::to_string(spec.seed));
    split_manifest.set("spec.n_val_rec_users", std::to_string(spec.n_val_rec_users));
    split_manifest.set("spec.n_val_est_users", std::to_string(spec.n_val_est_users));
    split_manifest.set("spec.n_test_users", std::to_string(spec.n_test_users));
    split_manifest.set("spec.fold_in_ratio", format_double(spec.fold_in_ratio));
    split_manifest.save(paths.splits_dir() + "/manifest.txt");

    std::vector<std::pair<std::string, std::string>> updates;
    const KvFile config_echo = config.to_kv(false);
    for (const auto& [k, v] : config_echo.entries()) updates.emplace_back("config." + k, v);
    updates.emplace_back("config_hash", config.config_hash());
    updates.emplace_back("seed", std::to_string(config.seed));
    updates.emplace_back("data.checksum", to_hex(checksum));
    updates.emplace_back("data.n_users_raw", std::to_string(raw.n_users()));
    updates.emplace_back("data.n_items_raw", std::to_string(raw.n_items()));
    updates.emplace_back("data.n_users", std::to_string(table.n_users()));
    updates.emplace_back("data.n_items", std::to_string(table.n_items()));
    updates.emplace_back("data.nnz", std::to_string(table.nnz()));
    updates.emplace_back("split.train_users", std::to_string(splits.train.n_users()));
    update_manifest(paths, updates);
}

// --- fit --------------------------------------------------------------------

inline double validation_ndcg(const ItemModel& model, const std::vector<UserSplit>& users, int cutoff) {
    InferenceCounter counter;
    std::vector<double> scores;
    double sum = 0.0;
    int n = 0;
    for (const auto& us : users) {
        if (us.fold_in.empty() || us.hold_out.empty()) continue;
        const RelevanceMap rel = estimate_holdout(us.hold_out, us.fold_in);
        infer_into(model, us.fold_in, counter, scores);
        const auto top = top_ranked(scores, us.fold_in, cutoff);
        const double ideal = ideal_dcg_at_k(rel, cutoff);
        sum += ideal == 0.0 ? 0.0 : dcg_from_topk(top, rel, RewardFunction::dcg_log2(cutoff)) / ideal;
        ++n;
    }
    if (n == 0) throw ContractError("validation split has no usable users");
    return sum / n;
}

inline void cmd_fit(const RunConfig& config) {
    RunPaths paths{config.out_dir};
    if (!std::filesystem::exists(paths.splits_dir() + "/train.csv"))
        throw IoError("no prepared splits under " + paths.splits_dir() + "; run prepare first");
    Splits splits = load_splits(paths.splits_dir());

    ItemModel best_model;
    double best_score = -1.0;
    std::string best_param;
    if (config.model_kind == "ease") {
        if (config.lambda_grid.empty()) throw ConfigError("model.lambda_grid is empty");
        for (double lambda : config.lambda_grid) {
            ItemModel m = fit_ease(splits.train, lambda);
            const double score = validation_ndcg(m, splits.val_rec, config.metric_cutoff);
            if (score > best_score) {
                best_score = score;
                best_model = std::move(m);
                best_param = format_double(lambda);
            }
        }
    } else {
        if (config.k_grid.empty()) throw ConfigError("model.k_grid is empty");
        for (int k : config.k_grid) {
            ItemModel m = fit_itemknn(splits.train, k);
            const double score = validation_ndcg(m, splits.val_rec, config.metric_cutoff);
            if (score > best_score) {
                best_score = score;
                best_model = std::move(m);
                best_param = std::to_string(k);
            }
        }
    }
    save_model(paths.model_file(), best_model);
    update_manifest(paths, {{"model.kind", config.model_kind},
                            {config.model_kind == "ease" ? "model.lambda" : "model.k", best_param},
                            {"model.val_ndcg", format_double(best_score)}});
}

// --- tune-gt ----------------------------------------------------------------

inline void cmd_tune_gt(const RunConfig& config) {
    RunPaths paths{config.out_dir};
    if (!std::filesystem::exists(paths.model_file()))
        throw IoError("no fitted model at " + paths.model_file() + "; run fit first");
    Splits splits = load_splits(paths.splits_dir());
    ItemModel model = load_model(paths.model_file());

    std::vector<EstimatorParams> grid;
    for (int k : config.estimator_k_grid)
        for (double gamma : config.estimator_gamma_grid) grid.emplace_back(k, gamma);

    ProbeSpec probes;
    probes.n_probes = config.estimator_n_probes;
    probes.seed = derive_seed(config.seed, "tune");
    TuneResult tuned = tune_estimator(splits.val_est, model, grid, probes, config.metric_cutoff);
    for (const auto& w : tuned.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());

    update_manifest(paths, {{"estimator.K", std::to_string(tuned.best.k)},
                            {"estimator.gamma", format_double(tuned.best.gamma)},
                            {"estimator.spearman", format_double(tuned.mean_correlation)},
                            {"estimator.users_used", std::to_string(tuned.n_users_used)}});
}

// --- minimize ---------------------------------------------------------------

namespace detail {

struct TaskKey {
    MinimizerKind alg;
    std::string eta_token;
    UserId user;

    bool operator==(const TaskKey& other) const {
        return alg == other.alg && eta_token == other.eta_token && user == other.user;
    }
};

struct DoneEntry {
    ResultRow row;
    ItemSet subset;
};

inline std::vector<std::pair<UserId, ItemSet>> load_subsets_file(const std::string& path) {
    std::vector<std::pair<UserId, ItemSet>> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) break;  // malformed tail, stop here
        try {
            UserId user = static_cast<UserId>(std::stol(line.substr(0, tab)));
            ItemSet items = parse_items(line.substr(tab + 1), path);
            out.emplace_back(user, std::move(items));
        } catch (const std::exception&) {
            break;
        }
    }
    return out;
}

}  // namespace detail

inline void cmd_minimize(const RunConfig& config) {
    RunPaths paths{config.out_dir};
    Splits splits = load_splits(paths.splits_dir());
    if (!std::filesystem::exists(paths.model_file()))
        throw IoError("no fitted model at " + paths.model_file() + "; run fit first");
    ItemModel model = load_model(paths.model_file());
    KvFile manifest = load_manifest(paths);
    if (!manifest.has("estimator.K"))
        throw ConfigError("manifest lacks estimator parameters; run tune-gt first");
    EstimatorParams est_params(static_cast<int>(std::stol(manifest.get("estimator.K"))),
                               std::stod(manifest.get("estimator.gamma")));

    const std::vector<std::int64_t> popularity = splits.train.item_counts();
    const int workers = resolve_workers(config);

    // Canonical task order: algorithms in config order, then etas, then test
    // users in file order. Resume keeps the longest clean prefix of that
    // order and recomputes the rest.
    struct Combo {
        MinimizerKind alg;
        double eta;
        std::string eta_token;
    };
    std::vector<Combo> combos;
    for (MinimizerKind alg : config.minimizers)
        for (double eta : config.etas) combos.push_back({alg, eta, format_double(eta)});

    std::vector<detail::TaskKey> canonical;
    for (const auto& combo : combos)
        for (const auto& us : splits.test) canonical.push_back({combo.alg, combo.eta_token, us.user});

    // Collect completed entries from a previous (possibly interrupted) run.
    std::vector<detail::DoneEntry> done;
    if (std::filesystem::exists(paths.results_csv())) {
        std::unordered_map<std::string, ItemSet> subset_lookup;
        for (const auto& combo : combos) {
            for (auto& [user, items] : detail::load_subsets_file(paths.subsets_file(combo.alg, combo.eta_token)))
                subset_lookup[std::string(minimizer_name(combo.alg)) + "|" + combo.eta_token + "|" +
                              std::to_string(user)] = std::move(items);
        }
        std::ifstream in(paths.results_csv());
        std::string line;
        std::getline(in, line);  // header
        std::size_t next_key = 0;
        while (std::getline(in, line) && next_key < canonical.size()) {
            if (line.empty()) continue;
            std::string eta_token;
            auto row = parse_result_row(line, &eta_token);
            if (!row) break;
            const auto& key = canonical[next_key];
            if (!(row->minimizer == key.alg && eta_token == key.eta_token && row->user == key.user)) break;
            auto it = subset_lookup.find(std::string(minimizer_name(key.alg)) + "|" + key.eta_token + "|" +
                                         std::to_string(key.user));
            if (it == subset_lookup.end()) break;
            if (static_cast<int>(it->second.size()) != row->subset_size) break;
            done.push_back({std::move(*row), it->second});
            ++next_key;
        }
    }

    // Rewrite both artifacts as the clean prefix, then extend.
    std::filesystem::create_directories(paths.subsets_dir());
    std::ofstream results(paths.results_csv(), std::ios::trunc);
    if (!results) throw IoError("cannot write " + paths.results_csv());
    results << kResultsHeader << '\n';
    std::unordered_map<std::string, std::ofstream> subset_files;
    for (const auto& combo : combos) {
        const std::string file = paths.subsets_file(combo.alg, combo.eta_token);
        subset_files.emplace(file, std::ofstream(file, std::ios::trunc));
        if (!subset_files.at(file)) throw IoError("cannot write " + file);
    }
    std::size_t done_idx = 0;
    auto emit = [&](const detail::TaskKey& key, const ResultRow& row, const ItemSet& subset) {
        results << render_result_row(row, key.eta_token) << '\n';
        auto& sf = subset_files.at(paths.subsets_file(key.alg, key.eta_token));
        sf << row.user << '\t' << detail::join_items(subset) << '\n';
    };
    for (; done_idx < done.size(); ++done_idx) emit(canonical[done_idx], done[done_idx].row, done[done_idx].subset);

    // Lookup from user id to its test split.
    std::unordered_map<UserId, const UserSplit*> test_by_user;
    for (const auto& us : splits.test) test_by_user.emplace(us.user, &us);

    std::size_t failures = 0;
    const RewardFunction reward = RewardFunction::dcg_log2(config.metric_cutoff);
    for (std::size_t c = 0; c < combos.size(); ++c) {
        const auto& combo = combos[c];
        const std::size_t combo_begin = c * splits.test.size();
        const std::size_t combo_end = combo_begin + splits.test.size();
        if (combo_end <= done.size()) continue;  // fully resumed
        const std::size_t first_pending = std::max(combo_begin, done.size());

        struct Outcome {
            bool ok = false;
            ResultRow row;
            ItemSet subset;
            std::string error;
        };
        std::vector<Outcome> outcomes(combo_end - first_pending);
        detail::parallel_for(outcomes.size(), workers, [&](std::size_t t) {
            const auto& key = canonical[first_pending + t];
            const UserSplit& us = *test_by_user.at(key.user);
            auto& outcome = outcomes[t];
            try {
                InferenceCounter setup_counter;
                RelevanceMap relevance = estimate_output(model, us.fold_in, est_params, setup_counter);
                MinimizationProblem problem =
                    make_problem(model, us.fold_in, std::move(relevance), reward, combo.eta, setup_counter);
                MinimizerParams mp;
                mp.heuristic.train_popularity = &popularity;
                mp.heuristic.rs_seed = derive_seed(config.seed, "minimize/rs", static_cast<std::uint64_t>(us.user));
                mp.beam_width = config.beam_width;
                InferenceCounter counter;
                MinimizationResult res = run_minimizer(key.alg, problem, mp, counter);
                outcome.row = {key.user,
                               config.model_kind,
                               key.alg,
                               combo.eta,
                               static_cast<int>(us.fold_in.size()),
                               static_cast<int>(res.subset.size()),
                               res.se,
                               res.metric_full,
                               res.metric_min,
                               res.prr,
                               res.feasible};
                outcome.subset = std::move(res.subset);
                outcome.ok = true;
            } catch (const std::exception& e) {
                outcome.error = e.what();
            }
        });
        for (std::size_t t = 0; t < outcomes.size(); ++t) {
            const auto& key = canonical[first_pending + t];
            if (!outcomes[t].ok) {
                ++failures;
                std::fprintf(stderr, "warning: user %d (%s, eta=%s) failed: %s\n", key.user,
                             minimizer_name(key.alg), key.eta_token.c_str(), outcomes[t].error.c_str());
                continue;
            }
            emit(key, outcomes[t].row, outcomes[t].subset);
        }
    }
    results.flush();
    for (auto& [_, f] : subset_files) f.flush();
    update_manifest(paths, {{"minimize.failures", std::to_string(failures)},
                            {"minimize.rows", std::to_string(canonical.size() - failures)}});
}

// --- evaluate ---------------------------------------------------------------

inline void cmd_evaluate(const RunConfig& config) {
    RunPaths paths{config.out_dir};
    if (!std::filesystem::exists(paths.results_csv()))
        throw IoError("no results at " + paths.results_csv() + "; run minimize first");
    Splits splits = load_splits(paths.splits_dir());
    ItemModel model = load_model(paths.model_file());

    std::vector<TestMetricSpec> metrics;
    metrics.push_back({TestMetricSpec::Kind::Ndcg, config.metric_cutoff});
    for (int k : config.recall_cutoffs) metrics.push_back({TestMetricSpec::Kind::Recall, k});

    std::string csv = "minimizer,eta,metric,mean_full,mean_min,prr_of_means,mean_user_prr,n_users\n";
    std::vector<std::string> warnings;
    for (MinimizerKind alg : config.minimizers) {
        for (double eta : config.etas) {
            const std::string token = format_double(eta);
            auto entries = detail::load_subsets_file(paths.subsets_file(alg, token));
            std::unordered_map<UserId, ItemSet> by_user;
            for (auto& [user, items] : entries) by_user.emplace(user, std::move(items));
            const auto rows = evaluate_test(model, splits.test, by_user, metrics, &warnings);
            for (const auto& e : rows) {
                csv += std::string(minimizer_name(alg)) + "," + token + "," + e.metric + "," +
                       format_double(e.mean_full) + "," + format_double(e.mean_min) + "," +
                       format_double(e.prr_of_means) + "," + format_double(e.mean_user_prr) + "," +
                       std::to_string(e.n_users) + "\n";
            }
        }
    }
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::filesystem::create_directories(paths.report_dir());
    write_file(paths.report_dir() + "/test_eval.csv", csv);
}

// --- report -----------------------------------------------------------------

namespace detail {

inline std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string fixed(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace detail

inline void cmd_report(const RunConfig& config) {
    RunPaths paths{config.out_dir};
    if (!std::filesystem::exists(paths.results_csv()))
        throw IoError("no results at " + paths.results_csv() + "; run minimize first");
    const std::vector<ResultRow> rows = load_results(paths.results_csv());
    if (rows.empty()) throw ContractError("results file has no rows");
    std::filesystem::create_directories(paths.report_dir());

    auto eta_token_of = [](double eta) { return format_double(eta); };
    auto select = [&](MinimizerKind alg, double eta) {
        std::vector<ResultRow> out;
        for (const auto& r : rows)
            if (r.minimizer == alg && r.eta == eta) out.push_back(r);
        return out;
    };

    StratumSpec strat_spec{config.strata_bins, config.strata_percentile_cap};

    std::string aggregate_csv = "minimizer,eta,n_users,mr,mean_se,mean_prr,feasible_fraction\n";
    std::string strata_csv = "minimizer,eta,bin_lo,bin_hi,n_users,mr,mean_se\n";
    std::string scatter_csv = "minimizer,eta,user_id,hist_size,mr\n";
    std::string text;

    for (double eta : config.etas) {
        text += "=== eta = " + eta_token_of(eta) + " (model: " + config.model_kind + ", metric: ndcg@" +
                std::to_string(config.metric_cutoff) + ") ===\n\n";
        text += detail::pad("minimizer", 10) + detail::pad("users", 7) + detail::pad("MR", 9) +
                detail::pad("mean SE", 10) + detail::pad("mean PRR", 10) + "feasible\n";

        std::vector<std::pair<MinimizerKind, std::vector<Stratum>>> strata_by_alg;
        for (MinimizerKind alg : config.minimizers) {
            const auto sel = select(alg, eta);
            if (sel.empty()) continue;
            const double mr = minimization_ratio(sel);
            const double se = mean_se(sel);
            const double prr_mean = mean_prr(sel);
            int feasible_count = 0;
            for (const auto& r : sel) feasible_count += r.feasible ? 1 : 0;
            const double feas = static_cast<double>(feasible_count) / static_cast<double>(sel.size());

            aggregate_csv += std::string(minimizer_name(alg)) + "," + eta_token_of(eta) + "," +
                             std::to_string(sel.size()) + "," + format_double(mr) + "," + format_double(se) + "," +
                             format_double(prr_mean) + "," + format_double(feas) + "\n";
            text += detail::pad(minimizer_name(alg), 10) + detail::pad(std::to_string(sel.size()), 7) +
                    detail::pad(detail::fixed(mr, 4), 9) + detail::pad(detail::fixed(se, 1), 10) +
                    detail::pad(detail::fixed(prr_mean, 4), 10) + detail::fixed(feas, 3) + "\n";

            auto strata = stratify(sel, strat_spec);
            for (const auto& s : strata) {
                strata_csv += std::string(minimizer_name(alg)) + "," + eta_token_of(eta) + "," +
                              format_double(s.lo) + "," + format_double(s.hi) + "," +
                              std::to_string(s.members.size()) + "," + format_double(s.mr) + "," +
                              format_double(s.mean_se) + "\n";
            }
            strata_by_alg.emplace_back(alg, std::move(strata));

            for (const auto& r : sel) {
                scatter_csv += std::string(minimizer_name(alg)) + "," + eta_token_of(eta) + "," +
                               std::to_string(r.user) + "," + std::to_string(r.hist_size) + "," +
                               format_double(r.hist_size == 0
                                                 ? 0.0
                                                 : static_cast<double>(r.subset_size) / r.hist_size) +
                               "\n";
            }
        }

        // Stratified table: rows are history bins, columns MR / SE per minimizer.
        if (!strata_by_alg.empty()) {
            text += "\nstratified by history size (cap: p" + detail::fixed(config.strata_percentile_cap, 0) + ")\n";
            text += detail::pad("hist bin", 16);
            for (const auto& [alg, _] : strata_by_alg)
                text += detail::pad(std::string(minimizer_name(alg)) + " MR", 12) +
                        detail::pad(std::string(minimizer_name(alg)) + " SE", 12);
            text += "\n";
            const auto& reference = strata_by_alg.front().second;
            for (std::size_t b = 0; b < reference.size(); ++b) {
                const auto& bin = reference[b];
                std::string label = (b == 0 ? "(" : "[") + detail::fixed(bin.lo, 0) + ", " + detail::fixed(bin.hi, 0) +
                                    (bin.closes_at_cap ? "]" : ")");
                text += detail::pad(label, 16);
                for (const auto& [alg, strata] : strata_by_alg) {
                    if (b < strata.size() && !strata[b].members.empty()) {
                        text += detail::pad(detail::fixed(strata[b].mr, 3), 12) +
                                detail::pad(std::to_string(static_cast<long>(std::lround(strata[b].mean_se))), 12);
                    } else {
                        text += detail::pad("-", 12) + detail::pad("-", 12);
                    }
                }
                text += "\n";
            }
        }
        text += "\n";
    }

    // Test-set table, if evaluate has run.
    const std::string test_csv_path = paths.report_dir() + "/test_eval.csv";
    if (std::filesystem::exists(test_csv_path)) {
        text += "=== hold-out test evaluation (PRR = ratio of means, %) ===\n\n";
        std::ifstream in(test_csv_path);
        std::string line;
        std::getline(in, line);
        text += detail::pad("minimizer", 10) + detail::pad("eta", 6) + detail::pad("metric", 12) +
                detail::pad("full", 9) + detail::pad("min", 9) + "PRR (%)\n";
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto f = detail::split_csv_list(line);
            if (f.size() != 8) continue;
            text += detail::pad(f[0], 10) + detail::pad(f[1], 6) + detail::pad(f[2], 12) +
                    detail::pad(detail::fixed(std::stod(f[3]), 3), 9) +
                    detail::pad(detail::fixed(std::stod(f[4]), 3), 9) +
                    detail::fixed(std::stod(f[5]) * 100.0, 1) + "\n";
        }
        text += "\n";
    }

    write_file(paths.report_dir() + "/aggregate.csv", aggregate_csv);
    write_file(paths.report_dir() + "/strata.csv", strata_csv);
    write_file(paths.report_dir() + "/mr_vs_history.csv", scatter_csv);
    write_file(paths.report_dir() + "/report.txt", text);
}

inline void cmd_all(const RunConfig& config) {
    cmd_prepare(config);
    cmd_fit(config);
    cmd_tune_gt(config);
    cmd_minimize(config);
    cmd_evaluate(config);
    cmd_report(config);
}

}  // namespace minrec
