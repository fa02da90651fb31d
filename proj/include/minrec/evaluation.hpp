#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "minrec/groundtruth.hpp"
#include "minrec/metrics.hpp"
#include "minrec/minimize.hpp"
#include "minrec/models.hpp"
#include "minrec/split.hpp"

namespace minrec {

// One persisted minimization outcome (a row of results.csv).
struct ResultRow {
    UserId user = 0;
    std::string model;
    MinimizerKind minimizer = MinimizerKind::Gr;
    double eta = 1.0;
    int hist_size = 0;
    int subset_size = 0;
    std::uint64_t se = 0;
    double metric_full = 0.0;
    double metric_min = 0.0;
    double prr = 0.0;
    bool feasible = false;
};

// Interaction-weighted minimization ratio: sum |I| / sum |H|, not the mean
// of per-user ratios.
inline double minimization_ratio(std::span<const ResultRow> results) {
    if (results.empty()) throw ContractError("minimization_ratio: empty result list");
    std::int64_t subset = 0, hist = 0;
    for (const auto& r : results) {
        subset += r.subset_size;
        hist += r.hist_size;
    }
    if (hist == 0) throw ContractError("minimization_ratio: zero total history size");
    return static_cast<double>(subset) / static_cast<double>(hist);
}

inline double mean_se(std::span<const ResultRow> results) {
    if (results.empty()) throw ContractError("mean_se: empty result list");
    double sum = 0.0;
    for (const auto& r : results) sum += static_cast<double>(r.se);
    return sum / static_cast<double>(results.size());
}

inline double mean_prr(std::span<const ResultRow> results) {
    if (results.empty()) throw ContractError("mean_prr: empty result list");
    double sum = 0.0;
    for (const auto& r : results) sum += r.prr;
    return sum / static_cast<double>(results.size());
}

struct StratumSpec {
    int n_bins = 5;
    double percentile_cap = 95.0;
};

struct Stratum {
    double lo = 0.0;  // bin is (lo, hi) half-open except the last, which closes at the cap
    double hi = 0.0;
    bool closes_at_cap = false;
    std::vector<std::size_t> members;  // indices into the input rows
    double mr = 0.0;
    double mean_se = 0.0;
};

// Nearest-rank percentile for determinism across platforms.
inline double nearest_rank_percentile(std::vector<double> values, double percentile) {
    if (values.empty()) throw ContractError("percentile of empty set");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
    if (rank < 1) rank = 1;
    if (rank > n) rank = n;
    return values[rank - 1];
}

// Equal-width history-size bins over (0, cap] where cap is the percentile_cap
// quantile of |H|; users beyond the cap are excluded from strata (but remain
// in global aggregates). Degenerate cap (== smallest history) collapses to a
// single bin.
inline std::vector<Stratum> stratify(std::span<const ResultRow> results, const StratumSpec& spec,
                                     std::vector<std::string>* warnings = nullptr) {
    if (results.empty()) throw ContractError("stratify: empty result list");
    if (spec.n_bins < 1) throw ContractError("stratify: n_bins must be >= 1");
    if (spec.percentile_cap <= 0.0 || spec.percentile_cap > 100.0)
        throw ContractError("stratify: percentile_cap must lie in (0,100]");

    std::vector<double> sizes;
    sizes.reserve(results.size());
    double min_size = std::numeric_limits<double>::infinity();
    for (const auto& r : results) {
        sizes.push_back(static_cast<double>(r.hist_size));
        min_size = std::min(min_size, static_cast<double>(r.hist_size));
    }
    const double cap = nearest_rank_percentile(sizes, spec.percentile_cap);

    int n_bins = spec.n_bins;
    if (cap <= min_size) {
        if (warnings != nullptr)
            warnings->push_back("stratify: degenerate percentile cap, falling back to a single bin");
        n_bins = 1;
    }

    std::vector<Stratum> strata(static_cast<std::size_t>(n_bins));
    const double width = cap / static_cast<double>(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        strata[static_cast<std::size_t>(b)].lo = width * b;
        strata[static_cast<std::size_t>(b)].hi = width * (b + 1);
        strata[static_cast<std::size_t>(b)].closes_at_cap = b == n_bins - 1;
    }

    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto size = static_cast<double>(results[i].hist_size);
        if (size > cap) continue;
        auto b = static_cast<std::size_t>(size / width);
        if (b >= static_cast<std::size_t>(n_bins)) b = static_cast<std::size_t>(n_bins) - 1;
        // left-closed right-open except the last bin, which includes the cap
        while (b + 1 < static_cast<std::size_t>(n_bins) && size >= strata[b].hi) ++b;
        strata[b].members.push_back(i);
    }

    for (auto& s : strata) {
        if (s.members.empty()) continue;
        std::int64_t subset = 0, hist = 0;
        double se = 0.0;
        for (std::size_t i : s.members) {
            subset += results[i].subset_size;
            hist += results[i].hist_size;
            se += static_cast<double>(results[i].se);
        }
        s.mr = hist == 0 ? 0.0 : static_cast<double>(subset) / static_cast<double>(hist);
        s.mean_se = se / static_cast<double>(s.members.size());
    }
    return strata;
}

// --- test-set evaluation (hold-out protocol) --------------------------------

struct TestMetricSpec {
    enum class Kind { Ndcg, Recall };
    Kind kind = Kind::Ndcg;
    int k = 100;

    std::string name() const { return (kind == Kind::Ndcg ? "ndcg@" : "recall@") + std::to_string(k); }
};

struct TestEvalEntry {
    std::string metric;
    double mean_full = 0.0;
    double mean_min = 0.0;
    double prr_of_means = 0.0;  // headline number: ratio of the two means
    double mean_user_prr = 0.0;
    int n_users = 0;
};

namespace detail {

inline double test_metric_from_topk(const std::vector<ItemId>& topk, const RelevanceMap& relevance,
                                    const TestMetricSpec& spec) {
    if (spec.kind == TestMetricSpec::Kind::Ndcg) {
        const double ideal = ideal_dcg_at_k(relevance, spec.k);
        if (ideal == 0.0) return 0.0;
        return dcg_from_topk(topk, relevance, RewardFunction::dcg_log2(spec.k)) / ideal;
    }
    std::size_t hits = 0;
    for (std::size_t pos = 0; pos < topk.size() && pos < static_cast<std::size_t>(spec.k); ++pos)
        if (relevance.weight_of(topk[pos]) != 0.0) ++hits;
    const auto denom = std::min<std::size_t>(static_cast<std::size_t>(spec.k), relevance.size());
    return denom == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(denom);
}

}  // namespace detail

// Scores each user's hold-out twice, once with the full fold-in as input and
// once with the minimized subset (masking only the respective input), then
// reports per-metric means and their ratio.
inline std::vector<TestEvalEntry> evaluate_test(const ItemModel& model, const std::vector<UserSplit>& users,
                                                const std::unordered_map<UserId, ItemSet>& minimized_subsets,
                                                const std::vector<TestMetricSpec>& metrics,
                                                std::vector<std::string>* warnings = nullptr) {
    if (metrics.empty()) throw ContractError("evaluate_test: no metrics requested");
    int max_k = 0;
    for (const auto& m : metrics) max_k = std::max(max_k, m.k);

    std::vector<TestEvalEntry> entries(metrics.size());
    for (std::size_t m = 0; m < metrics.size(); ++m) entries[m].metric = metrics[m].name();

    InferenceCounter counter;
    std::vector<double> scores;
    for (const auto& us : users) {
        if (us.hold_out.empty()) {
            if (warnings != nullptr)
                warnings->push_back("evaluate_test: user " + std::to_string(us.user) + " has empty hold-out, excluded");
            continue;
        }
        auto it = minimized_subsets.find(us.user);
        if (it == minimized_subsets.end()) {
            if (warnings != nullptr)
                warnings->push_back("evaluate_test: user " + std::to_string(us.user) + " has no minimized subset, excluded");
            continue;
        }
        for (ItemId i : it->second)
            if (!contains(us.fold_in, i))
                throw ContractError("evaluate_test: subset of user " + std::to_string(us.user) +
                                    " is not contained in its fold-in set");

        const RelevanceMap relevance = estimate_holdout(us.hold_out, us.fold_in);

        infer_into(model, us.fold_in, counter, scores);
        const auto top_full = top_ranked(scores, us.fold_in, max_k);
        infer_into(model, it->second, counter, scores);
        const auto top_min = top_ranked(scores, it->second, max_k);

        for (std::size_t m = 0; m < metrics.size(); ++m) {
            const double full = detail::test_metric_from_topk(top_full, relevance, metrics[m]);
            const double mini = detail::test_metric_from_topk(top_min, relevance, metrics[m]);
            entries[m].mean_full += full;
            entries[m].mean_min += mini;
            entries[m].mean_user_prr += prr(mini, full);
            ++entries[m].n_users;
        }
    }

    for (auto& e : entries) {
        if (e.n_users == 0) continue;
        e.mean_full /= e.n_users;
        e.mean_min /= e.n_users;
        e.mean_user_prr /= e.n_users;
        e.prr_of_means = prr(e.mean_min, e.mean_full);
    }
    return entries;
}

}  // namespace minrec
