#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "minrec/metrics.hpp"
#include "minrec/models.hpp"
#include "minrec/rng.hpp"
#include "minrec/split.hpp"

namespace minrec {

// Rank-transform parameters of the output estimator: ranking cut-off K >= 2
// and decay exponent gamma != 0.
struct EstimatorParams {
    int k = 100;
    double gamma = -1.0;

    EstimatorParams() = default;
    EstimatorParams(int k_, double gamma_) : k(k_), gamma(gamma_) { validate(); }

    void validate() const {
        if (k < 2) throw ContractError("estimator: K must be >= 2");
        if (gamma == 0.0) throw ContractError("estimator: gamma must be nonzero");
    }
};

// f_{K,gamma}(i) = delta(i <= K) * ((i+1)^gamma - (K+1)^gamma) / (2^gamma - (K+1)^gamma).
// f(1) = 1 and f(i) = 0 for i >= K, both exactly (identical pow terms cancel).
inline double f_gamma_k(int rank, const EstimatorParams& params) {
    if (rank < 1) throw ContractError("f_gamma_k: rank must be >= 1");
    if (rank >= params.k) return 0.0;
    const double tail = std::pow(static_cast<double>(params.k) + 1.0, params.gamma);
    const double num = std::pow(static_cast<double>(rank) + 1.0, params.gamma) - tail;
    const double den = std::pow(2.0, params.gamma) - tail;
    return num / den;
}

// Indicator relevance from a withheld interaction set; fold-in items are the
// excluded set.
inline RelevanceMap estimate_holdout(const ItemSet& hold_out, const ItemSet& full_history) {
    return indicator_relevance(hold_out, set_difference(full_history, hold_out));
}

// Dense graded relevance from the model's own ranking of the full history:
// one counted inference, history masked, weight f(rank) on the top K-1 items.
inline RelevanceMap estimate_output(const ItemModel& model, const ItemSet& history, const EstimatorParams& params,
                                    InferenceCounter& counter) {
    if (history.empty()) throw ContractError("estimate_output: history must be nonempty");
    const auto scores = infer(model, history, counter);
    const auto top = top_ranked(scores, history, params.k - 1);
    std::vector<std::pair<ItemId, double>> entries;
    entries.reserve(top.size());
    for (std::size_t pos = 0; pos < top.size(); ++pos)
        entries.emplace_back(top[pos], f_gamma_k(static_cast<int>(pos) + 1, params));
    return RelevanceMap(std::move(entries), history);
}

struct ProbeSpec {
    int n_probes = 20;
    std::uint64_t seed = 0;
};

struct TuneResult {
    EstimatorParams best;
    double mean_correlation = 0.0;
    std::vector<std::pair<EstimatorParams, double>> grid_scores;
    int n_users_used = 0;
    std::vector<std::string> warnings;
};

namespace detail {

// Average-rank transform for Spearman correlation.
inline std::vector<double> rank_transform(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size(), 0.0);
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Spearman rho; nullopt when either series is constant.
inline std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const auto ra = rank_transform(a);
    const auto rb = rank_transform(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (ra[i] - ma) * (rb[i] - mb);
        saa += (ra[i] - ma) * (ra[i] - ma);
        sbb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

inline bool params_preferred(const EstimatorParams& a, const EstimatorParams& b) {
    if (a.k != b.k) return a.k < b.k;
    if (std::fabs(a.gamma) != std::fabs(b.gamma)) return std::fabs(a.gamma) < std::fabs(b.gamma);
    return a.gamma < b.gamma;
}

}  // namespace detail

// Selects the grid entry whose output-estimated NDCG orders random fold-in
// probe subsets most like the hold-out NDCG does (mean per-user Spearman).
// One inference per probe plus one per user; rankings are shared across the
// whole grid.
inline TuneResult tune_estimator(const std::vector<UserSplit>& val_est_users, const ItemModel& model,
                                 const std::vector<EstimatorParams>& grid, const ProbeSpec& probe_spec,
                                 int metric_cutoff = 100) {
    if (grid.empty()) throw ContractError("tune_estimator: empty grid");
    if (probe_spec.n_probes < 1) throw ContractError("tune_estimator: n_probes must be >= 1");
    for (const auto& p : grid) p.validate();

    int max_k = 2;
    for (const auto& p : grid) max_k = std::max(max_k, p.k);

    TuneResult result;
    std::vector<double> corr_sum(grid.size(), 0.0);
    std::vector<int> corr_n(grid.size(), 0);

    InferenceCounter counter;
    std::vector<double> scores;
    int usable_users = 0;
    for (const auto& us : val_est_users) {
        if (us.fold_in.empty() || us.hold_out.empty()) {
            result.warnings.push_back("tune: user " + std::to_string(us.user) + " lacks fold-in or hold-out, skipped");
            continue;
        }
        ++usable_users;

        infer_into(model, us.fold_in, counter, scores);
        const auto full_top = top_ranked(scores, us.fold_in, max_k - 1);

        std::vector<RelevanceMap> grid_relevance;
        grid_relevance.reserve(grid.size());
        for (const auto& p : grid) {
            std::vector<std::pair<ItemId, double>> entries;
            const std::size_t support = std::min<std::size_t>(full_top.size(), static_cast<std::size_t>(p.k - 1));
            entries.reserve(support);
            for (std::size_t pos = 0; pos < support; ++pos)
                entries.emplace_back(full_top[pos], f_gamma_k(static_cast<int>(pos) + 1, p));
            grid_relevance.emplace_back(std::move(entries), us.fold_in);
        }
        const RelevanceMap holdout_rel = estimate_holdout(us.hold_out, us.fold_in);

        Rng rng = derive_rng(probe_spec.seed, "tune/probe", static_cast<std::uint64_t>(us.user));
        std::vector<double> holdout_series(static_cast<std::size_t>(probe_spec.n_probes));
        std::vector<std::vector<double>> est_series(grid.size(),
                                                    std::vector<double>(static_cast<std::size_t>(probe_spec.n_probes)));
        ItemSet pool = us.fold_in;
        for (int j = 0; j < probe_spec.n_probes; ++j) {
            const auto size = static_cast<std::size_t>(1 + rng.bounded(pool.size()));
            rng.shuffle(pool);
            ItemSet probe(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
            std::sort(probe.begin(), probe.end());

            infer_into(model, probe, counter, scores);
            const auto topc = top_ranked(scores, probe, metric_cutoff);

            const double hold_ideal = ideal_dcg_at_k(holdout_rel, metric_cutoff);
            holdout_series[static_cast<std::size_t>(j)] =
                hold_ideal == 0.0
                    ? 0.0
                    : dcg_from_topk(topc, holdout_rel, RewardFunction::dcg_log2(metric_cutoff)) / hold_ideal;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const double ideal = ideal_dcg_at_k(grid_relevance[g], metric_cutoff);
                est_series[g][static_cast<std::size_t>(j)] =
                    ideal == 0.0
                        ? 0.0
                        : dcg_from_topk(topc, grid_relevance[g], RewardFunction::dcg_log2(metric_cutoff)) / ideal;
            }
        }

        bool holdout_degenerate = true;
        for (double v : holdout_series)
            if (v != holdout_series.front()) holdout_degenerate = false;
        if (holdout_degenerate) {
            result.warnings.push_back("tune: user " + std::to_string(us.user) +
                                      " has a constant hold-out series, skipped");
            continue;
        }
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const auto rho = detail::spearman(est_series[g], holdout_series);
            if (!rho) {
                result.warnings.push_back("tune: user " + std::to_string(us.user) + " degenerate for grid entry " +
                                          std::to_string(g) + ", skipped for that entry");
                continue;
            }
            corr_sum[g] += *rho;
            ++corr_n[g];
        }
        ++result.n_users_used;
    }
    if (usable_users == 0) throw ContractError("tune_estimator: no usable validation users");

    std::size_t best = 0;
    double best_corr = -2.0;
    result.grid_scores.reserve(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double mean = corr_n[g] > 0 ? corr_sum[g] / corr_n[g] : -2.0;
        result.grid_scores.emplace_back(grid[g], mean);
        if (mean > best_corr || (mean == best_corr && detail::params_preferred(grid[g], grid[best]))) {
            best_corr = mean;
            best = g;
        }
    }
    result.best = grid[best];
    result.mean_correlation = best_corr;
    return result;
}

}  // namespace minrec
