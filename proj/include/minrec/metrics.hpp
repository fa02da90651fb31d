#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "minrec/common.hpp"
#include "minrec/ranking.hpp"

namespace minrec {

enum class RewardKind { DcgLog2, RecallAtK, Custom };

// Non-increasing reward phi(rank) with rank 1-based; zero beyond the cutoff.
struct RewardFunction {
    RewardKind kind = RewardKind::DcgLog2;
    int cutoff = 100;
    std::function<double(int)> custom;

    static RewardFunction dcg_log2(int k) { return {RewardKind::DcgLog2, k, nullptr}; }
    static RewardFunction recall_at_k(int k) { return {RewardKind::RecallAtK, k, nullptr}; }

    double operator()(int rank) const {
        if (rank < 1) throw ContractError("reward: rank must be >= 1");
        switch (kind) {
            case RewardKind::DcgLog2:
                return rank <= cutoff ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
            case RewardKind::RecallAtK:
                return rank <= cutoff ? 1.0 : 0.0;
            case RewardKind::Custom:
                return custom(rank);
        }
        return 0.0;
    }
};

// Sparse estimate of P(omega | H): item -> weight in [0,1], plus the set of
// items (the user's history) that must never contribute to a metric. The
// support/excluded disjointness contract is enforced at construction.
class RelevanceMap {
public:
    RelevanceMap() = default;

    RelevanceMap(std::vector<std::pair<ItemId, double>> entries, ItemSet excluded)
        : excluded_(std::move(excluded)) {
        std::sort(entries.begin(), entries.end());
        items_.reserve(entries.size());
        weights_.reserve(entries.size());
        for (const auto& [item, w] : entries) {
            if (w < 0.0 || w > 1.0)
                throw ContractError("relevance weight out of [0,1] for item " + std::to_string(item));
            if (!items_.empty() && items_.back() == item)
                throw ContractError("duplicate relevance entry for item " + std::to_string(item));
            if (contains(excluded_, item))
                throw ContractError("relevance support overlaps excluded item " + std::to_string(item));
            items_.push_back(item);
            weights_.push_back(w);
        }
    }

    const ItemSet& support() const { return items_; }
    const std::vector<double>& weights() const { return weights_; }
    const ItemSet& excluded() const { return excluded_; }
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }

    double weight_of(ItemId item) const {
        auto it = std::lower_bound(items_.begin(), items_.end(), item);
        if (it == items_.end() || *it != item) return 0.0;
        return weights_[static_cast<std::size_t>(it - items_.begin())];
    }

private:
    ItemSet items_;
    std::vector<double> weights_;
    ItemSet excluded_;
};

inline RelevanceMap indicator_relevance(const ItemSet& support, ItemSet excluded) {
    std::vector<std::pair<ItemId, double>> entries;
    entries.reserve(support.size());
    for (ItemId i : support) entries.emplace_back(i, 1.0);
    return RelevanceMap(std::move(entries), std::move(excluded));
}

// Generic ranking metric: sum over the relevance support of
// weight(omega) * phi(position(omega)). Items absent from the ranking
// contribute zero.
inline double ranking_metric(const Ranking& ranking, const RelevanceMap& relevance, const RewardFunction& phi) {
    double sum = 0.0;
    const auto& support = relevance.support();
    const auto& weights = relevance.weights();
    for (std::size_t i = 0; i < support.size(); ++i) {
        const int pos = ranking.position_of(support[i]);
        if (pos >= 1) sum += weights[i] * phi(pos);
    }
    return sum;
}

// Ideal DCG@k: relevance weights sorted descending occupy ranks 1..k.
inline double ideal_dcg_at_k(const RelevanceMap& relevance, int k) {
    std::vector<double> w = relevance.weights();
    std::sort(w.begin(), w.end(), std::greater<>());
    const std::size_t n = std::min<std::size_t>(w.size(), static_cast<std::size_t>(std::max(k, 0)));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] / std::log2(static_cast<double>(i) + 2.0);
    return sum;
}

inline double ndcg_at_k(const Ranking& ranking, const RelevanceMap& relevance, int k) {
    if (k < 1) throw ContractError("ndcg_at_k: k must be >= 1");
    if (relevance.empty()) return 0.0;
    const double ideal = ideal_dcg_at_k(relevance, k);
    if (ideal == 0.0) return 0.0;
    return ranking_metric(ranking, relevance, RewardFunction::dcg_log2(k)) / ideal;
}

inline double recall_at_k(const Ranking& ranking, const ItemSet& relevant, int k) {
    if (k < 1) throw ContractError("recall_at_k: k must be >= 1");
    if (relevant.empty()) return 0.0;
    std::size_t hits = 0;
    for (ItemId item : relevant) {
        const int pos = ranking.position_of(item);
        if (pos >= 1 && pos <= k) ++hits;
    }
    return static_cast<double>(hits) /
           static_cast<double>(std::min<std::size_t>(static_cast<std::size_t>(k), relevant.size()));
}

// Performance Retention Ratio. A zero full-history metric makes the
// constraint vacuous, so that case maps to 1.0 instead of dividing by zero.
inline double prr(double metric_minimized, double metric_full) {
    if (metric_minimized < 0.0 || metric_full < 0.0)
        throw ContractError("prr: metric values must be non-negative");
    if (metric_full == 0.0) return 1.0;
    return metric_minimized / metric_full;
}

// --- fast evaluation path -------------------------------------------------
// DCG against a precomputed top-k list (rank = list position + 1). Produces
// the same value as ranking_metric(rank(scores, masked), relevance, phi)
// whenever phi vanishes beyond k; the equivalence is property-tested.

inline double dcg_from_topk(const std::vector<ItemId>& topk, const RelevanceMap& relevance,
                            const RewardFunction& phi) {
    double sum = 0.0;
    for (std::size_t pos = 0; pos < topk.size(); ++pos) {
        const double w = relevance.weight_of(topk[pos]);
        if (w != 0.0) sum += w * phi(static_cast<int>(pos) + 1);
    }
    return sum;
}

}  // namespace minrec
