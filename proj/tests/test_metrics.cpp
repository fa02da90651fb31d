#include <gtest/gtest.h>

#include "minrec/metrics.hpp"
#include "minrec/rng.hpp"
#include "oracles.hpp"

using namespace minrec;

namespace {

Ranking ranking_of(std::vector<ItemId> order, int n_items) {
    Ranking r;
    r.order = std::move(order);
    r.positions.assign(static_cast<std::size_t>(n_items), 0);
    for (std::size_t pos = 0; pos < r.order.size(); ++pos)
        r.positions[static_cast<std::size_t>(r.order[pos])] = static_cast<std::int32_t>(pos) + 1;
    return r;
}

}  // namespace

TEST(RankingMetric, EmptySupportIsZero) {
    const auto r = ranking_of({0, 1, 2}, 3);
    const RelevanceMap rel({}, {});
    EXPECT_EQ(ranking_metric(r, rel, RewardFunction::dcg_log2(10)), 0.0);
}

TEST(RankingMetric, SingleRelevantAtRankOne) {
    const auto r = ranking_of({4, 1, 2}, 5);
    const RelevanceMap rel({{4, 0.7}}, {});
    EXPECT_DOUBLE_EQ(ranking_metric(r, rel, RewardFunction::dcg_log2(10)), 0.7);  // phi(1) = 1
}

TEST(RankingMetric, MatchesTermByTermOracle) {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 5 + static_cast<int>(rng.bounded(15));
        std::vector<double> scores(static_cast<std::size_t>(n));
        for (auto& s : scores) s = rng.uniform01();
        const auto r = rank(scores, {});
        std::vector<std::pair<ItemId, double>> entries;
        for (int i = 0; i < n; ++i)
            if (rng.uniform01() < 0.4) entries.emplace_back(i, rng.uniform01());
        const RelevanceMap rel(entries, {});
        const int cutoff = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
        const RewardFunction phi = RewardFunction::dcg_log2(cutoff);
        const double expected = oracle::metric_sum(r.order, entries, [&](int pos) { return phi(pos); });
        EXPECT_NEAR(ranking_metric(r, rel, phi), expected, 1e-12);
    }
}

TEST(RankingMetric, MonotoneUnderRankImprovement) {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 6 + static_cast<int>(rng.bounded(8));
        std::vector<ItemId> order(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
        rng.shuffle(order);
        std::vector<std::pair<ItemId, double>> entries;
        for (int i = 0; i < n; ++i)
            if (rng.uniform01() < 0.5) entries.emplace_back(i, 0.1 + 0.9 * rng.uniform01());
        if (entries.empty()) continue;
        const RelevanceMap rel(entries, {});
        const RewardFunction phi = RewardFunction::dcg_log2(n);

        // move a relevant item one rank up past a zero-relevance item, so
        // every other relevant item keeps its rank
        const auto& [target, weight] = entries[rng.bounded(entries.size())];
        auto it = std::find(order.begin(), order.end(), target);
        if (it == order.begin()) continue;
        if (rel.weight_of(*(it - 1)) != 0.0) continue;
        const double before = ranking_metric(ranking_of(order, n), rel, phi);
        std::iter_swap(it, it - 1);
        const double after = ranking_metric(ranking_of(order, n), rel, phi);
        EXPECT_GE(after + 1e-15, before) << "improving a relevant item's rank must not lower the metric";
        (void)weight;
    }
}

TEST(RelevanceMap, SupportOverlappingExcludedIsContractViolation) {
    EXPECT_THROW(RelevanceMap({{3, 0.5}}, {2, 3}), ContractError);
    EXPECT_THROW(RelevanceMap({{1, 1.5}}, {}), ContractError);  // weight out of range
}

TEST(Ndcg, IdealOrderingIsOne) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 4 + static_cast<int>(rng.bounded(10));
        std::vector<std::pair<ItemId, double>> entries;
        for (int i = 0; i < n; ++i)
            if (rng.uniform01() < 0.6) entries.emplace_back(i, 0.05 + 0.95 * rng.uniform01());
        if (entries.empty()) continue;
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        std::vector<ItemId> order;
        for (const auto& [item, w] : entries) order.push_back(item);
        for (int i = 0; i < n; ++i)
            if (std::find(order.begin(), order.end(), i) == order.end()) order.push_back(i);
        const RelevanceMap rel(entries, {});
        EXPECT_NEAR(ndcg_at_k(ranking_of(order, n), rel, n), 1.0, 1e-12);
    }
}

TEST(Ndcg, AllRelevantBelowCutoffIsZero) {
    const auto r = ranking_of({0, 1, 2, 3}, 4);
    const RelevanceMap rel({{2, 1.0}, {3, 0.5}}, {});
    EXPECT_EQ(ndcg_at_k(r, rel, 2), 0.0);
}

TEST(Ndcg, EmptyRelevanceIsZero) {
    const auto r = ranking_of({0, 1}, 2);
    EXPECT_EQ(ndcg_at_k(r, RelevanceMap({}, {}), 10), 0.0);
}

TEST(Ndcg, MatchesPermutationIdealOracle) {
    Rng rng(13);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 10;
        std::vector<double> scores(n);
        for (auto& s : scores) s = rng.uniform01();
        const auto r = rank(scores, {});
        std::vector<std::pair<ItemId, double>> entries;
        std::vector<double> weights;
        for (int i = 0; i < n && entries.size() < 7; ++i) {
            if (rng.uniform01() < 0.5) {
                const double w = rng.uniform01();
                entries.emplace_back(i, w);
                weights.push_back(w);
            }
        }
        if (entries.empty()) continue;
        const int k = 1 + static_cast<int>(rng.bounded(n));
        const RelevanceMap rel(entries, {});
        const double dcg = ranking_metric(r, rel, RewardFunction::dcg_log2(k));
        const double ideal = oracle::ideal_dcg_by_permutation(weights, k);
        if (ideal == 0.0) continue;
        EXPECT_NEAR(ndcg_at_k(r, rel, k), dcg / ideal, 1e-12);
        EXPECT_LE(ndcg_at_k(r, rel, k), 1.0 + 1e-12);
    }
}

TEST(Ndcg, InvariantUnderIrrelevantTailPermutation) {
    Rng rng(21);
    std::vector<ItemId> order{3, 1, 5, 0, 2, 4, 6, 7};
    const RelevanceMap rel({{3, 1.0}, {1, 0.4}}, {});
    const double base = ndcg_at_k(ranking_of(order, 8), rel, 8);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ItemId> tail(order.begin() + 2, order.end());
        rng.shuffle(tail);
        std::vector<ItemId> shuffled(order.begin(), order.begin() + 2);
        shuffled.insert(shuffled.end(), tail.begin(), tail.end());
        EXPECT_NE(base, 0.0);
        // relevant items stay at ranks 1..2; zero-relevance tail permutes freely
        EXPECT_DOUBLE_EQ(ndcg_at_k(ranking_of(shuffled, 8), rel, 8), base);
    }
}

TEST(Recall, AllRelevantInTopK) {
    const auto r = ranking_of({4, 2, 0, 1, 3}, 5);
    EXPECT_DOUBLE_EQ(recall_at_k(r, {2, 4}, 2), 1.0);
}

TEST(Recall, NoneInTopK) {
    const auto r = ranking_of({4, 2, 0, 1, 3}, 5);
    EXPECT_DOUBLE_EQ(recall_at_k(r, {1, 3}, 2), 0.0);
}

TEST(Recall, TwoOfFourInTopTwenty) {
    std::vector<ItemId> order(30);
    for (int i = 0; i < 30; ++i) order[static_cast<std::size_t>(i)] = i;
    // relevant items at ranks 1, 2, 25, 28
    const auto r = ranking_of(order, 30);
    EXPECT_DOUBLE_EQ(recall_at_k(r, {0, 1, 24, 27}, 20), 0.5);
}

TEST(Recall, EmptyRelevantSetIsZero) {
    const auto r = ranking_of({0, 1}, 2);
    EXPECT_EQ(recall_at_k(r, {}, 5), 0.0);
}

TEST(Prr, IdenticalInputsAreOne) {
    EXPECT_DOUBLE_EQ(prr(0.42, 0.42), 1.0);
}

TEST(Prr, PercentDisplayRounding) {
    // 0.375 retained of a 0.382 full-history mean displays as 98.2%
    const double ratio = prr(0.375, 0.382);
    EXPECT_NEAR(ratio, 0.982, 5e-4);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.1f%%", ratio * 100.0);
    EXPECT_STREQ(buf, "98.2%");
}

TEST(Prr, DegenerateFullMetricIsOne) {
    EXPECT_DOUBLE_EQ(prr(0.0, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(prr(0.3, 0.0), 1.0);
}

TEST(Prr, NegativeInputsRejected) {
    EXPECT_THROW(prr(-0.1, 0.5), ContractError);
    EXPECT_THROW(prr(0.1, -0.5), ContractError);
}

TEST(Prr, ScaleInvariant) {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const double x = rng.uniform01() + 1e-6;
        const double y = rng.uniform01() + 1e-6;
        const double c = rng.uniform01() * 10.0 + 1e-3;
        EXPECT_NEAR(prr(c * x, c * y), prr(x, y), 1e-12);
        EXPECT_DOUBLE_EQ(prr(x, x), 1.0);
    }
}
