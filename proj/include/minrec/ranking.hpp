#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "minrec/common.hpp"

namespace minrec {

// A total order over the unmasked items: `order` lists item indices best
// first, `positions` is the inverse map to 1-based ranks (0 for items that
// were masked out of the ranking).
struct Ranking {
    std::vector<ItemId> order;
    std::vector<std::int32_t> positions;

    int position_of(ItemId item) const { return positions[static_cast<std::size_t>(item)]; }
    int n_ranked() const { return static_cast<int>(order.size()); }
};

namespace detail {

// Shared tie rule: higher score first, lower item index among equals.
struct ScoreOrder {
    std::span<const double> scores;
    bool operator()(ItemId a, ItemId b) const {
        if (scores[static_cast<std::size_t>(a)] != scores[static_cast<std::size_t>(b)])
            return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
        return a < b;
    }
};

}  // namespace detail

// Full ranking of all items not in `masked` (sorted), descending score with
// ties broken by ascending item index.
inline Ranking rank(std::span<const double> scores, const ItemSet& masked) {
    Ranking r;
    r.positions.assign(scores.size(), 0);
    r.order.reserve(scores.size() - masked.size());
    for (ItemId i = 0; i < static_cast<ItemId>(scores.size()); ++i)
        if (!contains(masked, i)) r.order.push_back(i);
    std::sort(r.order.begin(), r.order.end(), detail::ScoreOrder{scores});
    for (std::size_t pos = 0; pos < r.order.size(); ++pos)
        r.positions[static_cast<std::size_t>(r.order[pos])] = static_cast<std::int32_t>(pos) + 1;
    return r;
}

// First k entries of rank(scores, masked).order without sorting the tail.
inline std::vector<ItemId> top_ranked(std::span<const double> scores, const ItemSet& masked, int k) {
    std::vector<ItemId> pool;
    pool.reserve(scores.size() - masked.size());
    for (ItemId i = 0; i < static_cast<ItemId>(scores.size()); ++i)
        if (!contains(masked, i)) pool.push_back(i);
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(std::max(k, 0)), pool.size());
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(kk), pool.end(),
                      detail::ScoreOrder{scores});
    pool.resize(kk);
    return pool;
}

}  // namespace minrec
