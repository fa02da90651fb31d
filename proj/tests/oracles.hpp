// Independent reference implementations used as test oracles. Everything in
// here is deliberately written the slow, obvious way and must not share code
// with the implementation paths it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "minrec/interactions.hpp"
#include "minrec/minimize.hpp"
#include "minrec/models.hpp"
#include "minrec/rng.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

// Gauss-Jordan with partial pivoting.
inline Matrix invert(Matrix a) {
    const std::size_t n = a.size();
    Matrix inv = identity(n);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double d = a[col][col];
        for (std::size_t j = 0; j < n; ++j) {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

// EASE closed form computed entirely with the helpers above.
inline Matrix ease_weights(const Matrix& x, double lambda) {
    const std::size_t users = x.size();
    const std::size_t n = x[0].size();
    Matrix gram(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t u = 0; u < users; ++u) gram[i][j] += x[u][i] * x[u][j];
    for (std::size_t i = 0; i < n; ++i) gram[i][i] += lambda;
    Matrix p = invert(gram);
    Matrix b(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) b[i][j] = i == j ? 0.0 : -p[i][j] / p[j][j];
    return b;
}

// ||X - XB||_F^2 + lambda ||B||_F^2
inline double ridge_objective(const Matrix& x, const Matrix& b, double lambda) {
    const std::size_t users = x.size();
    const std::size_t n = x[0].size();
    double obj = 0.0;
    for (std::size_t u = 0; u < users; ++u) {
        for (std::size_t j = 0; j < n; ++j) {
            double pred = 0.0;
            for (std::size_t i = 0; i < n; ++i) pred += x[u][i] * b[i][j];
            const double resid = x[u][j] - pred;
            obj += resid * resid;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) obj += lambda * b[i][j] * b[i][j];
    return obj;
}

// All-pairs cosine over item columns, then a per-column top-k mask.
inline Matrix cosine_topk(const minrec::InteractionTable& train, int k) {
    const int n = train.n_items();
    Matrix dense(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (const auto& row : train.rows)
        for (const auto& a : row)
            for (const auto& b : row)
                dense[static_cast<std::size_t>(a.item)][static_cast<std::size_t>(b.item)] += a.value * b.value;

    Matrix sim(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double ni = dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            const double nj = dense[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            if (ni == 0.0 || nj == 0.0) continue;
            sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                dense[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / (std::sqrt(ni) * std::sqrt(nj));
        }
    }

    Matrix masked(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int j = 0; j < n; ++j) {
        std::vector<int> order;
        for (int i = 0; i < n; ++i)
            if (i != j && sim[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0.0) order.push_back(i);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double sa = sim[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)];
            const double sb = sim[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)];
            if (sa != sb) return sa > sb;
            return a < b;
        });
        for (int t = 0; t < static_cast<int>(order.size()) && t < k; ++t)
            masked[static_cast<std::size_t>(order[t])][static_cast<std::size_t>(j)] =
                sim[static_cast<std::size_t>(order[t])][static_cast<std::size_t>(j)];
    }
    return masked;
}

// Term-by-term ranking metric walking the order list.
inline double metric_sum(const std::vector<minrec::ItemId>& order,
                         const std::vector<std::pair<minrec::ItemId, double>>& relevance,
                         const std::function<double(int)>& phi) {
    double sum = 0.0;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        for (const auto& [item, w] : relevance)
            if (item == order[pos]) sum += w * phi(static_cast<int>(pos) + 1);
    }
    return sum;
}

// Best possible DCG@k by brute force over all placements of the support.
inline double ideal_dcg_by_permutation(std::vector<double> weights, int k) {
    std::sort(weights.begin(), weights.end());
    double best = 0.0;
    do {
        double dcg = 0.0;
        for (std::size_t pos = 0; pos < weights.size() && pos < static_cast<std::size_t>(k); ++pos)
            dcg += weights[pos] / std::log2(static_cast<double>(pos) + 2.0);
        best = std::max(best, dcg);
    } while (std::next_permutation(weights.begin(), weights.end()));
    return best;
}

// Smallest feasible subset size by enumerating all 2^|H| subsets.
struct ExhaustiveResult {
    std::size_t min_size = 0;
    bool any_feasible = false;
};

inline ExhaustiveResult exhaustive_min_subset(const minrec::MinimizationProblem& problem) {
    const auto& h = problem.history;
    ExhaustiveResult result;
    result.min_size = h.size() + 1;
    minrec::InferenceCounter counter;
    for (std::uint64_t mask = 0; mask < (1ull << h.size()); ++mask) {
        minrec::ItemSet subset;
        for (std::size_t i = 0; i < h.size(); ++i)
            if (mask & (1ull << i)) subset.push_back(h[i]);
        const double m = minrec::eval_subset(problem, subset, counter);
        if (minrec::prr(m, problem.metric_full) >= problem.eta - minrec::kFeasibilityTol) {
            result.any_feasible = true;
            result.min_size = std::min(result.min_size, subset.size());
        }
    }
    return result;
}

// --- random instance helpers -------------------------------------------------

inline minrec::ItemModel random_dense_model(minrec::Rng& rng, int n_items) {
    minrec::ItemModel model;
    model.kind = minrec::ModelKind::Ease;
    model.n_items = n_items;
    model.dense.assign(static_cast<std::size_t>(n_items) * n_items, 0.0);
    for (int i = 0; i < n_items; ++i)
        for (int j = 0; j < n_items; ++j)
            if (i != j)
                model.dense[static_cast<std::size_t>(i) * n_items + j] = rng.uniform01() * 2.0 - 0.5;
    return model;
}

inline minrec::ItemSet random_subset(minrec::Rng& rng, int n_items, int size) {
    minrec::ItemSet all(static_cast<std::size_t>(n_items));
    for (int i = 0; i < n_items; ++i) all[static_cast<std::size_t>(i)] = i;
    rng.shuffle(all);
    all.resize(static_cast<std::size_t>(size));
    std::sort(all.begin(), all.end());
    return all;
}

struct RandomProblemSpec {
    int n_items = 16;
    int hist_size = 8;
    double eta = 0.9;
    int metric_cutoff = 10;
};

// Bundles the model with the problem referencing it.
struct OwnedProblem {
    std::unique_ptr<minrec::ItemModel> model;
    minrec::MinimizationProblem problem;
};

inline OwnedProblem random_problem(minrec::Rng& rng, const RandomProblemSpec& spec) {
    auto model = std::make_unique<minrec::ItemModel>(random_dense_model(rng, spec.n_items));
    minrec::ItemSet history = random_subset(rng, spec.n_items, spec.hist_size);

    std::vector<std::pair<minrec::ItemId, double>> entries;
    for (int i = 0; i < spec.n_items; ++i) {
        if (minrec::contains(history, i)) continue;
        if (rng.uniform01() < 0.6) entries.emplace_back(i, 0.05 + 0.95 * rng.uniform01());
    }
    minrec::RelevanceMap relevance(std::move(entries), history);

    minrec::InferenceCounter setup;
    OwnedProblem owned;
    owned.problem = minrec::make_problem(*model, std::move(history), std::move(relevance),
                                         minrec::RewardFunction::dcg_log2(spec.metric_cutoff), spec.eta, setup);
    owned.model = std::move(model);
    return owned;
}

}  // namespace oracle
