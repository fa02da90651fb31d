#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "minrec/metrics.hpp"
#include "minrec/models.hpp"
#include "minrec/rng.hpp"

namespace minrec {

// Absolute tolerance absorbing floating-point noise when comparing PRR
// against eta.
inline constexpr double kFeasibilityTol = 1e-12;

enum class MinimizerKind { Rs, Lp, Mp, EmbSim, Gfs, Gbfs, Gr };

inline const char* minimizer_name(MinimizerKind k) {
    switch (k) {
        case MinimizerKind::Rs: return "rs";
        case MinimizerKind::Lp: return "lp";
        case MinimizerKind::Mp: return "mp";
        case MinimizerKind::EmbSim: return "embsim";
        case MinimizerKind::Gfs: return "gfs";
        case MinimizerKind::Gbfs: return "gbfs";
        case MinimizerKind::Gr: return "gr";
    }
    return "?";
}

inline MinimizerKind minimizer_from_name(const std::string& name) {
    for (MinimizerKind k : {MinimizerKind::Rs, MinimizerKind::Lp, MinimizerKind::Mp, MinimizerKind::EmbSim,
                            MinimizerKind::Gfs, MinimizerKind::Gbfs, MinimizerKind::Gr})
        if (name == minimizer_name(k)) return k;
    throw ConfigError("unknown minimizer '" + name + "'");
}

// One per-user instance of the performance-constrained problem. metric_full
// is evaluated once at setup (one inference on the full history, attributed
// to the setup counter, not to any minimizer's SE).
struct MinimizationProblem {
    const ItemModel* model = nullptr;
    ItemSet history;  // the fold-in set, sorted
    RelevanceMap relevance;
    RewardFunction reward = RewardFunction::dcg_log2(100);
    double eta = 1.0;

    double ideal = 0.0;  // normalizer: best attainable raw metric
    double metric_full = 0.0;
};

struct MinimizationResult {
    ItemSet subset;
    std::uint64_t se = 0;
    double metric_full = 0.0;
    double metric_min = 0.0;
    double prr = 0.0;
    bool feasible = false;
};

namespace detail {

// Best attainable metric: weights sorted descending matched to ranks
// 1..cutoff (rearrangement bound, exact for non-increasing phi).
inline double ideal_metric(const RelevanceMap& relevance, const RewardFunction& phi) {
    std::vector<double> w = relevance.weights();
    std::sort(w.begin(), w.end(), std::greater<>());
    const std::size_t n = std::min<std::size_t>(w.size(), static_cast<std::size_t>(std::max(phi.cutoff, 0)));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += w[i] * phi(static_cast<int>(i) + 1);
    return sum;
}

// Shared evaluation kernel with reusable scratch buffers: one counted
// inference, rank with only the input masked, normalized metric value.
class SubsetEvaluator {
public:
    SubsetEvaluator(const MinimizationProblem& problem, InferenceCounter& counter)
        : problem_(problem), counter_(counter) {}

    double eval(const ItemSet& subset) {
        infer_into(*problem_.model, subset, counter_, scores_);
        pool_.clear();
        for (ItemId i = 0; i < static_cast<ItemId>(scores_.size()); ++i)
            if (!contains(subset, i)) pool_.push_back(i);
        const auto kk = std::min<std::size_t>(pool_.size(), static_cast<std::size_t>(std::max(problem_.reward.cutoff, 0)));
        std::partial_sort(pool_.begin(), pool_.begin() + static_cast<std::ptrdiff_t>(kk), pool_.end(),
                          ScoreOrder{scores_});
        double raw = 0.0;
        for (std::size_t pos = 0; pos < kk; ++pos) {
            const double w = problem_.relevance.weight_of(pool_[pos]);
            if (w != 0.0) raw += w * problem_.reward(static_cast<int>(pos) + 1);
        }
        return problem_.ideal == 0.0 ? 0.0 : raw / problem_.ideal;
    }

private:
    const MinimizationProblem& problem_;
    InferenceCounter& counter_;
    std::vector<double> scores_;
    std::vector<ItemId> pool_;
};

inline bool feasible(const MinimizationProblem& problem, double metric) {
    return prr(metric, problem.metric_full) >= problem.eta - kFeasibilityTol;
}

inline MinimizationResult make_result(const MinimizationProblem& problem, ItemSet subset, double metric,
                                      std::uint64_t se) {
    MinimizationResult r;
    r.subset = std::move(subset);
    r.se = se;
    r.metric_full = problem.metric_full;
    r.metric_min = metric;
    r.prr = prr(metric, problem.metric_full);
    r.feasible = r.prr >= problem.eta - kFeasibilityTol;
    return r;
}

inline void insert_sorted(ItemSet& set, ItemId item) {
    set.insert(std::upper_bound(set.begin(), set.end(), item), item);
}

}  // namespace detail

inline MinimizationProblem make_problem(const ItemModel& model, ItemSet history, RelevanceMap relevance,
                                        RewardFunction reward, double eta, InferenceCounter& setup_counter) {
    if (eta < 0.0 || eta > 1.0) throw ContractError("minimize: eta must lie in [0,1]");
    if (history.empty()) throw ContractError("minimize: history must be nonempty");
    MinimizationProblem p;
    p.model = &model;
    p.history = std::move(history);
    p.relevance = std::move(relevance);
    p.reward = reward;
    p.eta = eta;
    p.ideal = detail::ideal_metric(p.relevance, p.reward);
    detail::SubsetEvaluator ev(p, setup_counter);
    p.metric_full = ev.eval(p.history);
    return p;
}

// One counted inference on I; rank with only I masked; normalized metric
// against the problem's relevance.
inline double eval_subset(const MinimizationProblem& problem, const ItemSet& subset, InferenceCounter& counter) {
    for (ItemId i : subset)
        if (!contains(problem.history, i))
            throw ContractError("eval_subset: item " + std::to_string(i) + " outside the history");
    detail::SubsetEvaluator ev(problem, counter);
    return ev.eval(subset);
}

struct HeuristicInputs {
    const std::vector<std::int64_t>* train_popularity = nullptr;  // MP / LP
    std::uint64_t rs_seed = 0;                                    // RS
};

namespace detail {

inline double row_dot(const ItemModel& model, ItemId row, const std::vector<double>& v) {
    double sum = 0.0;
    if (model.is_dense()) {
        const double* r = model.dense.data() + static_cast<std::size_t>(row) * model.n_items;
        for (std::int32_t j = 0; j < model.n_items; ++j) sum += r[j] * v[static_cast<std::size_t>(j)];
    } else {
        for (std::int64_t p = model.row_ptr[row]; p < model.row_ptr[row + 1]; ++p)
            sum += model.val[static_cast<std::size_t>(p)] * v[static_cast<std::size_t>(model.col[static_cast<std::size_t>(p)])];
    }
    return sum;
}

// Fixed probe order for each heuristic. RS shuffles, MP/LP sort by train
// popularity, EmbSim scores each history item's embedding (its row of B)
// against the user embedding (sum of history rows).
inline ItemSet heuristic_order(const MinimizationProblem& problem, MinimizerKind kind, const HeuristicInputs& inputs) {
    ItemSet order = problem.history;
    switch (kind) {
        case MinimizerKind::Rs: {
            Rng rng(inputs.rs_seed);
            rng.shuffle(order);
            break;
        }
        case MinimizerKind::Mp:
        case MinimizerKind::Lp: {
            if (inputs.train_popularity == nullptr)
                throw ContractError("minimize_heuristic: popularity counts required for MP/LP");
            const auto& pop = *inputs.train_popularity;
            const bool desc = kind == MinimizerKind::Mp;
            std::sort(order.begin(), order.end(), [&](ItemId a, ItemId b) {
                const auto pa = pop[static_cast<std::size_t>(a)];
                const auto pb = pop[static_cast<std::size_t>(b)];
                if (pa != pb) return desc ? pa > pb : pa < pb;
                return a < b;
            });
            break;
        }
        case MinimizerKind::EmbSim: {
            std::vector<double> user_emb(static_cast<std::size_t>(problem.model->n_items), 0.0);
            for (ItemId i : problem.history) problem.model->add_row(i, user_emb);
            std::vector<double> score(order.size());
            for (std::size_t t = 0; t < order.size(); ++t) score[t] = row_dot(*problem.model, order[t], user_emb);
            std::vector<std::size_t> idx(order.size());
            for (std::size_t t = 0; t < idx.size(); ++t) idx[t] = t;
            std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
                if (score[a] != score[b]) return score[a] > score[b];
                return order[a] < order[b];
            });
            ItemSet sorted(order.size());
            for (std::size_t t = 0; t < idx.size(); ++t) sorted[t] = order[idx[t]];
            order = std::move(sorted);
            break;
        }
        default:
            throw ContractError("heuristic_order: not a heuristic minimizer");
    }
    return order;
}

}  // namespace detail

// Probes the empty set, then ever longer prefixes of the heuristic order,
// returning the first feasible prefix. SE = 1 + index of that prefix.
inline MinimizationResult minimize_heuristic(const MinimizationProblem& problem, MinimizerKind kind,
                                             const HeuristicInputs& inputs, InferenceCounter& counter) {
    const ItemSet order = detail::heuristic_order(problem, kind, inputs);
    detail::SubsetEvaluator ev(problem, counter);
    std::uint64_t se = 0;

    double metric = ev.eval({});
    ++se;
    if (detail::feasible(problem, metric)) return detail::make_result(problem, {}, metric, se);

    ItemSet prefix;
    for (ItemId item : order) {
        detail::insert_sorted(prefix, item);
        metric = ev.eval(prefix);
        ++se;
        if (detail::feasible(problem, metric)) return detail::make_result(problem, prefix, metric, se);
    }
    return detail::make_result(problem, prefix, metric, se);  // prefix == history here
}

// Greedy forward selection: evaluates every single-item addition each round,
// adds the argmax (ties to the lower item index), and stops once the chosen
// set satisfies the constraint.
inline MinimizationResult minimize_gfs(const MinimizationProblem& problem, InferenceCounter& counter) {
    detail::SubsetEvaluator ev(problem, counter);
    std::uint64_t se = 0;

    double metric = ev.eval({});
    ++se;
    if (detail::feasible(problem, metric)) return detail::make_result(problem, {}, metric, se);

    ItemSet chosen;
    ItemSet remaining = problem.history;
    ItemSet candidate;
    while (!remaining.empty()) {
        ItemId best_item = -1;
        double best_metric = -std::numeric_limits<double>::infinity();
        for (ItemId item : remaining) {
            candidate = chosen;
            detail::insert_sorted(candidate, item);
            const double m = ev.eval(candidate);
            ++se;
            if (m > best_metric) {
                best_metric = m;
                best_item = item;
            }
        }
        detail::insert_sorted(chosen, best_item);
        remaining.erase(std::find(remaining.begin(), remaining.end(), best_item));
        metric = best_metric;
        if (detail::feasible(problem, metric)) return detail::make_result(problem, chosen, metric, se);
    }
    return detail::make_result(problem, chosen, metric, se);  // chosen == history
}

// Beam variant of GFS. Candidates are deduplicated across beam members;
// ties are broken toward the lexicographically smallest item set, which
// makes L = 1 reproduce minimize_gfs exactly.
inline MinimizationResult minimize_gbfs(const MinimizationProblem& problem, int beam_width,
                                        InferenceCounter& counter) {
    if (beam_width < 1) throw ContractError("minimize_gbfs: beam width must be >= 1");
    detail::SubsetEvaluator ev(problem, counter);
    std::uint64_t se = 0;

    double metric = ev.eval({});
    ++se;
    if (detail::feasible(problem, metric)) return detail::make_result(problem, {}, metric, se);

    std::vector<ItemSet> beam{ItemSet{}};
    ItemSet last = problem.history;
    double last_metric = metric;
    for (;;) {
        std::vector<ItemSet> candidates;
        for (const auto& member : beam)
            for (ItemId item : problem.history) {
                if (contains(member, item)) continue;
                ItemSet child = member;
                detail::insert_sorted(child, item);
                candidates.push_back(std::move(child));
            }
        if (candidates.empty()) return detail::make_result(problem, last, last_metric, se);
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

        std::vector<double> metrics(candidates.size());
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            metrics[c] = ev.eval(candidates[c]);
            ++se;
        }
        std::vector<std::size_t> by_rank(candidates.size());
        for (std::size_t c = 0; c < by_rank.size(); ++c) by_rank[c] = c;
        std::sort(by_rank.begin(), by_rank.end(), [&](std::size_t a, std::size_t b) {
            if (metrics[a] != metrics[b]) return metrics[a] > metrics[b];
            return a < b;  // candidates are lex-sorted, so index order is lex order
        });

        const std::size_t best = by_rank.front();
        if (detail::feasible(problem, metrics[best]))
            return detail::make_result(problem, candidates[best], metrics[best], se);

        const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(beam_width), by_rank.size());
        std::vector<ItemSet> next;
        next.reserve(keep);
        for (std::size_t c = 0; c < keep; ++c) next.push_back(candidates[by_rank[c]]);
        beam = std::move(next);
        last = candidates[best];
        last_metric = metrics[best];
    }
}

// Greedy Removal: starts from the full history and repeatedly removes the
// item whose removal keeps the constraint satisfied with the highest
// resulting metric (strict improvement scan in ascending item order).
// Every intermediate subset is feasible, so the search can stop anywhere.
inline MinimizationResult minimize_gr(const MinimizationProblem& problem, InferenceCounter& counter,
                                      std::vector<ItemSet>* trace = nullptr) {
    detail::SubsetEvaluator ev(problem, counter);
    std::uint64_t se = 0;

    ItemSet current = problem.history;
    double current_metric = problem.metric_full;
    ItemSet candidate;
    for (;;) {
        ItemId best_item = -1;
        double max_perf = -std::numeric_limits<double>::infinity();
        for (ItemId item : current) {
            candidate.clear();
            candidate.reserve(current.size() - 1);
            for (ItemId other : current)
                if (other != item) candidate.push_back(other);
            const double m = ev.eval(candidate);
            ++se;
            if (prr(m, problem.metric_full) >= problem.eta - kFeasibilityTol && m > max_perf) {
                max_perf = m;
                best_item = item;
            }
        }
        if (best_item < 0) break;
        current.erase(std::find(current.begin(), current.end(), best_item));
        current_metric = max_perf;
        if (trace != nullptr) trace->push_back(current);
        if (current.empty()) break;
    }
    return detail::make_result(problem, current, current_metric, se);
}

// Per-minimizer knobs used by the unified dispatch.
struct MinimizerParams {
    HeuristicInputs heuristic;
    int beam_width = 5;
};

inline MinimizationResult run_minimizer(MinimizerKind kind, const MinimizationProblem& problem,
                                        const MinimizerParams& params, InferenceCounter& counter) {
    switch (kind) {
        case MinimizerKind::Rs:
        case MinimizerKind::Lp:
        case MinimizerKind::Mp:
        case MinimizerKind::EmbSim:
            return minimize_heuristic(problem, kind, params.heuristic, counter);
        case MinimizerKind::Gfs:
            return minimize_gfs(problem, counter);
        case MinimizerKind::Gbfs:
            return minimize_gbfs(problem, params.beam_width, counter);
        case MinimizerKind::Gr:
            return minimize_gr(problem, counter);
    }
    throw ContractError("run_minimizer: unknown kind");
}

}  // namespace minrec
