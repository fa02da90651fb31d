#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minrec/common.hpp"
#include "minrec/interactions.hpp"
#include "minrec/ranking.hpp"

namespace minrec {

enum class ModelKind : std::uint8_t { Ease = 1, ItemKnn = 2 };

inline const char* model_kind_name(ModelKind k) { return k == ModelKind::Ease ? "ease" : "itemknn"; }

// Counts model inference calls; this is the raw quantity behind the sample
// efficiency numbers. Each minimization task owns a private counter, so no
// synchronization is needed during search.
struct InferenceCounter {
    std::uint64_t count = 0;
};

// Item-item weight matrix B. EASE keeps a dense row-major matrix (n^2 memory;
// keep item counts modest), ItemKNN a CSR matrix where row i lists the
// columns j for which i is one of j's top-k neighbors.
struct ItemModel {
    ModelKind kind = ModelKind::Ease;
    std::int32_t n_items = 0;

    std::vector<double> dense;  // row-major n x n, EASE only

    std::vector<std::int64_t> row_ptr;  // CSR, ItemKNN only
    std::vector<ItemId> col;
    std::vector<double> val;

    double lambda = 0.0;  // EASE
    std::int32_t knn_k = 0;  // ItemKNN

    bool is_dense() const { return kind == ModelKind::Ease; }

    double weight(ItemId row, ItemId column) const {
        if (is_dense()) return dense[static_cast<std::size_t>(row) * n_items + column];
        for (std::int64_t p = row_ptr[row]; p < row_ptr[row + 1]; ++p)
            if (col[static_cast<std::size_t>(p)] == column) return val[static_cast<std::size_t>(p)];
        return 0.0;
    }

    // scores += B[row, :]
    void add_row(ItemId row, std::vector<double>& scores) const {
        if (is_dense()) {
            const double* r = dense.data() + static_cast<std::size_t>(row) * n_items;
            for (std::int32_t j = 0; j < n_items; ++j) scores[static_cast<std::size_t>(j)] += r[j];
        } else {
            for (std::int64_t p = row_ptr[row]; p < row_ptr[row + 1]; ++p)
                scores[static_cast<std::size_t>(col[static_cast<std::size_t>(p)])] += val[static_cast<std::size_t>(p)];
        }
    }
};

// Closed-form EASE: P = (X^T X + lambda I)^-1, B = I - P diag(1/diag(P)),
// then the diagonal is pinned to exactly zero.
inline ItemModel fit_ease(const InteractionTable& train, double lambda) {
    if (lambda <= 0.0) throw ContractError("fit_ease: lambda must be > 0");
    if (train.nnz() == 0) throw ContractError("fit_ease: train table is empty");

    const int n = train.n_items();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (const auto& row : train.rows) {
        for (const auto& a : row)
            for (const auto& b : row) gram(a.item, b.item) += a.value * b.value;
    }
    gram.diagonal().array() += lambda;

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericError("fit_ease: factorization of X^T X + lambda I failed");
    Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(n, n));

    ItemModel model;
    model.kind = ModelKind::Ease;
    model.n_items = n;
    model.lambda = lambda;
    model.dense.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            model.dense[static_cast<std::size_t>(i) * n + j] = -p(i, j) / p(j, j);
        }
    }
    return model;
}

// Cosine similarity between item columns with per-column top-k pruning
// (self excluded, ties to the lower item index). Zero-norm columns yield
// all-zero similarities.
inline ItemModel fit_itemknn(const InteractionTable& train, int k, const std::string& similarity = "cosine") {
    if (k < 1) throw ContractError("fit_itemknn: k must be >= 1");
    if (similarity != "cosine") throw ContractError("fit_itemknn: unsupported similarity '" + similarity + "'");

    const int n = train.n_items();
    // Co-occurrence dot products via user rows; cost is the sum of squared
    // history lengths, fine for the desk-scale data this artifact targets.
    std::vector<std::vector<std::pair<ItemId, double>>> cooc(static_cast<std::size_t>(n));
    std::vector<double> norm_sq(static_cast<std::size_t>(n), 0.0);
    {
        std::vector<std::vector<std::pair<ItemId, double>>> by_item(static_cast<std::size_t>(n));
        for (const auto& row : train.rows) {
            for (const auto& a : row) norm_sq[static_cast<std::size_t>(a.item)] += a.value * a.value;
            for (const auto& a : row)
                for (const auto& b : row)
                    if (a.item != b.item) by_item[static_cast<std::size_t>(a.item)].emplace_back(b.item, a.value * b.value);
        }
        for (int i = 0; i < n; ++i) {
            auto& pairs = by_item[static_cast<std::size_t>(i)];
            std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
            auto& merged = cooc[static_cast<std::size_t>(i)];
            for (const auto& [j, v] : pairs) {
                if (!merged.empty() && merged.back().first == j)
                    merged.back().second += v;
                else
                    merged.emplace_back(j, v);
            }
        }
    }

    // Top-k neighbors per column j; entry (i, sim) means column j is scored
    // through row i.
    std::vector<std::vector<std::pair<ItemId, double>>> column_neighbors(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        if (norm_sq[static_cast<std::size_t>(j)] == 0.0) continue;
        std::vector<std::pair<ItemId, double>> cands;  // (neighbor i, similarity)
        cands.reserve(cooc[static_cast<std::size_t>(j)].size());
        for (const auto& [i, dot] : cooc[static_cast<std::size_t>(j)]) {
            if (norm_sq[static_cast<std::size_t>(i)] == 0.0) continue;
            const double sim =
                dot / (std::sqrt(norm_sq[static_cast<std::size_t>(i)]) * std::sqrt(norm_sq[static_cast<std::size_t>(j)]));
            if (sim != 0.0) cands.emplace_back(i, sim);
        }
        std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (cands.size() > static_cast<std::size_t>(k)) cands.resize(static_cast<std::size_t>(k));
        column_neighbors[static_cast<std::size_t>(j)] = std::move(cands);
    }

    // Transpose into CSR rows.
    std::vector<std::vector<std::pair<ItemId, double>>> row_entries(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        for (const auto& [i, sim] : column_neighbors[static_cast<std::size_t>(j)])
            row_entries[static_cast<std::size_t>(i)].emplace_back(j, sim);

    ItemModel model;
    model.kind = ModelKind::ItemKnn;
    model.n_items = n;
    model.knn_k = k;
    model.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& entries = row_entries[static_cast<std::size_t>(i)];
        std::sort(entries.begin(), entries.end());
        model.row_ptr[static_cast<std::size_t>(i) + 1] =
            model.row_ptr[static_cast<std::size_t>(i)] + static_cast<std::int64_t>(entries.size());
        for (const auto& [j, sim] : entries) {
            model.col.push_back(j);
            model.val.push_back(sim);
        }
    }
    return model;
}

// scores = characteristic_vector(input) . B; empty input yields all zeros.
// Exactly one counter increment per call.
inline void infer_into(const ItemModel& model, std::span<const ItemId> input, InferenceCounter& counter,
                       std::vector<double>& scores) {
    ++counter.count;
    scores.assign(static_cast<std::size_t>(model.n_items), 0.0);
    for (ItemId i : input) model.add_row(i, scores);
}

inline std::vector<double> infer(const ItemModel& model, std::span<const ItemId> input, InferenceCounter& counter) {
    std::vector<double> scores;
    infer_into(model, input, counter, scores);
    return scores;
}

// --- persistence ------------------------------------------------------------
// Binary container, little-endian, bit-exact round trip.

inline constexpr char kModelMagic[8] = {'M', 'I', 'N', 'R', 'E', 'C', '0', '1'};

inline void save_model(const std::string& path, const ItemModel& model) {
    std::string out;
    out.append(kModelMagic, 8);
    out.push_back(static_cast<char>(model.kind));
    out.push_back(model.is_dense() ? 1 : 2);
    put_f64le(out, model.lambda);
    put_u32le(out, static_cast<std::uint32_t>(model.knn_k));
    put_u32le(out, static_cast<std::uint32_t>(model.n_items));
    if (model.is_dense()) {
        for (double d : model.dense) put_f64le(out, d);
    } else {
        put_u64le(out, static_cast<std::uint64_t>(model.col.size()));
        for (std::int64_t p : model.row_ptr) put_u64le(out, static_cast<std::uint64_t>(p));
        for (ItemId c : model.col) put_u32le(out, static_cast<std::uint32_t>(c));
        for (double v : model.val) put_f64le(out, v);
    }
    write_file(path, out);
}

inline ItemModel load_model(const std::string& path) {
    const std::string blob = read_file(path);
    ByteReader r(blob.data(), blob.size());
    if (r.bytes(8) != std::string(kModelMagic, 8)) throw IoError(path + ": bad magic, not a model file");
    ItemModel model;
    model.kind = static_cast<ModelKind>(r.u8());
    const std::uint8_t payload = r.u8();
    model.lambda = r.f64le();
    model.knn_k = static_cast<std::int32_t>(r.u32le());
    model.n_items = static_cast<std::int32_t>(r.u32le());
    if (payload == 1) {
        model.dense.resize(static_cast<std::size_t>(model.n_items) * static_cast<std::size_t>(model.n_items));
        for (auto& d : model.dense) d = r.f64le();
    } else if (payload == 2) {
        const auto nnz = r.u64le();
        model.row_ptr.resize(static_cast<std::size_t>(model.n_items) + 1);
        for (auto& p : model.row_ptr) p = static_cast<std::int64_t>(r.u64le());
        model.col.resize(nnz);
        for (auto& c : model.col) c = static_cast<ItemId>(r.u32le());
        model.val.resize(nnz);
        for (auto& v : model.val) v = r.f64le();
    } else {
        throw IoError(path + ": unknown payload kind");
    }
    if (!r.done()) throw IoError(path + ": trailing bytes");
    return model;
}

}  // namespace minrec
