#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "minrec/common.hpp"

namespace minrec {

struct ColumnSchema {
    std::string user = "user";
    std::string item = "item";
    std::string value = "value";
};

// Sparse user x item interaction table. Ids are dense indices assigned by
// first appearance; the external string ids are kept for audit output.
// Freshly loaded tables hold raw (possibly non-binary, possibly duplicated)
// values; after binarize() all values are exactly 1 and pairs are unique,
// and after filter_activity() every row and column is nonempty.
struct InteractionTable {
    struct Entry {
        ItemId item;
        double value;
    };

    std::vector<std::string> users;  // index -> external id
    std::vector<std::string> items;
    std::unordered_map<std::string, UserId> user_index;
    std::unordered_map<std::string, ItemId> item_index;
    std::vector<std::vector<Entry>> rows;  // per user, sorted by item after preprocessing

    int n_users() const { return static_cast<int>(users.size()); }
    int n_items() const { return static_cast<int>(items.size()); }

    std::size_t nnz() const {
        std::size_t n = 0;
        for (const auto& r : rows) n += r.size();
        return n;
    }

    UserId add_user(const std::string& ext) {
        auto it = user_index.find(ext);
        if (it != user_index.end()) return it->second;
        UserId id = static_cast<UserId>(users.size());
        users.push_back(ext);
        user_index.emplace(ext, id);
        rows.emplace_back();
        return id;
    }

    ItemId add_item(const std::string& ext) {
        auto it = item_index.find(ext);
        if (it != item_index.end()) return it->second;
        ItemId id = static_cast<ItemId>(items.size());
        items.push_back(ext);
        item_index.emplace(ext, id);
        return id;
    }

    ItemSet row_items(UserId u) const {
        ItemSet out;
        out.reserve(rows[u].size());
        for (const auto& e : rows[u]) out.push_back(e.item);
        return out;
    }

    // Column sums; with binary data these are the train popularity counts.
    std::vector<std::int64_t> item_counts() const {
        std::vector<std::int64_t> counts(items.size(), 0);
        for (const auto& r : rows)
            for (const auto& e : r) ++counts[e.item];
        return counts;
    }
};

namespace detail {

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(delim, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    for (auto& f : out) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        std::size_t i = 0;
        while (i < f.size() && f[i] == ' ') ++i;
        f.erase(0, i);
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e && !s.empty();
}

}  // namespace detail

// Reads delimited text with a header naming the user/item/value columns.
// Delimiter (comma or tab) is auto-detected from the header line. An extra
// timestamp column is ignored. Duplicate (user, item) rows are retained
// verbatim; binarize() deduplicates.
inline InteractionTable load_interactions(const std::string& path, const ColumnSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open interactions file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw SchemaError(path + ": empty file, no header");
    const char delim = header.find('\t') != std::string::npos ? '\t' : ',';
    auto cols = detail::split_line(header, delim);

    auto find_col = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        throw SchemaError(path + ": missing column '" + name + "' in header");
    };
    const int cu = find_col(schema.user);
    const int ci = find_col(schema.item);
    const int cv = find_col(schema.value);
    const std::size_t min_cols = static_cast<std::size_t>(std::max({cu, ci, cv})) + 1;

    InteractionTable table;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_line(line, delim);
        if (fields.size() < min_cols)
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected at least " +
                             std::to_string(min_cols) + " fields, got " + std::to_string(fields.size()));
        double value;
        if (!detail::parse_double(fields[cv], value))
            throw ParseError(path + ":" + std::to_string(lineno) + ": unparseable value '" + fields[cv] + "'");
        UserId u = table.add_user(fields[cu]);
        ItemId i = table.add_item(fields[ci]);
        table.rows[u].push_back({i, value});
    }
    return table;
}

// Keeps entries with value >= threshold as 1, drops the rest, and removes
// duplicate (user, item) pairs. Id maps are left untouched; empty rows or
// columns are only removed by filter_activity.
inline InteractionTable binarize(const InteractionTable& table, double positive_threshold) {
    if (positive_threshold < 0) throw ContractError("binarize: positive_threshold must be >= 0");
    InteractionTable out;
    out.users = table.users;
    out.items = table.items;
    out.user_index = table.user_index;
    out.item_index = table.item_index;
    out.rows.resize(table.rows.size());
    for (std::size_t u = 0; u < table.rows.size(); ++u) {
        ItemSet kept;
        for (const auto& e : table.rows[u])
            if (e.value >= positive_threshold) kept.push_back(e.item);
        std::sort(kept.begin(), kept.end());
        kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
        out.rows[u].reserve(kept.size());
        for (ItemId i : kept) out.rows[u].push_back({i, 1.0});
    }
    return out;
}

// Item filter then user filter, repeated to a fixed point; surviving ids are
// recompacted in their original order. Thresholds of zero keep everything.
inline InteractionTable filter_activity(const InteractionTable& table, int min_user_interactions,
                                        int min_item_interactions) {
    if (min_user_interactions < 0 || min_item_interactions < 0)
        throw ContractError("filter_activity: thresholds must be >= 0");

    std::vector<char> user_alive(table.rows.size(), 1);
    std::vector<char> item_alive(table.items.size(), 1);

    for (bool changed = true; changed;) {
        changed = false;
        std::vector<std::int64_t> item_count(table.items.size(), 0);
        for (std::size_t u = 0; u < table.rows.size(); ++u) {
            if (!user_alive[u]) continue;
            for (const auto& e : table.rows[u])
                if (item_alive[e.item]) ++item_count[e.item];
        }
        for (std::size_t i = 0; i < table.items.size(); ++i) {
            if (item_alive[i] && item_count[i] < min_item_interactions) {
                item_alive[i] = 0;
                changed = true;
            }
        }
        for (std::size_t u = 0; u < table.rows.size(); ++u) {
            if (!user_alive[u]) continue;
            std::int64_t cnt = 0;
            for (const auto& e : table.rows[u])
                if (item_alive[e.item]) ++cnt;
            if (cnt < min_user_interactions) {
                user_alive[u] = 0;
                changed = true;
            }
        }
    }

    InteractionTable out;
    std::vector<ItemId> item_map(table.items.size(), -1);
    for (std::size_t i = 0; i < table.items.size(); ++i)
        if (item_alive[i]) item_map[i] = out.add_item(table.items[i]);
    for (std::size_t u = 0; u < table.rows.size(); ++u) {
        if (!user_alive[u]) continue;
        UserId nu = out.add_user(table.users[u]);
        for (const auto& e : table.rows[u])
            if (item_alive[e.item]) out.rows[nu].push_back({item_map[e.item], e.value});
        std::sort(out.rows[nu].begin(), out.rows[nu].end(),
                  [](const auto& a, const auto& b) { return a.item < b.item; });
    }
    return out;
}

}  // namespace minrec
