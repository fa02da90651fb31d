#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "minrec/interactions.hpp"
#include "minrec/rng.hpp"

namespace minrec {

struct SplitSpec {
    int n_val_rec_users = 0;
    int n_val_est_users = 0;
    int n_test_users = 0;
    double fold_in_ratio = 0.8;
    std::uint64_t seed = 0;
};

struct UserSplit {
    UserId user;       // id in the preprocessed table
    ItemSet fold_in;   // sorted
    ItemSet hold_out;  // sorted
};

// Strong-generalization split: train / val_rec / val_est / test hold pairwise
// disjoint user sets, and every evaluation user's history is partitioned into
// fold-in and hold-out parts. `train_users` maps train rows back to ids in
// the source table; item ids keep the source table's index space.
struct Splits {
    InteractionTable train;
    std::vector<UserId> train_users;
    std::vector<UserSplit> val_rec, val_est, test;
};

// Users are sampled without replacement among those with >= 2 interactions;
// each sampled user's history is shuffled and cut at
// max(1, floor(fold_in_ratio * |H|)). Remaining users form train.
inline Splits split_strong_generalization(const InteractionTable& table, const SplitSpec& spec) {
    if (spec.fold_in_ratio <= 0.0 || spec.fold_in_ratio >= 1.0)
        throw SplitError("fold_in_ratio must lie in (0,1)");
    if (spec.n_val_rec_users < 0 || spec.n_val_est_users < 0 || spec.n_test_users < 0)
        throw SplitError("held-out user counts must be >= 0");

    const std::int64_t want =
        static_cast<std::int64_t>(spec.n_val_rec_users) + spec.n_val_est_users + spec.n_test_users;
    if (want >= table.n_users())
        throw SplitError("split needs " + std::to_string(want) + " held-out users but table has only " +
                         std::to_string(table.n_users()));

    std::vector<UserId> eligible;
    for (UserId u = 0; u < table.n_users(); ++u)
        if (table.rows[u].size() >= 2) eligible.push_back(u);
    if (static_cast<std::int64_t>(eligible.size()) < want)
        throw SplitError("only " + std::to_string(eligible.size()) +
                         " users have >= 2 interactions; need " + std::to_string(want));

    Rng rng = derive_rng(spec.seed, "split/users");
    rng.shuffle(eligible);

    std::vector<char> held(table.n_users(), 0);
    auto take = [&](int count, std::size_t offset) {
        std::vector<UserId> ids(eligible.begin() + offset, eligible.begin() + offset + count);
        std::sort(ids.begin(), ids.end());
        for (UserId u : ids) held[u] = 1;
        return ids;
    };
    auto ids_val_rec = take(spec.n_val_rec_users, 0);
    auto ids_val_est = take(spec.n_val_est_users, static_cast<std::size_t>(spec.n_val_rec_users));
    auto ids_test = take(spec.n_test_users, static_cast<std::size_t>(spec.n_val_rec_users) + spec.n_val_est_users);

    auto fold = [&](const std::vector<UserId>& ids) {
        std::vector<UserSplit> out;
        out.reserve(ids.size());
        for (UserId u : ids) {
            ItemSet history = table.row_items(u);
            Rng ur = derive_rng(spec.seed, "split/fold", static_cast<std::uint64_t>(u));
            ur.shuffle(history);
            auto n_in = static_cast<std::size_t>(
                std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(spec.fold_in_ratio *
                                                                               static_cast<double>(history.size())))));
            UserSplit us;
            us.user = u;
            us.fold_in.assign(history.begin(), history.begin() + n_in);
            us.hold_out.assign(history.begin() + n_in, history.end());
            std::sort(us.fold_in.begin(), us.fold_in.end());
            std::sort(us.hold_out.begin(), us.hold_out.end());
            out.push_back(std::move(us));
        }
        return out;
    };

    Splits splits;
    splits.val_rec = fold(ids_val_rec);
    splits.val_est = fold(ids_val_est);
    splits.test = fold(ids_test);

    splits.train.items = table.items;
    splits.train.item_index = table.item_index;
    for (UserId u = 0; u < table.n_users(); ++u) {
        if (held[u]) continue;
        UserId nu = splits.train.add_user(table.users[u]);
        splits.train.rows[nu] = table.rows[u];
        splits.train_users.push_back(u);
    }
    return splits;
}

namespace detail {

inline std::string join_items(const ItemSet& items) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) s.push_back(',');
        s += std::to_string(items[i]);
    }
    return s;
}

inline ItemSet parse_items(const std::string& s, const std::string& where) {
    ItemSet out;
    if (s.empty()) return out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = s.find(',', start);
        std::string tok = pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
        try {
            out.push_back(static_cast<ItemId>(std::stol(tok)));
        } catch (const std::exception&) {
            throw ParseError(where + ": bad item id '" + tok + "'");
        }
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline void write_user_split_file(const std::string& path, const std::vector<UserSplit>& splits) {
    std::string out;
    for (const auto& us : splits) {
        out += std::to_string(us.user);
        out.push_back('\t');
        out += join_items(us.fold_in);
        out.push_back('\t');
        out += join_items(us.hold_out);
        out.push_back('\n');
    }
    write_file(path, out);
}

inline std::vector<UserSplit> read_user_split_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split file: " + path);
    std::vector<UserSplit> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto where = path + ":" + std::to_string(lineno);
        auto fields = split_line(line, '\t');
        if (fields.size() != 3) throw ParseError(where + ": expected 3 tab-separated fields");
        UserSplit us;
        us.user = static_cast<UserId>(std::stol(fields[0]));
        us.fold_in = parse_items(fields[1], where);
        us.hold_out = parse_items(fields[2], where);
        out.push_back(std::move(us));
    }
    return out;
}

}  // namespace detail

// Split directory layout: train.csv (user,item,value in canonical ids),
// {val_rec,val_est,test}.tsv with lines user<TAB>fold_in<TAB>hold_out, and
// users.tsv / items.tsv mapping canonical ids back to external ids.
inline void save_splits(const std::string& dir, const Splits& splits, const InteractionTable& source) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::string train = "user,item,value\n";
    for (std::size_t r = 0; r < splits.train.rows.size(); ++r) {
        const UserId orig = splits.train_users[r];
        for (const auto& e : splits.train.rows[r]) {
            train += std::to_string(orig);
            train.push_back(',');
            train += std::to_string(e.item);
            train += ",1\n";
        }
    }
    write_file(dir + "/train.csv", train);

    detail::write_user_split_file(dir + "/val_rec.tsv", splits.val_rec);
    detail::write_user_split_file(dir + "/val_est.tsv", splits.val_est);
    detail::write_user_split_file(dir + "/test.tsv", splits.test);

    std::string users, items;
    for (std::size_t u = 0; u < source.users.size(); ++u)
        users += std::to_string(u) + "\t" + source.users[u] + "\n";
    for (std::size_t i = 0; i < source.items.size(); ++i)
        items += std::to_string(i) + "\t" + source.items[i] + "\n";
    write_file(dir + "/users.tsv", users);
    write_file(dir + "/items.tsv", items);
}

inline std::vector<std::string> load_id_map(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open id map: " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = detail::split_line(line, '\t');
        if (fields.size() != 2) throw ParseError(path + ": expected 2 fields per line");
        if (std::stol(fields[0]) != static_cast<long>(out.size()))
            throw ParseError(path + ": ids must be dense and ascending");
        out.push_back(fields[1]);
    }
    return out;
}

inline Splits load_splits(const std::string& dir) {
    auto users = load_id_map(dir + "/users.tsv");
    auto items = load_id_map(dir + "/items.tsv");

    Splits splits;
    splits.train.items = items;
    for (std::size_t i = 0; i < items.size(); ++i) splits.train.item_index.emplace(items[i], static_cast<ItemId>(i));

    std::ifstream in(dir + "/train.csv");
    if (!in) throw IoError("cannot open " + dir + "/train.csv");
    std::string line;
    std::getline(in, line);  // header
    UserId last = -1;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = detail::split_line(line, ',');
        if (fields.size() != 3) throw ParseError(dir + "/train.csv:" + std::to_string(lineno) + ": expected 3 fields");
        UserId orig = static_cast<UserId>(std::stol(fields[0]));
        ItemId item = static_cast<ItemId>(std::stol(fields[1]));
        if (orig != last) {
            splits.train.add_user(users.at(static_cast<std::size_t>(orig)));
            splits.train_users.push_back(orig);
            last = orig;
        }
        splits.train.rows.back().push_back({item, std::stod(fields[2])});
    }

    splits.val_rec = detail::read_user_split_file(dir + "/val_rec.tsv");
    splits.val_est = detail::read_user_split_file(dir + "/val_est.tsv");
    splits.test = detail::read_user_split_file(dir + "/test.tsv");
    return splits;
}

}  // namespace minrec
