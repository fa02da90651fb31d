#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "minrec/common.hpp"
#include "minrec/rng.hpp"

namespace minrec {

// Seeded generator for implicit-feedback style rating logs. Items are
// grouped into genres with a popularity skew inside each genre; every user
// mixes a handful of genres, and ratings land above the positive threshold
// more often for items from the user's stronger genres. The clustered
// structure gives item-item models real signal and histories real
// redundancy.
struct SynthSpec {
    int n_users = 610;
    int n_items = 2000;
    int n_genres = 30;
    double mean_history = 165.0;    // raw rows per user, lognormal
    double sigma_history = 0.55;
    int min_history = 8;
    int max_history = 1200;
    double noise_fraction = 0.15;   // exploration picks drawn uniformly from the catalog
    std::uint64_t seed = 1;
};

inline void write_synthetic_interactions(const std::string& path, const SynthSpec& spec) {
    if (spec.n_users < 1 || spec.n_items < 1 || spec.n_genres < 1 || spec.n_genres > spec.n_items)
        throw ContractError("synthetic: inconsistent spec");

    const int per_genre = spec.n_items / spec.n_genres;
    auto genre_lo = [&](int g) { return g * per_genre; };
    auto genre_hi = [&](int g) { return g == spec.n_genres - 1 ? spec.n_items : (g + 1) * per_genre; };

    // Zipf-ish popularity inside each genre; cumulative weights for sampling.
    std::vector<std::vector<double>> genre_cum(static_cast<std::size_t>(spec.n_genres));
    for (int g = 0; g < spec.n_genres; ++g) {
        auto& cum = genre_cum[static_cast<std::size_t>(g)];
        double total = 0.0;
        for (int i = genre_lo(g); i < genre_hi(g); ++i) {
            total += 1.0 / std::pow(static_cast<double>(i - genre_lo(g)) + 1.0, 0.8);
            cum.push_back(total);
        }
    }

    Rng rng = derive_rng(spec.seed, "synth");
    std::string out = "user,item,value,timestamp\n";
    long timestamp = 1600000000;

    const double mu = std::log(spec.mean_history) - spec.sigma_history * spec.sigma_history / 2.0;
    std::vector<char> seen(static_cast<std::size_t>(spec.n_items), 0);
    for (int u = 0; u < spec.n_users; ++u) {
        const int n_genres_u = 1 + static_cast<int>(rng.bounded(3));
        std::vector<int> genres;
        std::vector<double> weights;
        double wsum = 0.0, wmax = 0.0;
        while (static_cast<int>(genres.size()) < n_genres_u) {
            const int g = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(spec.n_genres)));
            if (std::find(genres.begin(), genres.end(), g) != genres.end()) continue;
            genres.push_back(g);
            const double w = 0.25 + rng.uniform01();
            weights.push_back(w);
            wsum += w;
            wmax = std::max(wmax, w);
        }

        int h = static_cast<int>(std::lround(std::exp(mu + spec.sigma_history * rng.gaussian())));
        h = std::clamp(h, spec.min_history, std::min(spec.max_history, spec.n_items / 2));

        std::fill(seen.begin(), seen.end(), 0);
        int produced = 0;
        int attempts = 0;
        while (produced < h && attempts < h * 30) {
            ++attempts;
            int item;
            double affinity;
            if (rng.uniform01() < spec.noise_fraction) {
                item = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(spec.n_items)));
                affinity = 0.45;  // exploration picks still get rated honestly
            } else {
                double pick = rng.uniform01() * wsum;
                std::size_t gi = 0;
                while (gi + 1 < weights.size() && pick > weights[gi]) {
                    pick -= weights[gi];
                    ++gi;
                }
                const int g = genres[gi];
                const auto& cum = genre_cum[static_cast<std::size_t>(g)];
                const double target = rng.uniform01() * cum.back();
                const auto it = std::lower_bound(cum.begin(), cum.end(), target);
                item = genre_lo(g) + static_cast<int>(it - cum.begin());
                affinity = weights[gi] / wmax;
            }
            if (seen[static_cast<std::size_t>(item)]) continue;
            seen[static_cast<std::size_t>(item)] = 1;
            ++produced;

            const bool liked = rng.uniform01() < 0.35 + 0.40 * affinity;
            const int rating = liked ? 4 + static_cast<int>(rng.bounded(2)) : 1 + static_cast<int>(rng.bounded(3));

            out += "u" + std::to_string(u) + ",i" + std::to_string(item) + "," + std::to_string(rating) + "," +
                   std::to_string(timestamp++) + "\n";
        }
    }
    write_file(path, out);
}

}  // namespace minrec
