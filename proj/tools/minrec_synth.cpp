// Generates a seeded synthetic rating log in the pipeline's input format.
// Items are clustered into genres so item-item models have real structure
// to learn; see include/minrec/synthetic.hpp.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "minrec/synthetic.hpp"

int main(int argc, char** argv) {
    CLI::App app{"synthetic implicit-feedback dataset generator"};

    minrec::SynthSpec spec;
    std::string out;
    app.add_option("--out", out, "output CSV path")->required();
    app.add_option("--users", spec.n_users, "number of users");
    app.add_option("--items", spec.n_items, "number of items");
    app.add_option("--genres", spec.n_genres, "number of item clusters");
    app.add_option("--mean-history", spec.mean_history, "mean raw rows per user");
    app.add_option("--seed", spec.seed, "generator seed");

    CLI11_PARSE(app, argc, argv);
    try {
        minrec::write_synthetic_interactions(out, spec);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[synth] %s\n", e.what());
        return 1;
    }
    return 0;
}
