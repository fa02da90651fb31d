#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "minrec/pipeline.hpp"
#include "minrec/synthetic.hpp"

#include "oracles.hpp"

using namespace minrec;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "minrec_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small but complete run: EASE on a 200-user clustered dataset.
RunConfig small_config(const fs::path& dir, const std::string& out_name) {
    const auto data = dir / "data.csv";
    if (!fs::exists(data)) {
        SynthSpec spec;
        spec.n_users = 200;
        spec.n_items = 240;
        spec.n_genres = 8;
        spec.mean_history = 34.0;
        spec.min_history = 10;
        spec.seed = 77;
        write_synthetic_interactions(data.string(), spec);
    }
    RunConfig c;
    c.data_path = data.string();
    c.positive_threshold = 4.0;
    c.min_user_interactions = 5;
    c.min_item_interactions = 1;
    c.n_val_rec_users = 20;
    c.n_val_est_users = 15;
    c.n_test_users = 12;
    c.model_kind = "ease";
    c.lambda_grid = {5.0};
    c.estimator_k_grid = {20, 50};
    c.estimator_gamma_grid = {-1.0, 1.0};
    c.estimator_n_probes = 10;
    c.beam_width = 3;
    c.etas = {0.9, 1.0};
    c.metric_cutoff = 50;
    c.recall_cutoffs = {10, 20};
    c.out_dir = (dir / out_name).string();
    c.seed = 4242;
    c.workers = 2;
    c.validate();
    return c;
}

std::string slurp(const fs::path& p) { return read_file(p.string()); }

}  // namespace

TEST(Config, ParsesFullKeySet) {
    const auto kv = KvFile::parse(
        "# comment\n"
        "data.path = /tmp/x.csv\n"
        "prep.positive_threshold = 4\n"
        "split.n_test_users = 9\n"
        "model.kind = itemknn\n"
        "model.k_grid = 10, 20\n"
        "minimize.algorithms = gr,gfs\n"
        "minimize.etas = 0.98,1\n"
        "out = /tmp/out\n"
        "seed = 7\n",
        "inline");
    const auto c = RunConfig::from_kv(kv);
    EXPECT_EQ(c.data_path, "/tmp/x.csv");
    EXPECT_EQ(c.positive_threshold, 4.0);
    EXPECT_EQ(c.n_test_users, 9);
    EXPECT_EQ(c.model_kind, "itemknn");
    EXPECT_EQ(c.k_grid, (std::vector<int>{10, 20}));
    ASSERT_EQ(c.minimizers.size(), 2u);
    EXPECT_EQ(c.minimizers[0], MinimizerKind::Gr);
    EXPECT_EQ(c.etas, (std::vector<double>{0.98, 1.0}));
    EXPECT_EQ(c.seed, 7u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    EXPECT_THROW(RunConfig::from_kv(KvFile::parse("data.path=x\nout=y\ntypo.key=1\n", "inline")), ConfigError);
    EXPECT_THROW(RunConfig::from_kv(KvFile::parse("data.path=x\nout=y\nminimize.etas=1.5\n", "inline")),
                 ConfigError);
    EXPECT_THROW(RunConfig::from_kv(KvFile::parse("data.path=x\nout=y\nminimize.algorithms=warp\n", "inline")),
                 ConfigError);
    EXPECT_THROW(RunConfig::from_kv(KvFile::parse("out=y\n", "inline")), ConfigError);  // data.path missing
}

TEST(Config, HashStableAcrossEquivalentSpellings) {
    const auto a = RunConfig::from_kv(KvFile::parse("data.path=x\nout=y\nseed = 7\n", "inline"));
    const auto b = RunConfig::from_kv(KvFile::parse("seed=7\n# hi\nout = y\ndata.path   =   x\n", "inline"));
    EXPECT_EQ(a.config_hash(), b.config_hash());
    const auto c = RunConfig::from_kv(KvFile::parse("data.path=x\nout=y\nseed=8\n", "inline"));
    EXPECT_NE(a.config_hash(), c.config_hash());
}

TEST(Synthetic, SameSeedSameBytes) {
    const auto dir = scratch_dir("synth");
    SynthSpec spec;
    spec.n_users = 50;
    spec.n_items = 120;
    spec.seed = 5;
    spec.mean_history = 20.0;
    write_synthetic_interactions((dir / "a.csv").string(), spec);
    write_synthetic_interactions((dir / "b.csv").string(), spec);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    spec.seed = 6;
    write_synthetic_interactions((dir / "c.csv").string(), spec);
    EXPECT_NE(slurp(dir / "a.csv"), slurp(dir / "c.csv"));
}

TEST(Pipeline, PrepareMissingFileNamesPath) {
    const auto dir = scratch_dir("prep_missing");
    RunConfig c;
    c.data_path = (dir / "nope.csv").string();
    c.out_dir = (dir / "out").string();
    try {
        cmd_prepare(c);
        FAIL() << "expected IoError";
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("nope.csv"), std::string::npos);
    }
}

TEST(Pipeline, ReportWithoutResultsIsError) {
    const auto dir = scratch_dir("report_missing");
    RunConfig c;
    c.data_path = "unused";
    c.out_dir = (dir / "out").string();
    EXPECT_THROW(cmd_report(c), IoError);
}

TEST(Pipeline, EndToEndSmallRun) {
    const auto dir = scratch_dir("e2e");
    const auto config = small_config(dir, "run");
    cmd_all(config);

    RunPaths paths{config.out_dir};

    // split counts match the config exactly
    const auto splits = load_splits(paths.splits_dir());
    EXPECT_EQ(splits.val_rec.size(), 20u);
    EXPECT_EQ(splits.val_est.size(), 15u);
    EXPECT_EQ(splits.test.size(), 12u);

    // manifest carries the tuned values and the config echo
    const auto manifest = load_manifest(paths);
    EXPECT_TRUE(manifest.has("estimator.K"));
    EXPECT_TRUE(manifest.has("estimator.gamma"));
    EXPECT_TRUE(manifest.has("data.checksum"));
    EXPECT_EQ(manifest.get("config.model.kind"), "ease");
    EXPECT_EQ(manifest.get("model.lambda"), "5");  // grid of one: that setting chosen

    // model file round-trips bit-exact
    const auto model = load_model(paths.model_file());
    save_model(paths.model_file() + ".copy", model);
    EXPECT_EQ(slurp(paths.model_file()), slurp(paths.model_file() + ".copy"));
    fs::remove(paths.model_file() + ".copy");

    // results: one row per (minimizer, eta, user)
    const auto rows = load_results(paths.results_csv());
    EXPECT_EQ(rows.size(), 7u * 2u * 12u);

    // subsets are contained in the fold-in sets and match results rows
    std::unordered_map<UserId, ItemSet> fold_in;
    for (const auto& us : splits.test) fold_in[us.user] = us.fold_in;
    for (MinimizerKind alg :
         {MinimizerKind::Rs, MinimizerKind::Gfs, MinimizerKind::Gbfs, MinimizerKind::Gr}) {
        for (const auto& eta : {std::string("0.9"), std::string("1")}) {
            const auto entries = detail::load_subsets_file(paths.subsets_file(alg, eta));
            ASSERT_EQ(entries.size(), 12u);
            for (const auto& [user, items] : entries)
                for (ItemId i : items) EXPECT_TRUE(contains(fold_in.at(user), i));
        }
    }

    // feasibility column is honest: recompute PRR >= eta for feasible rows
    for (const auto& r : rows) {
        if (r.feasible)
            EXPECT_GE(r.prr, r.eta - 1e-12);
        else
            EXPECT_LT(r.prr, r.eta - 1e-12);
        EXPECT_LE(static_cast<int>(r.subset_size), r.hist_size);
    }

    // report artifacts exist and parse
    EXPECT_TRUE(fs::exists(paths.report_dir() + "/aggregate.csv"));
    EXPECT_TRUE(fs::exists(paths.report_dir() + "/strata.csv"));
    EXPECT_TRUE(fs::exists(paths.report_dir() + "/mr_vs_history.csv"));
    EXPECT_TRUE(fs::exists(paths.report_dir() + "/test_eval.csv"));
    const auto report = slurp(paths.report_dir() + "/report.txt");
    EXPECT_NE(report.find("eta = 0.9"), std::string::npos);
    EXPECT_NE(report.find("stratified by history size"), std::string::npos);
    EXPECT_NE(report.find("hold-out test evaluation"), std::string::npos);
}

TEST(Pipeline, FitSelectsPlantedLambda) {
    // Thirty "bomb" items appear in every train history, so raw co-occurrence
    // (which is what EASE degenerates to as lambda -> infinity) ties them
    // with the true twin item and ranks all of them first by index. A
    // moderate lambda explains the bombs away and puts the twin on top, so
    // the validation NDCG gap is wide.
    const auto dir = scratch_dir("planted_lambda");
    const int n_bombs = 30;
    const int n_pairs = 40;
    InteractionTable table;
    for (int i = 0; i < n_bombs + 2 * n_pairs; ++i) table.add_item("i" + std::to_string(i));

    Rng rng(2024);
    Splits splits;
    splits.train.items = table.items;
    splits.train.item_index = table.item_index;
    for (int u = 0; u < 150; ++u) {
        table.add_user("t" + std::to_string(u));
        ItemSet history;
        for (int b = 0; b < n_bombs; ++b) history.push_back(b);
        const auto pairs = oracle::random_subset(rng, n_pairs, 6);
        for (ItemId p : pairs) {
            history.push_back(n_bombs + 2 * p);
            history.push_back(n_bombs + 2 * p + 1);
        }
        std::sort(history.begin(), history.end());
        const UserId uid = splits.train.add_user(table.users[static_cast<std::size_t>(u)]);
        for (ItemId i : history) splits.train.rows[uid].push_back({i, 1.0});
        splits.train_users.push_back(u);
    }
    for (int v = 0; v < 20; ++v) {
        UserSplit us;
        us.user = 150 + v;
        const auto pairs = oracle::random_subset(rng, n_pairs, 5);
        for (ItemId p : pairs) {
            us.fold_in.push_back(n_bombs + 2 * p);
            us.hold_out.push_back(n_bombs + 2 * p + 1);
        }
        std::sort(us.fold_in.begin(), us.fold_in.end());
        std::sort(us.hold_out.begin(), us.hold_out.end());
        splits.val_rec.push_back(us);
    }

    RunConfig c;
    c.data_path = "handmade";
    c.out_dir = (dir / "out").string();
    c.model_kind = "ease";
    c.lambda_grid = {1e9, 10.0};  // bad candidate first: selection must not default to grid order
    c.metric_cutoff = 50;
    fs::create_directories(c.out_dir);
    save_splits(RunPaths{c.out_dir}.splits_dir(), splits, table);

    cmd_fit(c);
    const auto manifest = load_manifest(RunPaths{c.out_dir});
    EXPECT_EQ(manifest.get("model.lambda"), "10");

    // the margin is wide, not a coin flip
    const auto loaded = load_splits(RunPaths{c.out_dir}.splits_dir());
    const double good = validation_ndcg(fit_ease(loaded.train, 10.0), loaded.val_rec, 50);
    const double bad = validation_ndcg(fit_ease(loaded.train, 1e9), loaded.val_rec, 50);
    EXPECT_GT(good, bad + 0.3) << "good=" << good << " bad=" << bad;
}

TEST(Pipeline, DeterministicAcrossRerunsAndWorkerCounts) {
    const auto dir = scratch_dir("determinism");
    auto a = small_config(dir, "run_a");
    cmd_all(a);
    auto b = small_config(dir, "run_b");
    b.workers = 1;  // worker count must not affect any artifact
    cmd_all(b);

    RunPaths pa{a.out_dir}, pb{b.out_dir};
    EXPECT_EQ(slurp(pa.results_csv()), slurp(pb.results_csv()));
    EXPECT_EQ(slurp(pa.model_file()), slurp(pb.model_file()));
    for (const char* f : {"/aggregate.csv", "/strata.csv", "/mr_vs_history.csv", "/test_eval.csv", "/report.txt"})
        EXPECT_EQ(slurp(pa.report_dir() + f), slurp(pb.report_dir() + f)) << f;
    // identical config hash and, since out/workers are not echoed, identical manifests
    EXPECT_EQ(slurp(pa.manifest()), slurp(pb.manifest()));
}

TEST(Pipeline, ResumeAfterInterruptionMatchesUninterrupted) {
    const auto dir = scratch_dir("resume");
    auto config = small_config(dir, "run");
    cmd_all(config);
    RunPaths paths{config.out_dir};
    const std::string full_results = slurp(paths.results_csv());

    // Simulate a kill partway through: keep 40% of the rows plus a torn line,
    // and truncate one subsets file even harder.
    {
        std::vector<std::string> lines;
        std::size_t start = 0;
        while (start < full_results.size()) {
            auto end = full_results.find('\n', start);
            if (end == std::string::npos) break;
            lines.push_back(full_results.substr(start, end - start));
            start = end + 1;
        }
        const std::size_t keep = 1 + (lines.size() - 1) * 2 / 5;
        std::string torn;
        for (std::size_t i = 0; i < keep; ++i) torn += lines[i] + "\n";
        torn += lines[keep].substr(0, lines[keep].size() / 2);  // partial row, no newline
        write_file(paths.results_csv(), torn);

        const auto sf = paths.subsets_file(config.minimizers.front(), "0.9");
        const std::string subs = slurp(sf);
        write_file(sf, subs.substr(0, subs.size() / 3));
    }

    cmd_minimize(config);
    EXPECT_EQ(slurp(paths.results_csv()), full_results);

    // resuming a finished run is a no-op
    cmd_minimize(config);
    EXPECT_EQ(slurp(paths.results_csv()), full_results);
}

TEST(Report, MatchesReviewedGoldenFiles) {
#ifndef MINREC_GOLDEN_DIR
    GTEST_SKIP() << "golden dir not provided";
#else
    const auto dir = scratch_dir("golden_report");
    RunConfig c;
    c.data_path = "fixture";
    c.out_dir = (dir / "run").string();
    c.minimizers = {MinimizerKind::Gfs, MinimizerKind::Gr};
    c.etas = {0.95, 1.0};
    c.strata_bins = 3;
    c.model_kind = "itemknn";
    fs::create_directories(c.out_dir);

    // deterministic fixture rows: MR and SE rise with history size
    RunPaths paths{c.out_dir};
    std::ofstream results(paths.results_csv());
    results << kResultsHeader << '\n';
    for (MinimizerKind alg : c.minimizers) {
        for (double eta : c.etas) {
            for (int u = 0; u < 12; ++u) {
                ResultRow row;
                row.user = u;
                row.model = "itemknn";
                row.minimizer = alg;
                row.eta = eta;
                row.hist_size = 10 + 10 * u;
                row.subset_size = alg == MinimizerKind::Gr ? (row.hist_size * (4 + u)) / 24 : row.hist_size - u;
                row.se = static_cast<std::uint64_t>(50 * (u + 1) * (alg == MinimizerKind::Gr ? 1 : 3));
                row.metric_full = 0.5 + 0.01 * u;
                row.metric_min = row.metric_full * (eta == 1.0 ? 1.0 : 0.96 + 0.003 * u);
                row.prr = row.metric_min / row.metric_full;
                row.feasible = row.prr >= eta - 1e-12;
                results << render_result_row(row, format_double(eta)) << '\n';
            }
        }
    }
    results.close();

    cmd_report(c);
    for (const char* name : {"report.txt", "aggregate.csv", "strata.csv", "mr_vs_history.csv"}) {
        const auto got = slurp(fs::path(paths.report_dir()) / name);
        const auto want = slurp(fs::path(MINREC_GOLDEN_DIR) / name);
        EXPECT_EQ(got, want) << name;
    }
#endif
}

TEST(Cli, BinaryRunsAndTagsErrors) {
#ifndef MINREC_CLI_PATH
    GTEST_SKIP() << "CLI path not provided";
#else
    const auto dir = scratch_dir("cli");
    const auto config = small_config(dir, "run");
    // write the config file the binary will read
    config.to_kv().save((dir / "run.cfg").string());

    const std::string cli = MINREC_CLI_PATH;
    const std::string redirect = " >" + (dir / "stdout.txt").string() + " 2>" + (dir / "stderr.txt").string();
    EXPECT_EQ(std::system((cli + " prepare --config " + (dir / "run.cfg").string() + redirect).c_str()), 0);
    EXPECT_TRUE(fs::exists(fs::path(config.out_dir) / "splits" / "train.csv"));

    // fit before prepare in a fresh out dir: nonzero exit, stage-tagged stderr
    const int code = std::system(
        (cli + " fit --config " + (dir / "run.cfg").string() + " --out " + (dir / "fresh").string() + redirect)
            .c_str());
    EXPECT_NE(code, 0);
    const auto err = slurp(dir / "stderr.txt");
    EXPECT_NE(err.find("[fit"), std::string::npos) << err;

    // unknown option: CLI11 usage error
    EXPECT_NE(std::system((cli + " prepare --bogus" + redirect).c_str()), 0);
#endif
}
