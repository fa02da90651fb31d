// Command-line front end for the minimization pipeline. Every subcommand
// reads one declarative config file; --seed and --out override config keys
// so the manifest always reproduces the run.

#include <cstdio>
#include <functional>
#include <string>

#include <CLI11.hpp>

#include "minrec/config.hpp"
#include "minrec/pipeline.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_override;
    long long seed_override = -1;
};

minrec::RunConfig load_config(const CommonArgs& args) {
    minrec::KvFile kv = minrec::KvFile::load(args.config_path);
    if (!args.out_override.empty()) kv.set("out", args.out_override);
    if (args.seed_override >= 0) kv.set("seed", std::to_string(args.seed_override));
    return minrec::RunConfig::from_kv(kv);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--out", args.out_override, "override the output directory");
    cmd->add_option("--seed", args.seed_override, "override the master seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"performance-constrained inference-data minimization for implicit-feedback recommenders"};
    app.require_subcommand(1);

    CommonArgs args;
    struct Stage {
        const char* name;
        const char* description;
        std::function<void(const minrec::RunConfig&)> run;
    };
    const std::vector<Stage> stages = {
        {"prepare", "load, binarize, filter and split the dataset", minrec::cmd_prepare},
        {"fit", "grid-search and persist the recommendation model", minrec::cmd_fit},
        {"tune-gt", "tune the ground-truth estimator on the estimation split", minrec::cmd_tune_gt},
        {"minimize", "solve the per-user minimization problems", minrec::cmd_minimize},
        {"evaluate", "score minimized subsets against the hold-out test data", minrec::cmd_evaluate},
        {"report", "emit aggregate, stratified and test tables", minrec::cmd_report},
        {"all", "run the whole pipeline", minrec::cmd_all},
    };
    for (const auto& stage : stages) add_common(app.add_subcommand(stage.name, stage.description), args);

    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    try {
        const minrec::RunConfig config = load_config(args);
        for (const auto& stage : stages) {
            if (name == stage.name) {
                stage.run(config);
                return 0;
            }
        }
        std::fprintf(stderr, "[%s] unknown subcommand\n", name.c_str());
        return 2;
    } catch (const minrec::Error& e) {
        std::fprintf(stderr, "[%s/%s] %s\n", name.c_str(), e.stage().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "[%s] %s\n", name.c_str(), e.what());
        return 1;
    }
}
