// duallag CLI: dataset preparation, single training runs, k-fold
// cross-validation, K/H sweeps and report emission.
//
// Exit codes: 0 success, 1 any failed experiment cell, 2 bad invocation or
// unreadable inputs.

#include "duallag/dataset.hpp"
#include "duallag/experiments.hpp"
#include "duallag/folds.hpp"
#include "duallag/model.hpp"
#include "duallag/synth.hpp"
#include "duallag/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace duallag;

struct CommonTrainFlags {
    std::string dataset;
    std::vector<std::string> variants = {"dual_laguerre"};
    TrainConfig cfg;
    std::string out;

    void attach(CLI::App* cmd, bool multi_variant) {
        cmd->add_option("--dataset", dataset, "Canonical container directory")
            ->required();
        auto* var = cmd->add_option("--variant", variants,
                                    "Model variant: cheby|laguerre|dual_laguerre");
        if (!multi_variant) var->expected(1);
        cmd->add_option("--k", cfg.num_terms, "Polynomial terms per branch (K)");
        cmd->add_option("--hidden", cfg.hidden, "Hidden width (H)");
        cmd->add_option("--lr", cfg.lr, "Adam learning rate");
        cmd->add_option("--weight-decay", cfg.weight_decay,
                        "L2 penalty on linear weights");
        cmd->add_option("--dropout", cfg.dropout_p, "Dropout probability");
        cmd->add_option("--epochs", cfg.epochs, "Training epochs");
        cmd->add_option("--seed", cfg.seed, "Base seed");
        cmd->add_option("--patience", cfg.patience,
                        "Early-stop epochs without val improvement (0 = off)");
        cmd->add_option("--out", out, "Output directory")->required();
    }

    std::vector<Variant> parsed_variants() const {
        std::vector<Variant> out_variants;
        for (const std::string& name : variants) {
            out_variants.push_back(parse_variant(name));
        }
        return out_variants;
    }
};

int cmd_prepare_data(const std::string& out, const std::string& fixture,
                     std::size_t n, std::size_t classes, double homophily,
                     double degree, std::size_t feature_dim, std::uint64_t seed,
                     double noise, std::size_t folds, std::uint64_t fold_seed) {
    GraphDataset ds;
    if (fixture == "twonode") {
        ds.num_nodes = 2;
        ds.edges = {{0, 1}};
        ds.feature_dim = 2;
        ds.features = {1.0, 0.0, 0.0, 1.0};
        ds.labels = {0, 1};
        ds.num_classes = 2;
    } else if (fixture.empty()) {
        ds = synth_graph(n, classes, homophily, degree, feature_dim, seed, noise);
    } else {
        std::cerr << "unknown fixture '" << fixture << "' (only: twonode)\n";
        return kExitBadSpec;
    }
    if (folds > 0) {
        std::vector<std::string> warnings;
        ds.splits = make_folds(ds.num_nodes, folds, {0.6, 0.2, 0.2}, fold_seed,
                               &ds.labels, &warnings);
        for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    }
    save_dataset(ds, out);
    std::cout << "wrote " << out << ": " << ds.num_nodes << " nodes, "
              << ds.edges.size() << " edges, " << ds.splits.size() << " splits";
    if (!ds.edges.empty() && fixture.empty()) {
        std::cout << ", edge homophily " << edge_homophily_ratio(ds);
    }
    std::cout << "\n";
    return kExitOk;
}

int cmd_train(const CommonTrainFlags& flags, int fold_index,
              const std::string& params_out) {
    GraphDataset ds = load_dataset(flags.dataset);
    TrainConfig cfg = flags.cfg;
    cfg.variant = parse_variant(flags.variants.at(0));

    SplitSet split;
    if (!ds.splits.empty()) {
        if (fold_index < 0 || static_cast<std::size_t>(fold_index) >= ds.splits.size()) {
            std::cerr << "fold " << fold_index << " out of range; container has "
                      << ds.splits.size() << " splits\n";
            return kExitBadSpec;
        }
        split = ds.splits[fold_index];
    } else {
        split = make_folds(ds.num_nodes, 1, {0.6, 0.2, 0.2}, cfg.seed, &ds.labels)
                    .at(0);
    }

    ParamSet trained;
    RunResult result = train_run(ds, split, cfg, &trained);

    std::filesystem::create_directories(flags.out);
    const std::string dataset_name =
        std::filesystem::path(flags.dataset).filename().string();
    const std::string stem =
        "run__" + dataset_name + "__" + variant_name(cfg.variant) + "__fold" +
        std::to_string(fold_index);
    {
        std::ofstream out(std::filesystem::path(flags.out) / (stem + ".json"));
        out << run_result_to_json(result, dataset_name, cfg.variant, fold_index, cfg);
    }
    write_curves_csv(result, std::filesystem::path(flags.out) /
                                 ("curves__" + dataset_name + "__" +
                                  variant_name(cfg.variant) + "__fold" +
                                  std::to_string(fold_index) + ".csv"));
    std::cout << "test_at_best_val " << result.test_at_best_val
              << " (best val epoch " << result.best_val_epoch << ")";
    if (result.learned_alpha_low) std::cout << " alpha_low " << *result.learned_alpha_low;
    if (result.learned_alpha_high) std::cout << " alpha_high " << *result.learned_alpha_high;
    std::cout << "\n";

    if (!params_out.empty()) {
        save_params(trained, params_out);
        std::cout << "saved parameters to " << params_out << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual adaptive Laguerre spectral-filter GNN experiments"};
    app.require_subcommand(1);

    // prepare-data
    auto* prep = app.add_subcommand(
        "prepare-data", "Generate a synthetic or fixture container");
    std::string prep_out, prep_fixture;
    std::size_t prep_n = 500, prep_classes = 4, prep_fdim = 16, prep_folds = 0;
    double prep_h = 0.8, prep_degree = 8.0, prep_noise = duallag::kSynthDefaultNoise;
    std::uint64_t prep_seed = 0, prep_fold_seed = 0;
    prep->add_option("--out", prep_out, "Container directory to write")->required();
    prep->add_option("--fixture", prep_fixture, "Named fixture (twonode)");
    prep->add_option("--nodes", prep_n, "Synthetic node count");
    prep->add_option("--classes", prep_classes, "Synthetic class count");
    prep->add_option("--homophily", prep_h, "Target edge homophily in [0,1]");
    prep->add_option("--degree", prep_degree, "Target mean degree");
    prep->add_option("--feature-dim", prep_fdim, "Feature dimension");
    prep->add_option("--seed", prep_seed, "Generator seed");
    prep->add_option("--noise", prep_noise, "Feature noise sigma");
    prep->add_option("--folds", prep_folds, "Embed this many 60/20/20 splits");
    prep->add_option("--fold-seed", prep_fold_seed, "Seed for embedded splits");

    // train
    auto* train = app.add_subcommand("train", "Single training run");
    CommonTrainFlags train_flags;
    train_flags.attach(train, /*multi_variant=*/false);
    int train_fold = 0;
    std::string train_params_out;
    train->add_option("--fold", train_fold, "Container split index to use");
    train->add_option("--save-params", train_params_out, "Checkpoint file");

    // cv
    auto* cv = app.add_subcommand("cv", "K-fold cross-validation");
    CommonTrainFlags cv_flags;
    cv_flags.attach(cv, /*multi_variant=*/true);
    std::size_t cv_folds = 10;
    bool cv_sequential = false;
    cv->add_option("--folds", cv_folds, "Fold count");
    cv->add_flag("--sequential", cv_sequential, "Run folds sequentially");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Sweep K or H");
    CommonTrainFlags sweep_flags;
    sweep_flags.attach(sweep, /*multi_variant=*/true);
    std::string sweep_axis_name;
    std::vector<int> sweep_values;
    std::size_t sweep_folds = 3;
    bool sweep_sequential = false;
    sweep->add_option("--axis", sweep_axis_name, "K or H")->required();
    sweep->add_option("--values", sweep_values, "Axis values in order")->required();
    sweep->add_option("--folds", sweep_folds, "Fold count per point");
    sweep->add_flag("--sequential", sweep_sequential, "Run folds sequentially");

    // report
    auto* report = app.add_subcommand("report", "Summarize a results directory");
    std::string report_dir;
    report->add_option("--results", report_dir, "Directory of run JSONs")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? duallag::kExitOk : duallag::kExitBadSpec;
    }

    try {
        if (prep->parsed()) {
            return cmd_prepare_data(prep_out, prep_fixture, prep_n, prep_classes,
                                    prep_h, prep_degree, prep_fdim, prep_seed,
                                    prep_noise, prep_folds, prep_fold_seed);
        }
        if (train->parsed()) {
            return cmd_train(train_flags, train_fold, train_params_out);
        }
        if (cv->parsed() || sweep->parsed()) {
            const CommonTrainFlags& flags = cv->parsed() ? cv_flags : sweep_flags;
            duallag::ExperimentSpec spec;
            spec.dataset_dir = flags.dataset;
            spec.variants = flags.parsed_variants();
            spec.base = flags.cfg;
            spec.out_dir = flags.out;
            if (cv->parsed()) {
                spec.folds = cv_folds;
                spec.parallel_folds = !cv_sequential;
            } else {
                spec.folds = sweep_folds;
                spec.parallel_folds = !sweep_sequential;
                if (sweep_axis_name == "K" || sweep_axis_name == "k") {
                    spec.k_sweep = sweep_values;
                } else if (sweep_axis_name == "H" || sweep_axis_name == "h") {
                    spec.h_sweep = sweep_values;
                } else {
                    std::cerr << "bad --axis '" << sweep_axis_name << "' (want K or H)\n";
                    return duallag::kExitBadSpec;
                }
                spec.variants = flags.parsed_variants();
            }
            return duallag::run_suite(spec, std::cout);
        }
        if (report->parsed()) {
            return duallag::emit_report(report_dir, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return duallag::kExitBadSpec;
    }
    return duallag::kExitBadSpec;
}
