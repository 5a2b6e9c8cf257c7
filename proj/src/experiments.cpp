#include "duallag/experiments.hpp"

#include "duallag/folds.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace duallag {

namespace {

using json = nlohmann::ordered_json;

json config_to_json(const TrainConfig& cfg) {
    return json{{"epochs", cfg.epochs},
                {"lr", cfg.lr},
                {"weight_decay", cfg.weight_decay},
                {"dropout", cfg.dropout_p},
                {"k", cfg.num_terms},
                {"hidden", cfg.hidden},
                {"seed", cfg.seed},
                {"patience", cfg.patience}};
}

json optional_to_json(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": unwritable");
    out << text;
    if (!out) throw std::runtime_error(path.string() + ": short write");
}

std::string fmt(double v, const char* spec = "%.6f") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

std::string run_result_to_json(const RunResult& r, const std::string& dataset,
                               Variant variant, int fold, const TrainConfig& cfg) {
    json j;
    j["schema"] = "duallag.run/1";
    j["dataset"] = dataset;
    j["variant"] = variant_name(variant);
    j["fold"] = fold;
    j["config"] = config_to_json(cfg);
    j["best_val_epoch"] = r.best_val_epoch;
    j["test_at_best_val"] = r.test_at_best_val;
    j["learned_alpha_low"] = optional_to_json(r.learned_alpha_low);
    j["learned_alpha_high"] = optional_to_json(r.learned_alpha_high);
    j["curves"] = json{{"train_loss", r.train_loss},
                       {"val_acc", r.val_acc},
                       {"test_acc", r.test_acc}};
    return j.dump(2) + "\n";
}

std::string fold_summary_to_json(const FoldSummary& s, const std::string& dataset,
                                 Variant variant, const TrainConfig& cfg) {
    json j;
    j["schema"] = "duallag.summary/1";
    j["dataset"] = dataset;
    j["variant"] = variant_name(variant);
    j["config"] = config_to_json(cfg);
    j["folds"] = s.folds.size();
    j["mean_test_acc"] = s.mean_acc;
    j["std_test_acc"] = s.std_acc;
    j["mean_alpha_low"] = optional_to_json(s.mean_alpha_low);
    j["mean_alpha_high"] = optional_to_json(s.mean_alpha_high);
    json per_fold = json::array();
    for (const RunResult& r : s.folds) per_fold.push_back(r.test_at_best_val);
    j["fold_test_acc"] = std::move(per_fold);
    return j.dump(2) + "\n";
}

void write_curves_csv(const RunResult& r, const std::filesystem::path& path) {
    std::ostringstream out;
    out << "epoch,train_loss,val_acc,test_acc\n";
    for (std::size_t e = 0; e < r.train_loss.size(); ++e) {
        out << e << "," << fmt(r.train_loss[e], "%.17g") << ","
            << fmt(r.val_acc[e], "%.17g") << "," << fmt(r.test_acc[e], "%.17g")
            << "\n";
    }
    write_text(path, out.str());
}

namespace {

struct CellOutcome {
    std::string cell;
    std::string error;  // empty = ok
};

std::string run_file_name(const std::string& dataset, Variant variant, int fold,
                          const std::string& axis_tag) {
    std::ostringstream name;
    name << "run__" << dataset << "__" << variant_name(variant);
    if (!axis_tag.empty()) name << "__" << axis_tag;
    name << "__fold" << fold << ".json";
    return name.str();
}

// One cross-validation cell: per-fold run JSONs, a summary JSON, and (for
// the base config only) per-fold curve CSVs.
FoldSummary emit_cv_cell(const GraphDataset& ds, const std::vector<SplitSet>& folds,
                         const TrainConfig& cfg, const std::string& dataset,
                         Variant variant, const std::string& axis_tag,
                         const std::filesystem::path& out_dir, bool parallel,
                         bool with_curves) {
    TrainConfig cell_cfg = cfg;
    cell_cfg.variant = variant;
    FoldSummary summary = cross_validate(ds, folds, cell_cfg, parallel);
    for (std::size_t f = 0; f < summary.folds.size(); ++f) {
        TrainConfig fold_cfg = cell_cfg;
        fold_cfg.seed = cell_cfg.seed + f;
        write_text(out_dir / run_file_name(dataset, variant, static_cast<int>(f), axis_tag),
                   run_result_to_json(summary.folds[f], dataset, variant,
                                      static_cast<int>(f), fold_cfg));
        if (with_curves) {
            std::ostringstream curve_name;
            curve_name << "curves__" << dataset << "__" << variant_name(variant)
                       << "__fold" << f << ".csv";
            write_curves_csv(summary.folds[f], out_dir / curve_name.str());
        }
    }
    std::ostringstream summary_name;
    summary_name << "summary__" << dataset << "__" << variant_name(variant);
    if (!axis_tag.empty()) summary_name << "__" << axis_tag;
    summary_name << ".json";
    write_text(out_dir / summary_name.str(),
               fold_summary_to_json(summary, dataset, variant, cell_cfg));
    return summary;
}

}  // namespace

int run_suite(const ExperimentSpec& spec, std::ostream& log) {
    if (spec.variants.empty()) {
        log << "bad spec: no variants requested\n";
        return kExitBadSpec;
    }
    GraphDataset ds;
    try {
        ds = load_dataset(spec.dataset_dir);
        spec.base.validate();
    } catch (const std::exception& e) {
        log << "bad spec: " << e.what() << "\n";
        return kExitBadSpec;
    }
    if (spec.folds < 1) {
        log << "bad spec: folds must be >= 1\n";
        return kExitBadSpec;
    }
    std::error_code ec;
    std::filesystem::create_directories(spec.out_dir, ec);
    if (ec) {
        log << "bad spec: cannot create " << spec.out_dir.string() << ": "
            << ec.message() << "\n";
        return kExitBadSpec;
    }
    const std::string dataset = spec.dataset_name.empty()
                                    ? spec.dataset_dir.filename().string()
                                    : spec.dataset_name;

    // Container splits are used when the dataset ships enough of them;
    // otherwise seeded 60/20/20 folds are generated.
    std::vector<SplitSet> folds;
    if (ds.splits.size() >= spec.folds) {
        folds.assign(ds.splits.begin(), ds.splits.begin() + spec.folds);
    } else {
        folds = make_folds(ds.num_nodes, spec.folds, {0.6, 0.2, 0.2},
                           spec.base.seed, &ds.labels);
    }

    std::vector<CellOutcome> outcomes;
    std::ostringstream accuracy_csv, alphas_csv, sweep_k_csv, sweep_h_csv;
    accuracy_csv << "dataset,variant,folds,mean_test_acc,std_test_acc\n";
    alphas_csv << "dataset,variant,mean_alpha_low,mean_alpha_high\n";
    sweep_k_csv << "dataset,variant,k,mean_test_acc,std_test_acc\n";
    sweep_h_csv << "dataset,variant,h,mean_test_acc,std_test_acc\n";

    for (Variant variant : spec.variants) {
        const std::string cell = "cv/" + variant_name(variant);
        try {
            FoldSummary s = emit_cv_cell(ds, folds, spec.base, dataset, variant,
                                         "", spec.out_dir, spec.parallel_folds,
                                         /*with_curves=*/true);
            accuracy_csv << dataset << "," << variant_name(variant) << ","
                         << s.folds.size() << "," << fmt(s.mean_acc) << ","
                         << fmt(s.std_acc) << "\n";
            alphas_csv << dataset << "," << variant_name(variant) << ","
                       << (s.mean_alpha_low ? fmt(*s.mean_alpha_low) : "") << ","
                       << (s.mean_alpha_high ? fmt(*s.mean_alpha_high) : "") << "\n";
            outcomes.push_back({cell, ""});
            log << cell << ": mean " << fmt(s.mean_acc) << " +/- "
                << fmt(s.std_acc) << "\n";
        } catch (const std::exception& e) {
            outcomes.push_back({cell, e.what()});
            log << cell << ": FAILED: " << e.what() << "\n";
        }
    }

    auto run_sweep = [&](SweepAxis axis, const std::vector<int>& values,
                         std::ostringstream& csv) {
        const char axis_letter = axis == SweepAxis::K ? 'K' : 'H';
        for (Variant variant : spec.variants) {
            for (int v : values) {
                std::ostringstream tag;
                tag << axis_letter << v;
                const std::string cell =
                    std::string("sweep/") + axis_letter + "/" +
                    variant_name(variant) + "/" + std::to_string(v);
                try {
                    TrainConfig cfg = spec.base;
                    if (axis == SweepAxis::K) {
                        cfg.num_terms = v;
                    } else {
                        cfg.hidden = v;
                    }
                    FoldSummary s = emit_cv_cell(ds, folds, cfg, dataset, variant,
                                                 tag.str(), spec.out_dir,
                                                 spec.parallel_folds,
                                                 /*with_curves=*/false);
                    csv << dataset << "," << variant_name(variant) << "," << v
                        << "," << fmt(s.mean_acc) << "," << fmt(s.std_acc) << "\n";
                    outcomes.push_back({cell, ""});
                    log << cell << ": mean " << fmt(s.mean_acc) << "\n";
                } catch (const std::exception& e) {
                    outcomes.push_back({cell, e.what()});
                    log << cell << ": FAILED: " << e.what() << "\n";
                }
            }
        }
    };
    if (spec.k_sweep) run_sweep(SweepAxis::K, *spec.k_sweep, sweep_k_csv);
    if (spec.h_sweep) run_sweep(SweepAxis::H, *spec.h_sweep, sweep_h_csv);

    write_text(spec.out_dir / "accuracy.csv", accuracy_csv.str());
    write_text(spec.out_dir / "alphas.csv", alphas_csv.str());
    if (spec.k_sweep) write_text(spec.out_dir / "sweep_k.csv", sweep_k_csv.str());
    if (spec.h_sweep) write_text(spec.out_dir / "sweep_h.csv", sweep_h_csv.str());

    json failures = json::array();
    for (const CellOutcome& o : outcomes) {
        if (!o.error.empty()) {
            failures.push_back(json{{"cell", o.cell}, {"error", o.error}});
        }
    }
    if (!failures.empty()) {
        json manifest;
        manifest["schema"] = "duallag.failures/1";
        manifest["failures"] = std::move(failures);
        write_text(spec.out_dir / "failures.json", manifest.dump(2) + "\n");
        return kExitCellFailed;
    }
    std::filesystem::remove(spec.out_dir / "failures.json", ec);
    return kExitOk;
}

namespace {

struct ReportRow {
    std::vector<double> accs;
    std::vector<double> alpha_low, alpha_high;
};

std::string fixed_width(const std::string& s, std::size_t w) {
    if (s.size() >= w) return s + "  ";
    return s + std::string(w - s.size(), ' ');
}

}  // namespace

int emit_report(const std::filesystem::path& results_dir, std::ostream& os) {
    std::vector<std::filesystem::path> files;
    if (std::filesystem::exists(results_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(results_dir)) {
            if (entry.path().extension() == ".json") files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    // Group runs by (dataset, variant, K, H); sweeps fall out naturally as
    // extra rows.
    std::map<std::tuple<std::string, std::string, int, int>, ReportRow> rows;
    for (const auto& file : files) {
        std::ifstream in(file);
        json j;
        try {
            j = json::parse(in);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(file.filename().string() +
                                     ": malformed JSON: " + e.what());
        }
        if (j.value("schema", "") != "duallag.run/1") continue;
        try {
            auto key = std::make_tuple(j.at("dataset").get<std::string>(),
                                       j.at("variant").get<std::string>(),
                                       j.at("config").at("k").get<int>(),
                                       j.at("config").at("hidden").get<int>());
            ReportRow& row = rows[key];
            row.accs.push_back(j.at("test_at_best_val").get<double>());
            if (!j.at("learned_alpha_low").is_null()) {
                row.alpha_low.push_back(j.at("learned_alpha_low").get<double>());
            }
            if (!j.at("learned_alpha_high").is_null()) {
                row.alpha_high.push_back(j.at("learned_alpha_high").get<double>());
            }
        } catch (const json::exception& e) {
            throw std::runtime_error(file.filename().string() +
                                     ": malformed run record: " + e.what());
        }
    }

    if (rows.empty()) {
        os << "no results\n";
        return kExitOk;
    }

    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };

    os << fixed_width("dataset", 20) << fixed_width("variant", 14)
       << fixed_width("K", 3) << fixed_width("H", 4) << fixed_width("folds", 5)
       << fixed_width("test_acc", 17) << fixed_width("alpha_low", 10)
       << "alpha_high\n";
    for (const auto& [key, row] : rows) {
        const auto& [dataset, variant, k, h] = key;
        const double mean = mean_of(row.accs);
        double stddev = 0.0;
        if (row.accs.size() > 1) {
            double sq = 0.0;
            for (double a : row.accs) sq += (a - mean) * (a - mean);
            stddev = std::sqrt(sq / static_cast<double>(row.accs.size() - 1));
        }
        os << fixed_width(dataset, 20) << fixed_width(variant, 14)
           << fixed_width(std::to_string(k), 3) << fixed_width(std::to_string(h), 4)
           << fixed_width(std::to_string(row.accs.size()), 5)
           << fixed_width(fmt(mean, "%.4f") + " +/- " + fmt(stddev, "%.4f"), 17)
           << fixed_width(row.alpha_low.empty() ? "-" : fmt(mean_of(row.alpha_low), "%.4f"), 10)
           << (row.alpha_high.empty() ? "-" : fmt(mean_of(row.alpha_high), "%.4f"))
           << "\n";
    }
    return kExitOk;
}

}  // namespace duallag
