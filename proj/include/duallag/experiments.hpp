#pragma once

#include "duallag/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace duallag {

/// One experiment suite: every requested (variant x fold) cell plus
/// optional K / H sweeps, written as JSON records, aggregate CSV tables and
/// per-run curve CSVs under `out_dir`. Outputs are pure functions of
/// (spec, dataset bytes, seed), so a re-run overwrites identically.
struct ExperimentSpec {
    std::filesystem::path dataset_dir;
    std::string dataset_name;  // table row label; defaults to the dir name
    std::vector<Variant> variants;
    TrainConfig base;
    std::size_t folds = 10;
    std::optional<std::vector<int>> k_sweep;
    std::optional<std::vector<int>> h_sweep;
    std::filesystem::path out_dir;
    bool parallel_folds = true;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitCellFailed = 1;
inline constexpr int kExitBadSpec = 2;

/// Runs the suite. Returns kExitOk, kExitCellFailed (any failed cell; the
/// failures are listed in failures.json) or kExitBadSpec (unreadable
/// dataset / unwritable output / empty variant list). Progress and errors
/// go to `log`.
int run_suite(const ExperimentSpec& spec, std::ostream& log);

/// Prints aligned mean +/- std accuracy and learned-alpha tables from the
/// run/summary JSONs under `results_dir`. Pure function of the inputs.
/// Returns kExitOk (including for "no results"); throws on malformed JSON,
/// naming the file.
int emit_report(const std::filesystem::path& results_dir, std::ostream& os);

// JSON / CSV codecs, exposed for tests and the report command.
std::string run_result_to_json(const RunResult& r, const std::string& dataset,
                               Variant variant, int fold, const TrainConfig& cfg);
std::string fold_summary_to_json(const FoldSummary& s, const std::string& dataset,
                                 Variant variant, const TrainConfig& cfg);
void write_curves_csv(const RunResult& r, const std::filesystem::path& path);

}  // namespace duallag
