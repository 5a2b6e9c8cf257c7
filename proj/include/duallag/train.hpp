#pragma once

#include "duallag/dataset.hpp"
#include "duallag/laplacian.hpp"
#include "duallag/model.hpp"
#include "duallag/tensor.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace duallag {

struct TrainConfig {
    int epochs = 200;
    double lr = 0.01;
    double weight_decay = 5e-4;  // L2 on linear weights only, in the loss
    double dropout_p = 0.5;
    int num_terms = 3;  // K
    int hidden = 16;    // H
    Variant variant = Variant::dual_laguerre;
    std::uint64_t seed = 0;
    int patience = 0;  // early-stop epochs without val improvement; 0 = off

    void validate() const;
    ModelConfig model_config(const GraphDataset& ds) const;
};

/// Everything one training run produces. wall_time_sec is diagnostic only:
/// it is excluded from serialized output and from determinism comparisons.
struct RunResult {
    std::vector<double> train_loss;
    std::vector<double> val_acc;
    std::vector<double> test_acc;
    int best_val_epoch = 0;         // argmax val acc, earliest on ties
    double test_at_best_val = 0.0;  // test curve at best_val_epoch
    std::optional<double> learned_alpha_low;
    std::optional<double> learned_alpha_high;
    double wall_time_sec = 0.0;
};

/// Field-exact comparison of the deterministic payload (wall time ignored).
bool run_results_equal(const RunResult& a, const RunResult& b);

struct FoldSummary {
    std::vector<RunResult> folds;
    double mean_acc = 0.0;
    double std_acc = 0.0;  // sample std dev; 0 for a single fold
    std::optional<double> mean_alpha_low;
    std::optional<double> mean_alpha_high;
};

/// Aggregates per-fold results into mean / sample-std / mean alphas.
FoldSummary summarize(std::vector<RunResult> folds);

/// Fraction of masked rows whose argmax class (ties -> lowest class id)
/// equals the label. Throws on an empty mask.
double evaluate_accuracy(const Tensor& log_probs,
                         const std::vector<std::uint32_t>& labels,
                         const std::vector<std::uint32_t>& mask);

/// Full-batch deterministic training: per epoch a training-mode forward,
/// masked NLL plus weight_decay * 0.5 * ||W||^2 (linear weights only; never
/// thetas or biases), backward, Adam step, then an eval-mode pass for the
/// val/test curves. Aborts with epoch diagnostics on a non-finite loss.
/// When `trained` is non-null the final parameters are copied out.
RunResult train_run(const GraphDataset& ds, const SplitSet& split,
                    const TrainConfig& cfg, ParamSet* trained = nullptr);

/// As train_run but with prebuilt operators (shared across folds).
RunResult train_run(const GraphDataset& ds, const GraphOperators& ops,
                    const SplitSet& split, const TrainConfig& cfg,
                    ParamSet* trained = nullptr);

/// One train_run per fold with seed = cfg.seed + fold index. With
/// `parallel` set the folds run concurrently; results are identical to
/// sequential execution (each run owns its tape, optimizer and rng).
FoldSummary cross_validate(const GraphDataset& ds,
                           const std::vector<SplitSet>& folds,
                           const TrainConfig& cfg, bool parallel = false);

enum class SweepAxis { K, H };

struct SweepPoint {
    int value = 0;
    FoldSummary summary;
};

/// cross_validate once per axis value, everything else held fixed, emitted
/// in value order.
std::vector<SweepPoint> sweep_axis(const GraphDataset& ds,
                                   const std::vector<SplitSet>& folds,
                                   const TrainConfig& base_cfg, SweepAxis axis,
                                   const std::vector<int>& values,
                                   bool parallel = false);

}  // namespace duallag
