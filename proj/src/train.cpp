#include "duallag/train.hpp"

#include "duallag/adam.hpp"
#include "duallag/filters.hpp"
#include "duallag/ops.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace duallag {

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (lr <= 0.0) throw std::invalid_argument("train: lr must be > 0");
    if (weight_decay < 0.0) throw std::invalid_argument("train: weight_decay must be >= 0");
    if (patience < 0) throw std::invalid_argument("train: patience must be >= 0");
}

ModelConfig TrainConfig::model_config(const GraphDataset& ds) const {
    ModelConfig mc;
    mc.variant = variant;
    mc.num_terms = num_terms;
    mc.hidden = hidden;
    mc.feature_dim = ds.feature_dim;
    mc.num_classes = ds.num_classes;
    mc.dropout_p = dropout_p;
    mc.validate();
    return mc;
}

bool run_results_equal(const RunResult& a, const RunResult& b) {
    return a.train_loss == b.train_loss && a.val_acc == b.val_acc &&
           a.test_acc == b.test_acc && a.best_val_epoch == b.best_val_epoch &&
           a.test_at_best_val == b.test_at_best_val &&
           a.learned_alpha_low == b.learned_alpha_low &&
           a.learned_alpha_high == b.learned_alpha_high;
}

FoldSummary summarize(std::vector<RunResult> folds) {
    if (folds.empty()) throw std::invalid_argument("summarize: no folds");
    FoldSummary s;
    s.folds = std::move(folds);
    const double n = static_cast<double>(s.folds.size());
    double acc_sum = 0.0;
    for (const RunResult& r : s.folds) acc_sum += r.test_at_best_val;
    s.mean_acc = acc_sum / n;
    if (s.folds.size() > 1) {
        double sq = 0.0;
        for (const RunResult& r : s.folds) {
            const double d = r.test_at_best_val - s.mean_acc;
            sq += d * d;
        }
        s.std_acc = std::sqrt(sq / (n - 1.0));
    }
    bool all_low = true, all_high = true;
    for (const RunResult& r : s.folds) {
        all_low = all_low && r.learned_alpha_low.has_value();
        all_high = all_high && r.learned_alpha_high.has_value();
    }
    if (all_low) {
        double sum = 0.0;
        for (const RunResult& r : s.folds) sum += *r.learned_alpha_low;
        s.mean_alpha_low = sum / n;
    }
    if (all_high) {
        double sum = 0.0;
        for (const RunResult& r : s.folds) sum += *r.learned_alpha_high;
        s.mean_alpha_high = sum / n;
    }
    return s;
}

double evaluate_accuracy(const Tensor& log_probs,
                         const std::vector<std::uint32_t>& labels,
                         const std::vector<std::uint32_t>& mask) {
    if (mask.empty()) throw std::invalid_argument("evaluate_accuracy: empty mask");
    std::size_t correct = 0;
    const std::size_t n = log_probs.cols();
    for (std::uint32_t id : mask) {
        if (id >= log_probs.rows() || id >= labels.size()) {
            throw std::invalid_argument("evaluate_accuracy: mask id out of range");
        }
        // Strict comparison keeps the lowest class id on ties.
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j) {
            if (log_probs.at(id, j) > log_probs.at(id, best)) best = j;
        }
        if (best == labels[id]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(mask.size());
}

RunResult train_run(const GraphDataset& ds, const GraphOperators& ops,
                    const SplitSet& split, const TrainConfig& cfg,
                    ParamSet* trained) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    const ModelConfig mc = cfg.model_config(ds);
    const Tensor x = Tensor::from_values(ds.num_nodes, ds.feature_dim, ds.features);
    ParamSet params = init_params(mc, cfg.seed);
    Adam adam(params.all(), AdamConfig{.lr = cfg.lr});
    // Dropout draws from its own stream so the mask sequence is independent
    // of the init draws but still fully determined by the run seed.
    RngStream dropout_rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 0x51AFE);

    RunResult result;
    double best_val = -1.0;
    int epochs_since_best = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Tape tape;
        Tensor log_probs = model_forward(tape, ops, x, params, mc, true, &dropout_rng);
        Tensor loss = nll_masked(tape, log_probs, ds.labels, split.train_ids);
        if (cfg.weight_decay > 0.0) {
            // L2 on the linear weights only; thetas and biases stay free.
            Tensor penalty = add(tape, sum_squares(tape, params.w1),
                                 sum_squares(tape, params.w2));
            loss = add(tape, loss, affine(tape, penalty, 0.5 * cfg.weight_decay, 0.0));
        }
        const double loss_value = loss.item();
        if (!std::isfinite(loss_value)) {
            std::ostringstream msg;
            msg << "train_run: non-finite loss " << loss_value << " at epoch "
                << epoch << " (variant " << variant_name(cfg.variant)
                << ", seed " << cfg.seed << ")";
            throw std::runtime_error(msg.str());
        }
        tape.backward(loss);
        adam.step();

        Tape eval_tape;
        eval_tape.set_grad_enabled(false);
        Tensor eval_probs = model_forward(eval_tape, ops, x, params, mc, false, nullptr);
        const double val = evaluate_accuracy(eval_probs, ds.labels, split.val_ids);
        const double test = evaluate_accuracy(eval_probs, ds.labels, split.test_ids);

        result.train_loss.push_back(loss_value);
        result.val_acc.push_back(val);
        result.test_acc.push_back(test);

        if (val > best_val) {
            best_val = val;
            result.best_val_epoch = epoch;
            epochs_since_best = 0;
        } else {
            ++epochs_since_best;
        }
        if (cfg.patience > 0 && epochs_since_best >= cfg.patience) break;
    }

    result.test_at_best_val = result.test_acc[result.best_val_epoch];
    if (params.theta_low) {
        result.learned_alpha_low = alpha_of(params.theta_low->item());
    }
    if (params.theta_high) {
        result.learned_alpha_high = alpha_of(params.theta_high->item());
    }
    result.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (trained) *trained = params;
    return result;
}

RunResult train_run(const GraphDataset& ds, const SplitSet& split,
                    const TrainConfig& cfg, ParamSet* trained) {
    const GraphOperators ops = build_operators(ds);
    return train_run(ds, ops, split, cfg, trained);
}

FoldSummary cross_validate(const GraphDataset& ds,
                           const std::vector<SplitSet>& folds,
                           const TrainConfig& cfg, bool parallel) {
    if (folds.empty()) throw std::invalid_argument("cross_validate: no folds");
    const GraphOperators ops = build_operators(ds);
    std::vector<RunResult> results(folds.size());

    auto run_fold = [&](std::size_t i) {
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = cfg.seed + i;
        results[i] = train_run(ds, ops, folds[i], fold_cfg);
    };

    if (parallel && folds.size() > 1) {
        std::vector<std::future<void>> futures;
        futures.reserve(folds.size());
        for (std::size_t i = 0; i < folds.size(); ++i) {
            futures.push_back(std::async(std::launch::async, run_fold, i));
        }
        for (auto& f : futures) f.get();
    } else {
        for (std::size_t i = 0; i < folds.size(); ++i) run_fold(i);
    }
    return summarize(std::move(results));
}

std::vector<SweepPoint> sweep_axis(const GraphDataset& ds,
                                   const std::vector<SplitSet>& folds,
                                   const TrainConfig& base_cfg, SweepAxis axis,
                                   const std::vector<int>& values,
                                   bool parallel) {
    if (values.empty()) throw std::invalid_argument("sweep_axis: no values");
    std::vector<SweepPoint> points;
    points.reserve(values.size());
    for (int v : values) {
        TrainConfig cfg = base_cfg;
        if (axis == SweepAxis::K) {
            cfg.num_terms = v;
        } else {
            cfg.hidden = v;
        }
        points.push_back({v, cross_validate(ds, folds, cfg, parallel)});
    }
    return points;
}

}  // namespace duallag
