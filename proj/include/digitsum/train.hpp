#pragma once

#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "digitsum/adadelta.hpp"
#include "digitsum/errors.hpp"
#include "digitsum/generate.hpp"
#include "digitsum/loss.hpp"
#include "digitsum/metrics.hpp"
#include "digitsum/mnist.hpp"
#include "digitsum/model.hpp"
#include "digitsum/pairs.hpp"
#include "digitsum/rng.hpp"
#include "digitsum/tensor.hpp"

namespace digitsum {

struct TrainConfig {
    std::uint32_t epochs = 12;
    std::size_t batch_size = 128;
    std::uint32_t samples_per_pair = 1000;
    std::size_t folds = 10;
    std::uint64_t split_seed = 0;
    std::uint64_t data_seed = 0;
    std::uint64_t init_seed = 0;
    double rho = 0.95;
    double eps = 1e-6;
    bool shuffle = true;
    std::size_t parallel_folds = 1;
    // Number of folds actually trained; 0 means all of them. The split plan
    // itself always covers all 100 pairs (folds must divide 100), so a
    // reduced run keeps the 90/10 geometry and just stops early.
    std::size_t max_folds = 0;

    std::size_t folds_to_run() const {
        return max_folds == 0 ? folds : std::min(max_folds, folds);
    }

    // epochs == 0 is legal here (an untrained baseline some tests rely on);
    // the run-level config rejects it for real experiments.
    void validate() const {
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (samples_per_pair == 0) throw ConfigError("samples_per_pair must be positive");
        if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
        if (100 % folds != 0) {
            throw ConfigError("folds must divide the 100 permutation pairs, got " +
                              std::to_string(folds));
        }
        if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must be in (0,1)");
        if (!(eps > 0.0)) throw ConfigError("eps must be positive");
        if (parallel_folds == 0) throw ConfigError("parallel_folds must be positive");
    }
};

// Pixels become reals exactly here: value / 255 into [0,1].
template <class S>
void fill_batch(const PairDataset& ds, const std::vector<std::uint32_t>& order,
                std::size_t begin, std::size_t count, Tensor<S>& batch,
                std::vector<S>& targets) {
    const std::vector<std::size_t> want = {count, 1, PairDataset::kRows,
                                           PairDataset::kCols};
    if (batch.shape != want) batch = Tensor<S>(want);
    targets.resize(count);
    constexpr S scale = S(1) / S(255);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t s = order[begin + i];
        const std::uint8_t* src = ds.pixels.data() + s * PairDataset::kImageSize;
        S* dst = batch.ptr() + i * PairDataset::kImageSize;
        for (std::size_t px = 0; px < PairDataset::kImageSize; ++px) {
            dst[px] = S(src[px]) * scale;
        }
        targets[i] = S(ds.labels[s]);
    }
}

template <class S>
struct Evaluation {
    double mse = 0;
    std::vector<S> predictions;  // in dataset order
};

// Forward-only pass over the whole dataset; parameters are never touched.
template <class S>
Evaluation<S> evaluate(const Model<S>& model, const PairDataset& ds,
                       std::size_t batch_size = 256) {
    Evaluation<S> out;
    out.predictions.reserve(ds.size());
    std::vector<std::uint32_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0u);
    Tensor<S> batch;
    std::vector<S> targets;
    ForwardCache<S> cache;
    double acc = 0;
    for (std::size_t begin = 0; begin < ds.size(); begin += batch_size) {
        const std::size_t count = std::min(batch_size, ds.size() - begin);
        fill_batch(ds, order, begin, count, batch, targets);
        const std::vector<S> preds = model.forward(batch, cache);
        for (std::size_t i = 0; i < count; ++i) {
            const double diff = double(preds[i]) - double(targets[i]);
            acc += diff * diff;
            out.predictions.push_back(preds[i]);
        }
    }
    out.mse = ds.size() ? acc / double(ds.size()) : 0.0;
    return out;
}

struct PairBreakdown {
    PermutationPair pair;
    std::size_t samples = 0;
    std::size_t round_correct = 0;
    std::size_t floorceil_correct = 0;
    std::size_t pm1_correct = 0;
};

struct FoldReport {
    std::size_t fold = 0;
    double test_mse = 0;
    double train_mse = 0;
    double acc_round = 0;
    double acc_floorceil = 0;
    double acc_pm1 = 0;
    std::vector<PairBreakdown> per_pair;
    std::vector<double> epoch_train_loss;  // running average per epoch
};

// acc_round <= acc_floorceil <= acc_pm1 holds by construction of the metrics;
// verified on every report anyway so a regression cannot slip through.
inline void check_metric_monotonicity(const FoldReport& r) {
    if (!(r.acc_round <= r.acc_floorceil + 1e-12 &&
          r.acc_floorceil <= r.acc_pm1 + 1e-12)) {
        throw Error("metric monotonicity violated in fold " + std::to_string(r.fold));
    }
}

template <class S>
FoldReport build_fold_report(std::size_t fold, const PairDataset& test_ds,
                             const Evaluation<S>& test_eval, double train_mse,
                             std::vector<double> epoch_train_loss) {
    FoldReport report;
    report.fold = fold;
    report.test_mse = test_eval.mse;
    report.train_mse = train_mse;
    report.epoch_train_loss = std::move(epoch_train_loss);

    const std::vector<S>& preds = test_eval.predictions;
    report.acc_round = accuracy_rounding(preds, test_ds.labels);
    report.acc_floorceil = accuracy_floor_ceiling(preds, test_ds.labels);
    report.acc_pm1 = accuracy_within_one(preds, test_ds.labels);

    for (const PermutationPair& p : test_ds.pairs_covered) {
        report.per_pair.push_back({p, 0, 0, 0, 0});
    }
    auto slot = [&](const PermutationPair& p) -> PairBreakdown& {
        for (auto& b : report.per_pair) {
            if (b.pair == p) return b;
        }
        throw Error("sample pair missing from pairs_covered");
    };
    for (std::size_t i = 0; i < test_ds.size(); ++i) {
        PairBreakdown& b = slot(test_ds.pair_of[i]);
        ++b.samples;
        if (rounding_correct(preds[i], test_ds.labels[i])) ++b.round_correct;
        if (floor_ceiling_correct(preds[i], test_ds.labels[i])) ++b.floorceil_correct;
        if (within_one_correct(preds[i], test_ds.labels[i])) ++b.pm1_correct;
    }
    check_metric_monotonicity(report);
    return report;
}

template <class S>
struct FoldResult {
    Model<S> model;
    FoldReport report;
    PairDataset test_dataset;
    std::vector<S> test_predictions;
    AdadeltaState<S> optimizer;
};

using EpochLogger =
    std::function<void(std::size_t fold, std::uint32_t epoch, double train_loss)>;

// One cross-validation fold: generate train data from the fold's 90 training
// pairs out of MNIST Train, test data from its 10 held-out pairs out of MNIST
// Test, train from a fresh initialization, then measure.
template <class S>
FoldResult<S> train_fold(const SplitPlan& plan, std::size_t fold,
                         const MnistDataset& mnist_train, const LabelIndex& train_index,
                         const MnistDataset& mnist_test, const LabelIndex& test_index,
                         const TrainConfig& cfg, const EpochLogger& log = {}) {
    cfg.validate();
    if (mnist_train.partition != Partition::Train ||
        mnist_test.partition != Partition::Test) {
        throw ConfigError("train_fold needs the MNIST Train and Test partitions");
    }

    const PairDataset train_ds = generate_pair_dataset(
        plan.train_pairs(fold), mnist_train, train_index, cfg.samples_per_pair,
        stream_seed(cfg.data_seed, {fold, 0}));
    PairDataset test_ds = generate_pair_dataset(
        plan.test_pairs(fold), mnist_test, test_index, cfg.samples_per_pair,
        stream_seed(cfg.data_seed, {fold, 1}));

    Model<S> model = init_model<S>(default_arch(), 1, PairDataset::kRows,
                                   PairDataset::kCols, stream_seed(cfg.init_seed, {fold}));
    AdadeltaState<S> opt(model, S(cfg.rho), S(cfg.eps));

    std::vector<std::uint32_t> order(train_ds.size());
    std::iota(order.begin(), order.end(), 0u);
    Tensor<S> batch;
    std::vector<S> targets;
    ForwardCache<S> cache;
    std::vector<double> epoch_loss;

    for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            Rng rng(stream_seed(cfg.data_seed, {0x53485546ull, fold, epoch}));
            shuffle(order, rng);
        }
        double loss_acc = 0;
        std::size_t seen = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - begin);
            fill_batch(train_ds, order, begin, count, batch, targets);
            const std::vector<S> preds = model.forward(batch, cache);
            const MseResult<S> loss = mse_loss(preds, targets);
            const GradientSet<S> grads = model.backward(cache, loss.d_pred);
            adadelta_step(model, grads, opt);
            loss_acc += double(loss.loss) * double(count);
            seen += count;
        }
        epoch_loss.push_back(seen ? loss_acc / double(seen) : 0.0);
        if (log) log(fold, epoch, epoch_loss.back());
    }

    const double train_mse = evaluate(model, train_ds).mse;
    Evaluation<S> test_eval = evaluate(model, test_ds);

    FoldResult<S> out;
    out.report = build_fold_report(fold, test_ds, test_eval, train_mse,
                                   std::move(epoch_loss));
    out.model = std::move(model);
    out.test_dataset = std::move(test_ds);
    out.test_predictions = std::move(test_eval.predictions);
    out.optimizer = std::move(opt);
    return out;
}

}  // namespace digitsum
