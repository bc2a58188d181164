#pragma once

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "digitsum/checkpoint.hpp"
#include "digitsum/errors.hpp"
#include "digitsum/train.hpp"
#include "digitsum/version.hpp"

namespace digitsum {

struct CrossValReport {
    std::vector<FoldReport> folds;
    double avg_test_mse = 0;
    double avg_train_mse = 0;
    double avg_acc_round = 0;
    double avg_acc_floorceil = 0;
    double avg_acc_pm1 = 0;

    void finalize() {
        avg_test_mse = avg_train_mse = 0;
        avg_acc_round = avg_acc_floorceil = avg_acc_pm1 = 0;
        if (folds.empty()) return;
        for (const FoldReport& f : folds) {
            avg_test_mse += f.test_mse;
            avg_train_mse += f.train_mse;
            avg_acc_round += f.acc_round;
            avg_acc_floorceil += f.acc_floorceil;
            avg_acc_pm1 += f.acc_pm1;
        }
        const double n = double(folds.size());
        avg_test_mse /= n;
        avg_train_mse /= n;
        avg_acc_round /= n;
        avg_acc_floorceil /= n;
        avg_acc_pm1 /= n;
    }
};

namespace report {

inline std::string csv(const CrossValReport& r) {
    std::ostringstream out;
    out << "fold,test_mse,train_mse,acc_round,acc_floorceil,acc_pm1\n";
    out << std::setprecision(10);
    for (const FoldReport& f : r.folds) {
        out << f.fold + 1 << ',' << f.test_mse << ',' << f.train_mse << ','
            << f.acc_round << ',' << f.acc_floorceil << ',' << f.acc_pm1 << '\n';
    }
    out << "avg," << r.avg_test_mse << ',' << r.avg_train_mse << ',' << r.avg_acc_round
        << ',' << r.avg_acc_floorceil << ',' << r.avg_acc_pm1 << '\n';
    return out.str();
}

inline std::string markdown(const CrossValReport& r) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "| Fold | Test MSE | Train MSE | Rounding | Floor/ceiling | +-1 |\n";
    out << "|------|----------|-----------|----------|---------------|-----|\n";
    for (const FoldReport& f : r.folds) {
        out << "| " << f.fold + 1 << " | " << f.test_mse << " | " << f.train_mse
            << " | " << f.acc_round * 100 << "% | " << f.acc_floorceil * 100 << "% | "
            << f.acc_pm1 * 100 << "% |\n";
    }
    out << "| Avg. | " << r.avg_test_mse << " | " << r.avg_train_mse << " | "
        << r.avg_acc_round * 100 << "% | " << r.avg_acc_floorceil * 100 << "% | "
        << r.avg_acc_pm1 * 100 << "% |\n";
    return out.str();
}

inline std::string json(const CrossValReport& r) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "{\n  \"folds\": [\n";
    for (std::size_t i = 0; i < r.folds.size(); ++i) {
        const FoldReport& f = r.folds[i];
        out << "    {\"fold\": " << f.fold + 1 << ", \"test_mse\": " << f.test_mse
            << ", \"train_mse\": " << f.train_mse << ", \"acc_round\": " << f.acc_round
            << ", \"acc_floorceil\": " << f.acc_floorceil
            << ", \"acc_pm1\": " << f.acc_pm1 << "}";
        out << (i + 1 < r.folds.size() ? ",\n" : "\n");
    }
    out << "  ],\n";
    out << "  \"avg_test_mse\": " << r.avg_test_mse << ",\n";
    out << "  \"avg_train_mse\": " << r.avg_train_mse << ",\n";
    out << "  \"avg_acc_round\": " << r.avg_acc_round << ",\n";
    out << "  \"avg_acc_floorceil\": " << r.avg_acc_floorceil << ",\n";
    out << "  \"avg_acc_pm1\": " << r.avg_acc_pm1 << "\n";
    out << "}\n";
    return out.str();
}

// One fold's detail file, including the per-pair breakdown.
inline std::string fold_json(const FoldReport& f) {
    std::ostringstream out;
    out << std::setprecision(10);
    out << "{\n  \"fold\": " << f.fold + 1 << ",\n";
    out << "  \"test_mse\": " << f.test_mse << ",\n";
    out << "  \"train_mse\": " << f.train_mse << ",\n";
    out << "  \"acc_round\": " << f.acc_round << ",\n";
    out << "  \"acc_floorceil\": " << f.acc_floorceil << ",\n";
    out << "  \"acc_pm1\": " << f.acc_pm1 << ",\n";
    out << "  \"epoch_train_loss\": [";
    for (std::size_t i = 0; i < f.epoch_train_loss.size(); ++i) {
        out << (i ? ", " : "") << f.epoch_train_loss[i];
    }
    out << "],\n  \"per_pair\": [\n";
    for (std::size_t i = 0; i < f.per_pair.size(); ++i) {
        const PairBreakdown& b = f.per_pair[i];
        out << "    {\"p1\": " << int(b.pair.first) << ", \"p2\": " << int(b.pair.second)
            << ", \"samples\": " << b.samples << ", \"round_correct\": " << b.round_correct
            << ", \"floorceil_correct\": " << b.floorceil_correct
            << ", \"pm1_correct\": " << b.pm1_correct << "}"
            << (i + 1 < f.per_pair.size() ? ",\n" : "\n");
    }
    out << "  ]\n}\n";
    return out.str();
}

}  // namespace report

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw IoError("short write to " + path.string());
}

template <class S>
void write_predictions(const std::filesystem::path& path, const PairDataset& ds,
                       const std::vector<S>& preds) {
    std::ostringstream out;
    out << "sample_id\tp1\tp2\tlabel\tprediction\n";
    out << std::setprecision(9);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << i << '\t' << int(ds.pair_of[i].first) << '\t' << int(ds.pair_of[i].second)
            << '\t' << int(ds.labels[i]) << '\t' << double(preds[i]) << '\n';
    }
    write_text(path, out.str());
}

}  // namespace detail

struct CrossValPaths {
    std::filesystem::path run_dir;

    std::filesystem::path fold_dir(std::size_t k) const {
        return run_dir / ("fold-" + std::to_string(k));
    }
    std::filesystem::path checkpoint(std::size_t k) const {
        return fold_dir(k) / "checkpoint.bin";
    }
    std::filesystem::path predictions(std::size_t k) const {
        return fold_dir(k) / "predictions.tsv";
    }
    std::filesystem::path fold_report(std::size_t k) const {
        return fold_dir(k) / "report.json";
    }
    std::filesystem::path report_csv() const { return run_dir / "report.csv"; }
    std::filesystem::path report_md() const { return run_dir / "report.md"; }
    std::filesystem::path report_json() const { return run_dir / "report.json"; }
};

using FoldLogger = std::function<void(const FoldReport&)>;

// Runs every fold of the split, persisting per-fold artifacts as soon as each
// fold finishes so an aborted run keeps its completed folds. Folds are
// independent; parallel_folds > 1 runs them on worker threads without
// changing any result.
template <class S>
CrossValReport run_cross_validation(const MnistDataset& mnist_train,
                                    const MnistDataset& mnist_test,
                                    const TrainConfig& cfg, const CrossValPaths& paths,
                                    const EpochLogger& epoch_log = {},
                                    const FoldLogger& fold_log = {}) {
    cfg.validate();
    if (cfg.epochs == 0) throw ConfigError("epochs must be positive for a real run");

    const LabelIndex train_index = build_label_index(mnist_train);
    const LabelIndex test_index = build_label_index(mnist_test);
    const SplitPlan plan =
        make_split_plan(enumerate_pairs(), cfg.folds, cfg.split_seed);

    std::filesystem::create_directories(paths.run_dir);

    const std::size_t folds_to_run = cfg.folds_to_run();
    CrossValReport report;
    report.folds.resize(folds_to_run);
    std::vector<char> done(folds_to_run, 0);
    std::mutex log_mutex;

    const EpochLogger locked_epoch_log =
        epoch_log ? EpochLogger([&](std::size_t f, std::uint32_t e, double l) {
            std::lock_guard<std::mutex> lock(log_mutex);
            epoch_log(f, e, l);
        })
                  : EpochLogger{};

    auto run_one = [&](std::size_t k) {
        FoldResult<S> result =
            train_fold<S>(plan, k, mnist_train, train_index, mnist_test, test_index,
                          cfg, locked_epoch_log);
        std::filesystem::create_directories(paths.fold_dir(k));
        save_checkpoint(paths.checkpoint(k), result.model, &result.optimizer);
        detail::write_predictions(paths.predictions(k), result.test_dataset,
                                  result.test_predictions);
        detail::write_text(paths.fold_report(k), report::fold_json(result.report));
        report.folds[k] = std::move(result.report);
        done[k] = 1;
        if (fold_log) {
            std::lock_guard<std::mutex> lock(log_mutex);
            fold_log(report.folds[k]);
        }
    };

    try {
        if (cfg.parallel_folds <= 1) {
            for (std::size_t k = 0; k < folds_to_run; ++k) run_one(k);
        } else {
            std::size_t next = 0;
            while (next < folds_to_run) {
                const std::size_t n = std::min(cfg.parallel_folds, folds_to_run - next);
                std::vector<std::future<void>> futs;
                for (std::size_t i = 0; i < n; ++i) {
                    futs.push_back(std::async(std::launch::async, run_one, next + i));
                }
                for (auto& f : futs) f.get();
                next += n;
            }
        }
    } catch (const Error&) {
        // Partial results for completed folds are already on disk; surface
        // the failure after writing what aggregate exists.
        CrossValReport partial;
        for (std::size_t k = 0; k < folds_to_run; ++k) {
            if (done[k]) partial.folds.push_back(report.folds[k]);
        }
        partial.finalize();
        if (!partial.folds.empty()) {
            detail::write_text(paths.report_csv(), report::csv(partial));
        }
        throw;
    }

    report.finalize();
    detail::write_text(paths.report_csv(), report::csv(report));
    detail::write_text(paths.report_md(), report::markdown(report));
    detail::write_text(paths.report_json(), report::json(report));
    return report;
}

}  // namespace digitsum
