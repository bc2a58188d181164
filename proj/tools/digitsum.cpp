// Command-line driver: dataset generation, cross-validation, checkpoint
// evaluation, and sample dumps for the digit-pair sum experiment.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "digitsum/checkpoint.hpp"
#include "digitsum/config.hpp"
#include "digitsum/crossval.hpp"
#include "digitsum/generate.hpp"
#include "digitsum/gemm.hpp"
#include "digitsum/mnist.hpp"
#include "digitsum/pgm.hpp"
#include "digitsum/train.hpp"
#include "digitsum/version.hpp"

namespace fs = std::filesystem;
using namespace digitsum;

namespace {

// Exit codes: 0 success, 2 configuration, 3 data/input, 4 training/runtime.
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

struct CliOverrides {
    std::optional<std::string> config_file;
    std::optional<std::string> mnist_dir;
    std::optional<std::string> out_dir;
    std::optional<std::string> profile;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> samples_per_pair;
    std::optional<std::size_t> folds;
    std::optional<std::size_t> max_folds;
    std::optional<std::uint32_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<std::size_t> parallel_folds;
    std::optional<std::string> formats;
    std::optional<std::string> precision;
    std::optional<int> blas_threads;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
    cmd->add_option("--config", o.config_file, "flat key=value config file");
    cmd->add_option("--mnist-dir", o.mnist_dir, "directory with the four MNIST IDX files");
    cmd->add_option("--out", o.out_dir, "output root (default: runs)");
    cmd->add_option("--profile", o.profile, "quick | paper | custom");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--samples-per-pair", o.samples_per_pair, "samples generated per pair");
    cmd->add_option("--folds", o.folds, "cross-validation folds (must divide 100)");
    cmd->add_option("--max-folds", o.max_folds, "run only the first N folds (0 = all)");
    cmd->add_option("--epochs", o.epochs, "training epochs per fold");
    cmd->add_option("--batch-size", o.batch_size, "minibatch size");
    cmd->add_option("--parallel-folds", o.parallel_folds, "folds trained in parallel");
    cmd->add_option("--format", o.formats, "report formats, comma separated (csv,md,json)");
    cmd->add_option("--precision", o.precision, "float | double");
    cmd->add_option("--blas-threads", o.blas_threads, "BLAS thread count (0 = library default)");
}

// Precedence: defaults < profile < config file < explicit CLI flags.
RunConfig resolve_config(const CliOverrides& o) {
    RunConfig cfg;
    if (o.profile) apply_profile(cfg, *o.profile);
    if (o.config_file) {
        RunConfig from_file = cfgfile::load(*o.config_file);
        // The file starts from the same defaults; profile given on the CLI
        // wins over the file's profile, explicit flags win over both.
        cfg = from_file;
        if (o.profile) apply_profile(cfg, *o.profile);
    }
    if (o.mnist_dir) cfg.mnist_dir = *o.mnist_dir;
    if (o.out_dir) cfg.out_dir = *o.out_dir;
    if (o.seed) cfg.seed = *o.seed;
    if (o.samples_per_pair) cfg.samples_per_pair = *o.samples_per_pair;
    if (o.folds) cfg.folds = *o.folds;
    if (o.max_folds) cfg.max_folds = *o.max_folds;
    if (o.epochs) cfg.epochs = *o.epochs;
    if (o.batch_size) cfg.batch_size = *o.batch_size;
    if (o.parallel_folds) cfg.parallel_folds = *o.parallel_folds;
    if (o.formats) cfg.formats = *o.formats;
    if (o.precision) cfg.precision = *o.precision;
    if (o.blas_threads && *o.blas_threads > 0) set_blas_threads(*o.blas_threads);
    cfg.validate();
    return cfg;
}

std::string run_id(const RunConfig& cfg) {
    return cfg.profile + "-seed" + std::to_string(cfg.seed);
}

fs::path prepare_run_dir(const RunConfig& cfg) {
    const fs::path dir = fs::path(cfg.out_dir) / run_id(cfg);
    fs::create_directories(dir);
    std::ofstream f(dir / "config.txt", std::ios::trunc);
    f << cfgfile::serialize(cfg);
    return dir;
}

struct LoadedMnist {
    MnistDataset train, test;
    LabelIndex train_index, test_index;
};

LoadedMnist load_mnist(const RunConfig& cfg) {
    if (cfg.mnist_dir.empty()) {
        throw ConfigError("--mnist-dir (or mnist_dir in the config file) is required");
    }
    const MnistPaths paths = locate_mnist(cfg.mnist_dir);
    LoadedMnist m;
    m.train = load_dataset(paths.train_images, paths.train_labels, Partition::Train);
    m.test = load_dataset(paths.test_images, paths.test_labels, Partition::Test);
    m.train_index = build_label_index(m.train);
    m.test_index = build_label_index(m.test);
    return m;
}

int cmd_generate(const CliOverrides& o) {
    const RunConfig cfg = resolve_config(o);
    const LoadedMnist m = load_mnist(cfg);
    const fs::path dir = prepare_run_dir(cfg);
    const TrainConfig tc = cfg.train_config();
    const SplitPlan plan = make_split_plan(enumerate_pairs(), tc.folds, tc.split_seed);

    for (std::size_t k = 0; k < tc.folds_to_run(); ++k) {
        const PairDataset train_ds =
            generate_pair_dataset(plan.train_pairs(k), m.train, m.train_index,
                                  tc.samples_per_pair, stream_seed(tc.data_seed, {k, 0}));
        const PairDataset test_ds =
            generate_pair_dataset(plan.test_pairs(k), m.test, m.test_index,
                                  tc.samples_per_pair, stream_seed(tc.data_seed, {k, 1}));
        ExportMeta meta;
        meta.seed = cfg.seed;
        meta.samples_per_pair = tc.samples_per_pair;
        meta.fold = int(k);
        meta.partition = Partition::Train;
        export_dataset(train_ds, dir / ("fold-" + std::to_string(k)) / "train", meta);
        meta.partition = Partition::Test;
        export_dataset(test_ds, dir / ("fold-" + std::to_string(k)) / "test", meta);
        std::cout << "fold " << k << ": wrote " << train_ds.size() << " train and "
                  << test_ds.size() << " test samples\n";
    }
    std::cout << "datasets under " << dir.string() << "\n";
    return 0;
}

template <class S>
int run_crossval(const RunConfig& cfg, const LoadedMnist& m, const fs::path& dir) {
    CrossValPaths paths{dir};
    const auto t0 = std::chrono::steady_clock::now();
    const EpochLogger epoch_log = [&](std::size_t fold, std::uint32_t epoch,
                                      double loss) {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%8.1fs] fold %zu epoch %u: train loss %.5f\n", secs, fold,
                    epoch + 1, loss);
        std::fflush(stdout);
    };
    const FoldLogger fold_log = [](const FoldReport& r) {
        std::printf("fold %zu done: test MSE %.4f, train MSE %.4f, "
                    "round %.2f%%, floor/ceil %.2f%%, +-1 %.2f%%\n",
                    r.fold, r.test_mse, r.train_mse, 100 * r.acc_round,
                    100 * r.acc_floorceil, 100 * r.acc_pm1);
        std::fflush(stdout);
    };

    const CrossValReport report = run_cross_validation<S>(
        m.train, m.test, cfg.train_config(), paths, epoch_log, fold_log);

    std::cout << "\n" << report::markdown(report);
    std::cout << "\nreports under " << dir.string() << "\n";
    return 0;
}

int cmd_crossval(const CliOverrides& o) {
    const RunConfig cfg = resolve_config(o);
    const LoadedMnist m = load_mnist(cfg);
    const fs::path dir = prepare_run_dir(cfg);
    if (cfg.precision == "double") {
        return run_crossval<double>(cfg, m, dir);
    }
    return run_crossval<float>(cfg, m, dir);
}

template <class S>
int run_eval(const fs::path& checkpoint_path, const fs::path& dataset_dir,
             const fs::path& out_path) {
    const LoadedCheckpoint<S> ckpt = load_checkpoint<S>(checkpoint_path);
    const PairDataset ds = import_dataset(dataset_dir);
    if (ckpt.model.in_height() != PairDataset::kRows ||
        ckpt.model.in_width() != PairDataset::kCols) {
        throw IncompatibleCheckpoint("checkpoint expects " +
                                     std::to_string(ckpt.model.in_height()) + "x" +
                                     std::to_string(ckpt.model.in_width()) +
                                     " inputs, dataset is 28x56");
    }
    const Evaluation<S> eval = evaluate(ckpt.model, ds);
    std::printf("samples:        %zu\n", ds.size());
    std::printf("mse:            %.6f\n", eval.mse);
    std::printf("acc_round:      %.4f\n", accuracy_rounding(eval.predictions, ds.labels));
    std::printf("acc_floorceil:  %.4f\n",
                accuracy_floor_ceiling(eval.predictions, ds.labels));
    std::printf("acc_pm1:        %.4f\n", accuracy_within_one(eval.predictions, ds.labels));
    if (!out_path.empty()) {
        detail::write_predictions(out_path, ds, eval.predictions);
        std::cout << "predictions written to " << out_path.string() << "\n";
    }
    return 0;
}

int cmd_dump_samples(const fs::path& dataset_dir, std::size_t count,
                     const fs::path& out_dir) {
    const PairDataset ds = import_dataset(dataset_dir);
    fs::create_directories(out_dir);
    const std::size_t n = std::min(count, ds.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = ds.sample(i);
        char name[80];
        std::snprintf(name, sizeof name, "sample_%06zu_pair%d%d_label%d.pgm", i,
                      int(s.pair.first), int(s.pair.second), int(s.label));
        write_pgm(out_dir / name, PairDataset::kRows, PairDataset::kCols, s.image);
    }
    std::cout << "wrote " << n << " pgm files to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"digit-pair sum experiment (generation, training, evaluation)"};
    app.set_version_flag("--version", std::string("digitsum ") + kVersion);
    app.require_subcommand(1);

    CliOverrides gen_o, cv_o;
    CLI::App* c_generate =
        app.add_subcommand("generate", "generate and export per-fold pair datasets");
    add_common_options(c_generate, gen_o);

    CLI::App* c_crossval =
        app.add_subcommand("crossval", "run the cross-validation experiment");
    add_common_options(c_crossval, cv_o);

    std::string eval_checkpoint, eval_dataset, eval_out, eval_precision = "float";
    CLI::App* c_eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
    c_eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    c_eval->add_option("--dataset", eval_dataset, "exported dataset directory")->required();
    c_eval->add_option("--out", eval_out, "predictions output file (tsv)");
    c_eval->add_option("--precision", eval_precision, "float | double");

    std::string dump_dataset, dump_out = "samples";
    std::size_t dump_count = 10;
    CLI::App* c_dump = app.add_subcommand("dump-samples", "write samples as PGM images");
    c_dump->add_option("--dataset", dump_dataset, "exported dataset directory")->required();
    c_dump->add_option("--count", dump_count, "number of samples to dump");
    c_dump->add_option("--out", dump_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (c_generate->parsed()) return cmd_generate(gen_o);
        if (c_crossval->parsed()) return cmd_crossval(cv_o);
        if (c_eval->parsed()) {
            if (eval_precision == "double") {
                return run_eval<double>(eval_checkpoint, eval_dataset, eval_out);
            }
            return run_eval<float>(eval_checkpoint, eval_dataset, eval_out);
        }
        if (c_dump->parsed()) return cmd_dump_samples(dump_dataset, dump_count, dump_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const BadMagic& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const TruncatedFile& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const DimensionMismatch& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const InvalidLabel& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const CountMismatch& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const EmptyBucket& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const IncompatibleCheckpoint& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitTraining;
    }
    return 0;
}
