#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/rng.hpp"
#include "digitsum/train.hpp"
#include "digitsum/version.hpp"

namespace digitsum {

// A full run description. Serialized as flat key=value text; the effective
// (post-override) config is written verbatim into every run directory.
struct RunConfig {
    std::string mnist_dir;
    std::string out_dir = "runs";
    std::string profile = "custom";  // quick | paper | custom
    std::uint64_t seed = 42;
    std::uint32_t samples_per_pair = 1000;
    std::size_t folds = 10;
    std::uint32_t epochs = 12;
    std::size_t batch_size = 128;
    double rho = 0.95;
    double eps = 1e-6;
    bool shuffle = true;
    std::size_t parallel_folds = 1;
    std::size_t max_folds = 0;  // 0 = run every fold
    std::string formats = "csv,md,json";
    std::string precision = "float";  // float | double

    // The split/data/init seeds are substreams of the master seed unless set
    // explicitly (0 = derive).
    std::uint64_t split_seed = 0;
    std::uint64_t data_seed = 0;
    std::uint64_t init_seed = 0;

    std::uint64_t effective_split_seed() const {
        return split_seed ? split_seed : stream_seed(seed, {1});
    }
    std::uint64_t effective_data_seed() const {
        return data_seed ? data_seed : stream_seed(seed, {2});
    }
    std::uint64_t effective_init_seed() const {
        return init_seed ? init_seed : stream_seed(seed, {3});
    }

    TrainConfig train_config() const {
        TrainConfig t;
        t.epochs = epochs;
        t.batch_size = batch_size;
        t.samples_per_pair = samples_per_pair;
        t.folds = folds;
        t.split_seed = effective_split_seed();
        t.data_seed = effective_data_seed();
        t.init_seed = effective_init_seed();
        t.rho = rho;
        t.eps = eps;
        t.shuffle = shuffle;
        t.parallel_folds = parallel_folds;
        t.max_folds = max_folds;
        return t;
    }

    void validate() const {
        if (profile != "quick" && profile != "paper" && profile != "custom") {
            throw ConfigError("unknown profile '" + profile + "'");
        }
        if (precision != "float" && precision != "double") {
            throw ConfigError("precision must be float or double");
        }
        if (epochs == 0) throw ConfigError("epochs must be positive");
        train_config().validate();
    }
};

// quick: a CI-scale smoke run over the first 3 folds of the 10-fold plan
// (3 does not divide 100, so the plan itself stays 10-fold and the run stops
// early). paper: the full reproduction scale.
inline void apply_profile(RunConfig& cfg, const std::string& profile) {
    if (profile == "quick") {
        cfg.samples_per_pair = 200;
        cfg.folds = 10;
        cfg.max_folds = 3;
        cfg.epochs = 6;
    } else if (profile == "paper") {
        cfg.samples_per_pair = 1000;
        cfg.folds = 10;
        cfg.max_folds = 0;
        cfg.epochs = 12;
    } else if (profile != "custom") {
        throw ConfigError("unknown profile '" + profile + "'");
    }
    cfg.profile = profile;
}

namespace cfgfile {

inline std::map<std::string, std::string> parse(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              " is not key=value: " + line);
        }
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline void apply_kv(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    auto u64 = [](const std::string& k, const std::string& v) -> std::uint64_t {
        try {
            return std::stoull(v);
        } catch (...) {
            throw ConfigError("bad integer for " + k + ": '" + v + "'");
        }
    };
    auto f64 = [](const std::string& k, const std::string& v) -> double {
        try {
            return std::stod(v);
        } catch (...) {
            throw ConfigError("bad number for " + k + ": '" + v + "'");
        }
    };
    // The profile is a bundle of defaults, so it applies before any explicit
    // key from the same file can refine it.
    if (const auto it = kv.find("profile"); it != kv.end()) {
        apply_profile(cfg, it->second);
    }
    for (const auto& [k, v] : kv) {
        if (k == "mnist_dir") cfg.mnist_dir = v;
        else if (k == "out_dir") cfg.out_dir = v;
        else if (k == "profile") continue;  // handled above
        else if (k == "seed") cfg.seed = u64(k, v);
        else if (k == "samples_per_pair") cfg.samples_per_pair = std::uint32_t(u64(k, v));
        else if (k == "folds") cfg.folds = std::size_t(u64(k, v));
        else if (k == "epochs") cfg.epochs = std::uint32_t(u64(k, v));
        else if (k == "batch_size") cfg.batch_size = std::size_t(u64(k, v));
        else if (k == "rho") cfg.rho = f64(k, v);
        else if (k == "eps") cfg.eps = f64(k, v);
        else if (k == "shuffle") cfg.shuffle = (v == "1" || v == "true" || v == "on");
        else if (k == "parallel_folds") cfg.parallel_folds = std::size_t(u64(k, v));
        else if (k == "max_folds") cfg.max_folds = std::size_t(u64(k, v));
        else if (k == "formats") cfg.formats = v;
        else if (k == "precision") cfg.precision = v;
        else if (k == "split_seed") cfg.split_seed = u64(k, v);
        else if (k == "data_seed") cfg.data_seed = u64(k, v);
        else if (k == "init_seed") cfg.init_seed = u64(k, v);
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

inline std::string serialize(const RunConfig& cfg) {
    std::ostringstream out;
    out << "# effective run configuration, " << "digitsum " << kVersion << "\n";
    out << "mnist_dir = " << cfg.mnist_dir << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    out << "profile = " << cfg.profile << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "split_seed = " << cfg.effective_split_seed() << "\n";
    out << "data_seed = " << cfg.effective_data_seed() << "\n";
    out << "init_seed = " << cfg.effective_init_seed() << "\n";
    out << "samples_per_pair = " << cfg.samples_per_pair << "\n";
    out << "folds = " << cfg.folds << "\n";
    out << "epochs = " << cfg.epochs << "\n";
    out << "batch_size = " << cfg.batch_size << "\n";
    out << "rho = " << cfg.rho << "\n";
    out << "eps = " << cfg.eps << "\n";
    out << "shuffle = " << (cfg.shuffle ? "true" : "false") << "\n";
    out << "parallel_folds = " << cfg.parallel_folds << "\n";
    out << "max_folds = " << cfg.max_folds << "\n";
    out << "formats = " << cfg.formats << "\n";
    out << "precision = " << cfg.precision << "\n";
    return out.str();
}

inline RunConfig load(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file " + path.string());
    RunConfig cfg;
    apply_kv(cfg, parse(f));
    return cfg;
}

}  // namespace cfgfile

// Canonical MNIST file names; plain and gzipped variants are both accepted.
inline std::filesystem::path find_mnist_file(const std::filesystem::path& dir,
                                             const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        const std::filesystem::path p = dir / (stem + suffix);
        if (std::filesystem::exists(p)) return p;
    }
    throw IoError("missing MNIST file " + (dir / stem).string() + " (or .gz)");
}

struct MnistPaths {
    std::filesystem::path train_images, train_labels, test_images, test_labels;
};

inline MnistPaths locate_mnist(const std::filesystem::path& dir) {
    return {find_mnist_file(dir, "train-images-idx3-ubyte"),
            find_mnist_file(dir, "train-labels-idx1-ubyte"),
            find_mnist_file(dir, "t10k-images-idx3-ubyte"),
            find_mnist_file(dir, "t10k-labels-idx1-ubyte")};
}

}  // namespace digitsum
