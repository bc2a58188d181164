#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/rng.hpp"

namespace digitsum {

// An ordered digit pair: (3,1) and (1,3) are distinct.
struct PermutationPair {
    std::uint8_t first = 0;
    std::uint8_t second = 0;

    int sum() const { return int(first) + int(second); }
    // Stable small integer key, also used for RNG substream derivation.
    int code() const { return int(first) * 10 + int(second); }

    auto operator<=>(const PermutationPair&) const = default;
};

inline std::string to_string(const PermutationPair& p) {
    return "(" + std::to_string(p.first) + "," + std::to_string(p.second) + ")";
}

// All base^length ordered pairs in lexicographic order. Only the 10x2 digit
// geometry is supported; the signature keeps the knobs so longer permutations
// stay expressible, but anything else is rejected up front.
inline std::vector<PermutationPair> enumerate_pairs(int base = 10, int length = 2) {
    if (base != 10 || length != 2) {
        throw UnsupportedGeometry("only base 10, length 2 is supported; got base " +
                                  std::to_string(base) + ", length " +
                                  std::to_string(length));
    }
    std::vector<PermutationPair> pairs;
    pairs.reserve(100);
    for (std::uint8_t a = 0; a < 10; ++a) {
        for (std::uint8_t b = 0; b < 10; ++b) {
            pairs.push_back({a, b});
        }
    }
    return pairs;
}

// K disjoint folds covering all pairs. Fold k is that fold's test set; the
// other K-1 folds together form its training set.
struct SplitPlan {
    std::vector<std::vector<PermutationPair>> folds;

    std::size_t fold_count() const { return folds.size(); }

    const std::vector<PermutationPair>& test_pairs(std::size_t k) const {
        return folds[k];
    }

    std::vector<PermutationPair> train_pairs(std::size_t k) const {
        std::vector<PermutationPair> out;
        for (std::size_t f = 0; f < folds.size(); ++f) {
            if (f == k) continue;
            out.insert(out.end(), folds[f].begin(), folds[f].end());
        }
        return out;
    }
};

// Shuffles the pairs with a substream of `seed` and deals them into K equal
// folds. Deterministic in (pairs, folds, seed).
inline SplitPlan make_split_plan(const std::vector<PermutationPair>& pairs,
                                 std::size_t folds, std::uint64_t seed) {
    if (folds == 0 || pairs.size() % folds != 0) {
        throw UnevenFolds(std::to_string(folds) + " folds do not evenly divide " +
                          std::to_string(pairs.size()) + " pairs");
    }
    std::vector<PermutationPair> shuffled = pairs;
    Rng rng(stream_seed(seed, {0x53504C4954ull}));  // stream tag "SPLIT"
    shuffle(shuffled, rng);

    const std::size_t per_fold = pairs.size() / folds;
    SplitPlan plan;
    plan.folds.resize(folds);
    for (std::size_t k = 0; k < folds; ++k) {
        plan.folds[k].assign(shuffled.begin() + static_cast<std::ptrdiff_t>(k * per_fold),
                             shuffled.begin() + static_cast<std::ptrdiff_t>((k + 1) * per_fold));
    }
    return plan;
}

}  // namespace digitsum
