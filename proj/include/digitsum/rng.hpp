#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace digitsum {

// SplitMix64 (Sebastiano Vigna, public domain). The full algorithm is spelled
// out here so that any reimplementation, in any language, reproduces the same
// streams bit for bit:
//
//   state += 0x9E3779B97F4A7C15
//   z = state
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   output = z ^ (z >> 31)
//
// Every derived quantity below (bounded ints, unit doubles, shuffles) is
// defined in terms of this one output function and consumes a fixed number of
// outputs per draw, so generated datasets are reproducible across platforms.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform draw in [0, n) via the multiply-high method: floor(r * n / 2^64).
    // Consumes exactly one output; bias is < n / 2^64 (irrelevant for n <= 1e9).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform double in [0, 1) using the top 53 bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform double in [-r, r).
    double next_symmetric(double r) { return (2.0 * next_unit() - 1.0) * r; }

   private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

// Derives an independent substream seed from a master seed and a key path,
// e.g. stream_seed(seed, {fold, pair_code}). Each key is folded into the
// state with the SplitMix64 finalizer; the whole derivation is pure.
inline std::uint64_t stream_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> keys) {
    std::uint64_t s = detail::mix64(seed ^ 0xA0761D6478BD642Full);
    for (std::uint64_t k : keys) {
        s = detail::mix64(s ^ (k + 0x9E3779B97F4A7C15ull));
    }
    return s;
}

// Fisher-Yates, iterating from the back, one next_below per position.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace digitsum
