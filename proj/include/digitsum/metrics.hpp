#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"

namespace digitsum {

// The three accuracy readings used alongside MSE. Rounding is
// half-away-from-zero (std::round), so the rule is deterministic at .5.

namespace detail {

template <class S, class L>
void require_equal_lengths(const std::vector<S>& a, const std::vector<L>& b) {
    if (a.size() != b.size()) {
        throw LengthMismatch(std::to_string(a.size()) + " predictions vs " +
                             std::to_string(b.size()) + " labels");
    }
}

}  // namespace detail

template <class S, class L>
bool rounding_correct(S pred, L label) {
    return std::lround(double(pred)) == long(label);
}

template <class S, class L>
bool floor_ceiling_correct(S pred, L label) {
    const double p = double(pred);
    return long(std::floor(p)) == long(label) || long(std::ceil(p)) == long(label);
}

template <class S, class L>
bool within_one_correct(S pred, L label) {
    return std::labs(std::lround(double(pred)) - long(label)) <= 1;
}

template <class S, class L>
double accuracy_rounding(const std::vector<S>& preds, const std::vector<L>& labels) {
    detail::require_equal_lengths(preds, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (rounding_correct(preds[i], labels[i])) ++correct;
    }
    return preds.empty() ? 0.0 : double(correct) / double(preds.size());
}

template <class S, class L>
double accuracy_floor_ceiling(const std::vector<S>& preds, const std::vector<L>& labels) {
    detail::require_equal_lengths(preds, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (floor_ceiling_correct(preds[i], labels[i])) ++correct;
    }
    return preds.empty() ? 0.0 : double(correct) / double(preds.size());
}

template <class S, class L>
double accuracy_within_one(const std::vector<S>& preds, const std::vector<L>& labels) {
    detail::require_equal_lengths(preds, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (within_one_correct(preds[i], labels[i])) ++correct;
    }
    return preds.empty() ? 0.0 : double(correct) / double(preds.size());
}

}  // namespace digitsum
