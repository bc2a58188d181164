#pragma once

#include <string>
#include <vector>

#include "digitsum/errors.hpp"

namespace digitsum {

template <class S>
struct MseResult {
    S loss;
    std::vector<S> d_pred;  // d(loss)/d(prediction), (2/B)(pred - target)
};

template <class S>
MseResult<S> mse_loss(const std::vector<S>& predictions, const std::vector<S>& targets) {
    if (predictions.size() != targets.size()) {
        throw LengthMismatch("mse: " + std::to_string(predictions.size()) +
                             " predictions vs " + std::to_string(targets.size()) +
                             " targets");
    }
    const std::size_t n = predictions.size();
    MseResult<S> out;
    out.d_pred.resize(n);
    double acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = double(predictions[i]) - double(targets[i]);
        acc += diff * diff;
        out.d_pred[i] = static_cast<S>(2.0 * diff / double(n));
    }
    out.loss = static_cast<S>(acc / double(n));
    return out;
}

}  // namespace digitsum
