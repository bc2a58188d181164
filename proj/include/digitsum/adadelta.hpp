#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/model.hpp"
#include "digitsum/tensor.hpp"

namespace digitsum {

// ADADELTA keeps two decaying accumulators per parameter and derives the step
// size from their ratio; there is no learning rate anywhere:
//
//   E[g^2]  <- rho * E[g^2]  + (1-rho) * g^2
//   dx       = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho * E[dx^2] + (1-rho) * dx^2
//   x       <- x + dx
template <class S>
struct AdadeltaState {
    S rho = S(0.95);
    S eps = S(1e-6);
    std::vector<Tensor<S>> g2_weights, g2_biases;    // E[g^2]
    std::vector<Tensor<S>> dx2_weights, dx2_biases;  // E[dx^2]

    AdadeltaState() = default;

    AdadeltaState(const Model<S>& model, S rho_ = S(0.95), S eps_ = S(1e-6))
        : rho(rho_), eps(eps_) {
        for (const auto& w : model.weights()) {
            g2_weights.emplace_back(w.shape);
            dx2_weights.emplace_back(w.shape);
        }
        for (const auto& b : model.biases()) {
            g2_biases.emplace_back(b.shape);
            dx2_biases.emplace_back(b.shape);
        }
    }
};

namespace detail {

template <class S>
void adadelta_apply(Tensor<S>& param, const Tensor<S>& grad, Tensor<S>& g2,
                    Tensor<S>& dx2, S rho, S eps, const char* what) {
    require_same_shape(param, grad, what);
    require_same_shape(param, g2, what);
    require_same_shape(param, dx2, what);
    const std::size_t n = param.size();
    for (std::size_t i = 0; i < n; ++i) {
        const S g = grad.data[i];
        if (!std::isfinite(double(g))) {
            throw NonFiniteGradient(std::string(what) + ": non-finite gradient at element " +
                                    std::to_string(i));
        }
        g2.data[i] = rho * g2.data[i] + (S(1) - rho) * g * g;
        const S dx = -std::sqrt(dx2.data[i] + eps) / std::sqrt(g2.data[i] + eps) * g;
        dx2.data[i] = rho * dx2.data[i] + (S(1) - rho) * dx * dx;
        param.data[i] += dx;
    }
}

}  // namespace detail

template <class S>
void adadelta_step(Model<S>& model, const GradientSet<S>& grads, AdadeltaState<S>& state) {
    if (grads.weights.size() != model.weights().size() ||
        grads.biases.size() != model.biases().size() ||
        state.g2_weights.size() != model.weights().size()) {
        throw ShapeMismatch("optimizer state does not match the model's parameter list");
    }
    for (std::size_t i = 0; i < model.weights().size(); ++i) {
        detail::adadelta_apply(model.weights()[i], grads.weights[i], state.g2_weights[i],
                               state.dx2_weights[i], state.rho, state.eps, "weights");
        detail::adadelta_apply(model.biases()[i], grads.biases[i], state.g2_biases[i],
                               state.dx2_biases[i], state.rho, state.eps, "biases");
    }
}

}  // namespace digitsum
