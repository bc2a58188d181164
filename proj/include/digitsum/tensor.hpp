#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"

namespace digitsum {

// Dense row-major tensor. Shape is dynamic; the scalar type is float for
// training builds and double for gradient-check builds.
template <class S>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<S> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shp)
        : shape(std::move(shp)), data(numel(shape), S(0)) {}

    static std::size_t numel(const std::vector<std::size_t>& shp) {
        std::size_t n = 1;
        for (std::size_t d : shp) n *= d;
        return n;
    }

    std::size_t size() const { return data.size(); }

    S* ptr() { return data.data(); }
    const S* ptr() const { return data.data(); }

    void fill(S v) { std::fill(data.begin(), data.end(), v); }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }

    bool all_finite() const {
        for (S v : data) {
            if (!std::isfinite(static_cast<double>(v))) return false;
        }
        return true;
    }
};

inline std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

template <class S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeMismatch(std::string(what) + ": " + shape_string(a.shape) + " vs " +
                            shape_string(b.shape));
    }
}

}  // namespace digitsum
