#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/layers.hpp"
#include "digitsum/rng.hpp"
#include "digitsum/tensor.hpp"

namespace digitsum {

enum class Activation : std::uint32_t { Identity = 0, ReLU = 1 };

struct ConvSpec {
    std::size_t out_channels;
    std::size_t kh, kw;
    Activation act = Activation::ReLU;
};
struct PoolSpec {
    std::size_t ph, pw;
};
struct FlattenSpec {};
struct DenseSpec {
    std::size_t units;
    Activation act = Activation::ReLU;
};

using LayerSpec = std::variant<ConvSpec, PoolSpec, FlattenSpec, DenseSpec>;

// The regression network: a small LeNet-style stack ending in one linear
// output unit. 28x56 inputs flow as 1x28x56.
inline std::vector<LayerSpec> default_arch() {
    return {
        ConvSpec{32, 3, 3, Activation::ReLU},
        ConvSpec{64, 3, 3, Activation::ReLU},
        PoolSpec{2, 2},
        FlattenSpec{},
        DenseSpec{128, Activation::ReLU},
        DenseSpec{1, Activation::Identity},
    };
}

// A small conv net for gradient checks and fast tests.
inline std::vector<LayerSpec> tiny_arch() {
    return {
        ConvSpec{2, 3, 3, Activation::ReLU},
        PoolSpec{2, 2},
        FlattenSpec{},
        DenseSpec{4, Activation::ReLU},
        DenseSpec{1, Activation::Identity},
    };
}

template <class S>
struct GradientSet {
    std::vector<Tensor<S>> weights;
    std::vector<Tensor<S>> biases;
};

template <class S>
struct ForwardCache {
    std::size_t batch = 0;
    bool filled = false;  // set by forward, consumed by backward
    Tensor<S> input;
    std::vector<Tensor<S>> outputs;  // post-activation output per layer
    std::vector<std::vector<std::uint32_t>> pool_argmax;  // per pool layer
    // scratch buffers reused across batches
    std::vector<S> col, chunk, colgrad;
    std::vector<Tensor<S>> grad_out;  // gradient w.r.t. each layer output
};

// Activation shapes are resolved at construction; forward/backward then only
// verify that incoming batches agree with them.
template <class S>
class Model {
   public:
    Model() = default;

    Model(std::vector<LayerSpec> specs, std::size_t in_channels, std::size_t in_h,
          std::size_t in_w)
        : specs_(std::move(specs)), in_c_(in_channels), in_h_(in_h), in_w_(in_w) {
        resolve_shapes();
        allocate_params();
        const auto& out = layer_shape_.back();
        if (out.size() != 1 || out[0] != 1) {
            throw ShapeMismatch("final layer must produce exactly one output unit, got " +
                                shape_string(out));
        }
        if (!std::holds_alternative<DenseSpec>(specs_.back()) ||
            std::get<DenseSpec>(specs_.back()).act != Activation::Identity) {
            throw ShapeMismatch("final layer must be a linear dense unit");
        }
    }

    const std::vector<LayerSpec>& specs() const { return specs_; }
    std::size_t in_channels() const { return in_c_; }
    std::size_t in_height() const { return in_h_; }
    std::size_t in_width() const { return in_w_; }

    std::vector<Tensor<S>>& weights() { return weights_; }
    std::vector<Tensor<S>>& biases() { return biases_; }
    const std::vector<Tensor<S>>& weights() const { return weights_; }
    const std::vector<Tensor<S>>& biases() const { return biases_; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& w : weights_) n += w.size();
        for (const auto& b : biases_) n += b.size();
        return n;
    }

    GradientSet<S> make_gradient_set() const {
        GradientSet<S> g;
        for (const auto& w : weights_) g.weights.emplace_back(w.shape);
        for (const auto& b : biases_) g.biases.emplace_back(b.shape);
        return g;
    }

    // Runs the batch through all layers, caching every activation for
    // backward. Returns one prediction per sample.
    std::vector<S> forward(const Tensor<S>& batch, ForwardCache<S>& cache) const {
        if (batch.shape.size() != 4 || batch.shape[1] != in_c_ ||
            batch.shape[2] != in_h_ || batch.shape[3] != in_w_) {
            throw ShapeMismatch("forward expects [Bx" + std::to_string(in_c_) + "x" +
                                std::to_string(in_h_) + "x" + std::to_string(in_w_) +
                                "], got " + shape_string(batch.shape));
        }
        const std::size_t b = batch.shape[0];
        cache.batch = b;
        cache.input = batch;
        cache.outputs.resize(specs_.size());
        cache.pool_argmax.assign(count_pools(), {});

        const Tensor<S>* cur = &cache.input;
        std::size_t param_i = 0, pool_i = 0;
        for (std::size_t li = 0; li < specs_.size(); ++li) {
            Tensor<S>& out = cache.outputs[li];
            std::vector<std::size_t> out_shape = layer_shape_[li];
            out_shape.insert(out_shape.begin(), b);
            if (out.shape != out_shape) out = Tensor<S>(out_shape);

            if (const auto* c = std::get_if<ConvSpec>(&specs_[li])) {
                const auto g = conv_geometry(li);
                conv::forward(cur->ptr(), b, g, weights_[param_i].ptr(),
                              biases_[param_i].ptr(), out.ptr(), cache.col,
                              cache.chunk);
                if (c->act == Activation::ReLU) relu_inplace(out.ptr(), out.size());
                ++param_i;
            } else if (std::get_if<PoolSpec>(&specs_[li])) {
                const auto g = pool_geometry(li);
                cache.pool_argmax[pool_i].resize(b * g.out_size());
                pool::forward(cur->ptr(), b, g, out.ptr(),
                              cache.pool_argmax[pool_i].data());
                ++pool_i;
            } else if (std::get_if<FlattenSpec>(&specs_[li])) {
                out.data = cur->data;  // same row-major bytes, flat shape
            } else {
                const auto& d = std::get<DenseSpec>(specs_[li]);
                const std::size_t n = layer_shape_[li - 1].empty()
                                          ? 0
                                          : flat_size(layer_shape_[li - 1]);
                dense::forward(cur->ptr(), b, n, weights_[param_i].ptr(),
                               d.units, biases_[param_i].ptr(), out.ptr());
                if (d.act == Activation::ReLU) relu_inplace(out.ptr(), out.size());
                ++param_i;
            }
            cur = &out;
        }
        cache.filled = true;

        std::vector<S> preds(b);
        for (std::size_t i = 0; i < b; ++i) preds[i] = cur->data[i];
        return preds;
    }

    // Convenience forward for evaluation paths that do not need gradients.
    std::vector<S> predict(const Tensor<S>& batch) const {
        ForwardCache<S> cache;
        return forward(batch, cache);
    }

    // Backpropagates d(loss)/d(prediction) through the cached activations.
    // Input gradients for the first layer are not computed; nothing consumes
    // them.
    GradientSet<S> backward(ForwardCache<S>& cache,
                            const std::vector<S>& d_pred) const {
        if (!cache.filled) {
            throw StaleCache("backward without a matching forward pass");
        }
        if (d_pred.size() != cache.batch) {
            throw LengthMismatch("d_pred has " + std::to_string(d_pred.size()) +
                                 " entries for batch " + std::to_string(cache.batch));
        }
        cache.filled = false;
        const std::size_t b = cache.batch;

        GradientSet<S> grads = make_gradient_set();
        cache.grad_out.resize(specs_.size());
        // Seed: d(output of last layer), shape B x 1.
        Tensor<S>& last = cache.grad_out.back();
        if (last.shape != std::vector<std::size_t>{b, 1}) {
            last = Tensor<S>({b, 1});
        }
        for (std::size_t i = 0; i < b; ++i) last.data[i] = d_pred[i];

        std::size_t param_i = weights_.size();
        std::size_t pool_i = cache.pool_argmax.size();
        for (std::size_t li = specs_.size(); li-- > 0;) {
            const Tensor<S>& below =
                li == 0 ? cache.input : cache.outputs[li - 1];
            Tensor<S>& d_here = cache.grad_out[li];
            Tensor<S>* d_below = nullptr;
            if (li > 0) {
                d_below = &cache.grad_out[li - 1];
                if (d_below->shape != cache.outputs[li - 1].shape) {
                    *d_below = Tensor<S>(cache.outputs[li - 1].shape);
                }
            }

            if (const auto* c = std::get_if<ConvSpec>(&specs_[li])) {
                --param_i;
                if (c->act == Activation::ReLU) {
                    relu_backward_inplace(cache.outputs[li].ptr(), d_here.ptr(),
                                          d_here.size());
                }
                const auto g = conv_geometry(li);
                conv::backward(below.ptr(), b, g, weights_[param_i].ptr(),
                               d_here.ptr(), grads.weights[param_i].ptr(),
                               grads.biases[param_i].ptr(),
                               d_below ? d_below->ptr() : nullptr, cache.col,
                               cache.chunk, cache.colgrad);
            } else if (std::get_if<PoolSpec>(&specs_[li])) {
                --pool_i;
                const auto g = pool_geometry(li);
                pool::backward(cache.pool_argmax[pool_i].data(), b, g, d_here.ptr(),
                               d_below->ptr());
            } else if (std::get_if<FlattenSpec>(&specs_[li])) {
                d_below->data = d_here.data;
            } else {
                const auto& d = std::get<DenseSpec>(specs_[li]);
                --param_i;
                if (d.act == Activation::ReLU) {
                    relu_backward_inplace(cache.outputs[li].ptr(), d_here.ptr(),
                                          d_here.size());
                }
                const std::size_t n = flat_size(layer_shape_[li - 1]);
                dense::backward(below.ptr(), b, n, weights_[param_i].ptr(), d.units,
                                d_here.ptr(), grads.weights[param_i].ptr(),
                                grads.biases[param_i].ptr(),
                                d_below ? d_below->ptr() : nullptr);
            }
        }
        return grads;
    }

    // Per-sample activation shape after layer li (without the batch axis).
    const std::vector<std::size_t>& output_shape(std::size_t li) const {
        return layer_shape_[li];
    }

   private:
    static std::size_t flat_size(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t count_pools() const {
        std::size_t n = 0;
        for (const auto& s : specs_) {
            if (std::holds_alternative<PoolSpec>(s)) ++n;
        }
        return n;
    }

    conv::Geometry conv_geometry(std::size_t li) const {
        const auto& in =
            li == 0 ? std::vector<std::size_t>{in_c_, in_h_, in_w_} : layer_shape_[li - 1];
        const auto& c = std::get<ConvSpec>(specs_[li]);
        return {in[0], in[1], in[2], c.out_channels, c.kh, c.kw};
    }

    pool::Geometry pool_geometry(std::size_t li) const {
        const auto& in = layer_shape_[li - 1];
        const auto& p = std::get<PoolSpec>(specs_[li]);
        return {in[0], in[1], in[2], p.ph, p.pw};
    }

    void resolve_shapes() {
        std::vector<std::size_t> cur = {in_c_, in_h_, in_w_};
        for (std::size_t li = 0; li < specs_.size(); ++li) {
            if (const auto* c = std::get_if<ConvSpec>(&specs_[li])) {
                if (cur.size() != 3) throw ShapeMismatch("conv needs a CxHxW input");
                conv::Geometry g{cur[0], cur[1], cur[2], c->out_channels, c->kh, c->kw};
                g.validate();
                cur = {c->out_channels, g.out_h(), g.out_w()};
            } else if (const auto* p = std::get_if<PoolSpec>(&specs_[li])) {
                if (cur.size() != 3) throw ShapeMismatch("pool needs a CxHxW input");
                pool::Geometry g{cur[0], cur[1], cur[2], p->ph, p->pw};
                g.validate();
                cur = {cur[0], g.out_h(), g.out_w()};
            } else if (std::get_if<FlattenSpec>(&specs_[li])) {
                cur = {flat_size(cur)};
            } else {
                const auto& d = std::get<DenseSpec>(specs_[li]);
                if (cur.size() != 1) throw ShapeMismatch("dense needs a flat input");
                cur = {d.units};
            }
            layer_shape_.push_back(cur);
        }
    }

    void allocate_params() {
        std::vector<std::size_t> cur = {in_c_, in_h_, in_w_};
        for (std::size_t li = 0; li < specs_.size(); ++li) {
            if (const auto* c = std::get_if<ConvSpec>(&specs_[li])) {
                weights_.emplace_back(
                    std::vector<std::size_t>{c->out_channels, cur[0], c->kh, c->kw});
                biases_.emplace_back(std::vector<std::size_t>{c->out_channels});
            } else if (const auto* d = std::get_if<DenseSpec>(&specs_[li])) {
                weights_.emplace_back(std::vector<std::size_t>{d->units, flat_size(cur)});
                biases_.emplace_back(std::vector<std::size_t>{d->units});
            }
            cur = layer_shape_[li];
        }
    }

    std::vector<LayerSpec> specs_;
    std::size_t in_c_ = 0, in_h_ = 0, in_w_ = 0;
    std::vector<std::vector<std::size_t>> layer_shape_;
    std::vector<Tensor<S>> weights_;
    std::vector<Tensor<S>> biases_;
};

// Glorot-uniform initialization: weights uniform in +-sqrt(6/(fan_in+fan_out)),
// biases zero. Each parameter tensor draws from its own substream, so the
// result does not depend on layer iteration order.
template <class S>
Model<S> init_model(std::vector<LayerSpec> specs, std::size_t in_channels,
                    std::size_t in_h, std::size_t in_w, std::uint64_t seed) {
    Model<S> model(std::move(specs), in_channels, in_h, in_w);
    std::size_t param_i = 0;
    for (const LayerSpec& spec : model.specs()) {
        double fan_in = 0, fan_out = 0;
        if (const auto* c = std::get_if<ConvSpec>(&spec)) {
            const auto& w = model.weights()[param_i].shape;  // Cout,Cin,kh,kw
            fan_in = double(w[1]) * w[2] * w[3];
            fan_out = double(w[0]) * w[2] * w[3];
        } else if (const auto* d = std::get_if<DenseSpec>(&spec)) {
            const auto& w = model.weights()[param_i].shape;  // m,n
            fan_in = double(w[1]);
            fan_out = double(w[0]);
            (void)d;
        } else {
            continue;
        }
        (void)fan_in;
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        Rng rng(stream_seed(seed, {0x494E4954ull, param_i}));  // stream tag "INIT"
        for (S& v : model.weights()[param_i].data) {
            v = static_cast<S>(rng.next_symmetric(limit));
        }
        model.biases()[param_i].fill(S(0));
        ++param_i;
    }
    return model;
}

}  // namespace digitsum
