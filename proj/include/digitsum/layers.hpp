#pragma once

#include <cstddef>
#include <cstring>
#include <string>
#include <vector>

#include "digitsum/errors.hpp"
#include "digitsum/gemm.hpp"

namespace digitsum {

// Batched layer kernels. Layouts are row-major throughout:
//   conv input   B x C x H x W
//   conv weights Cout x Cin x kh x kw     (valid cross-correlation, stride 1)
//   dense input  B x n, weights m x n
//
// Convolutions run as im2col + GEMM over chunks of the batch: the patch
// matrices of up to kChunk samples sit side by side so each GEMM is large
// enough to reach useful BLAS throughput, and the Cout-major GEMM result is
// then scattered back into per-sample layout. The quadruple-loop reference
// implementations live in the test suite as oracles.

namespace conv {

inline constexpr std::size_t kChunk = 32;

struct Geometry {
    std::size_t in_channels, in_h, in_w;
    std::size_t out_channels, kh, kw;

    std::size_t out_h() const { return in_h - kh + 1; }
    std::size_t out_w() const { return in_w - kw + 1; }
    std::size_t patch() const { return in_channels * kh * kw; }      // GEMM K
    std::size_t positions() const { return out_h() * out_w(); }     // per sample
    std::size_t in_size() const { return in_channels * in_h * in_w; }
    std::size_t out_size() const { return out_channels * positions(); }

    void validate() const {
        if (kh == 0 || kw == 0 || kh > in_h || kw > in_w) {
            throw ShapeMismatch("conv kernel " + std::to_string(kh) + "x" +
                                std::to_string(kw) + " does not fit input " +
                                std::to_string(in_h) + "x" + std::to_string(in_w));
        }
    }
};

// Writes one sample's patch matrix into a wider chunk buffer: row (c,ky,kx),
// columns [col_offset, col_offset + positions()) of a matrix whose rows are
// row_stride long.
template <class S>
void im2col(const S* in, const Geometry& g, S* col, std::size_t row_stride,
            std::size_t col_offset) {
    const std::size_t ow = g.out_w();
    const std::size_t oh = g.out_h();
    std::size_t row = 0;
    for (std::size_t c = 0; c < g.in_channels; ++c) {
        const S* plane = in + c * g.in_h * g.in_w;
        for (std::size_t ky = 0; ky < g.kh; ++ky) {
            for (std::size_t kx = 0; kx < g.kw; ++kx, ++row) {
                S* dst = col + row * row_stride + col_offset;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    const S* src = plane + (oy + ky) * g.in_w + kx;
                    std::memcpy(dst + oy * ow, src, ow * sizeof(S));
                }
            }
        }
    }
}

// Scatter-add inverse of im2col for one sample's column block.
template <class S>
void col2im_add(const S* col, const Geometry& g, std::size_t row_stride,
                std::size_t col_offset, S* in) {
    const std::size_t ow = g.out_w();
    const std::size_t oh = g.out_h();
    std::size_t row = 0;
    for (std::size_t c = 0; c < g.in_channels; ++c) {
        S* plane = in + c * g.in_h * g.in_w;
        for (std::size_t ky = 0; ky < g.kh; ++ky) {
            for (std::size_t kx = 0; kx < g.kw; ++kx, ++row) {
                const S* src = col + row * row_stride + col_offset;
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    S* dst = plane + (oy + ky) * g.in_w + kx;
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        dst[ox] += src[oy * ow + ox];
                    }
                }
            }
        }
    }
}

template <class S>
void forward(const S* in, std::size_t batch, const Geometry& g, const S* weights,
             const S* bias, S* out, std::vector<S>& col_scratch,
             std::vector<S>& chunk_scratch) {
    g.validate();
    const std::size_t k = g.patch();
    const std::size_t p = g.positions();
    for (std::size_t begin = 0; begin < batch; begin += kChunk) {
        const std::size_t n = std::min(kChunk, batch - begin);
        const std::size_t width = n * p;
        col_scratch.resize(k * width);
        chunk_scratch.resize(g.out_channels * width);
        for (std::size_t s = 0; s < n; ++s) {
            im2col(in + (begin + s) * g.in_size(), g, col_scratch.data(), width, s * p);
        }
        gemm<S>(false, false, g.out_channels, width, k, S(1), weights, k,
                col_scratch.data(), width, S(0), chunk_scratch.data(), width);
        // chunk result is Cout x (n*P); scatter to per-sample Cout x P + bias.
        for (std::size_t s = 0; s < n; ++s) {
            S* out_s = out + (begin + s) * g.out_size();
            for (std::size_t f = 0; f < g.out_channels; ++f) {
                const S* src = chunk_scratch.data() + f * width + s * p;
                S* dst = out_s + f * p;
                const S bv = bias[f];
                for (std::size_t i = 0; i < p; ++i) dst[i] = src[i] + bv;
            }
        }
    }
}

// d_in may be null for the first layer, whose input gradient nobody consumes.
// d_weights and d_bias are zeroed here, then accumulated over the batch.
template <class S>
void backward(const S* in, std::size_t batch, const Geometry& g, const S* weights,
              const S* d_out, S* d_weights, S* d_bias, S* d_in,
              std::vector<S>& col_scratch, std::vector<S>& chunk_scratch,
              std::vector<S>& colgrad_scratch) {
    const std::size_t k = g.patch();
    const std::size_t p = g.positions();
    std::fill(d_weights, d_weights + g.out_channels * k, S(0));
    std::fill(d_bias, d_bias + g.out_channels, S(0));
    if (d_in) {
        std::fill(d_in, d_in + batch * g.in_size(), S(0));
    }
    for (std::size_t begin = 0; begin < batch; begin += kChunk) {
        const std::size_t n = std::min(kChunk, batch - begin);
        const std::size_t width = n * p;
        col_scratch.resize(k * width);
        chunk_scratch.resize(g.out_channels * width);
        for (std::size_t s = 0; s < n; ++s) {
            im2col(in + (begin + s) * g.in_size(), g, col_scratch.data(), width, s * p);
            // gather dY into Cout-major chunk layout
            const S* d_out_s = d_out + (begin + s) * g.out_size();
            for (std::size_t f = 0; f < g.out_channels; ++f) {
                std::memcpy(chunk_scratch.data() + f * width + s * p, d_out_s + f * p,
                            p * sizeof(S));
            }
        }
        // dW += dY . col^T
        gemm<S>(false, true, g.out_channels, k, width, S(1), chunk_scratch.data(),
                width, col_scratch.data(), width, S(1), d_weights, k);
        for (std::size_t f = 0; f < g.out_channels; ++f) {
            const S* row = chunk_scratch.data() + f * width;
            S acc = 0;
            for (std::size_t i = 0; i < width; ++i) acc += row[i];
            d_bias[f] += acc;
        }
        if (d_in) {
            // col-grad = W^T . dY, then scatter back onto the input windows.
            colgrad_scratch.resize(k * width);
            gemm<S>(true, false, k, width, g.out_channels, S(1), weights, k,
                    chunk_scratch.data(), width, S(0), colgrad_scratch.data(), width);
            for (std::size_t s = 0; s < n; ++s) {
                col2im_add(colgrad_scratch.data(), g, width, s * p,
                           d_in + (begin + s) * g.in_size());
            }
        }
    }
}

}  // namespace conv

namespace pool {

struct Geometry {
    std::size_t channels, in_h, in_w;
    std::size_t ph, pw;

    std::size_t out_h() const { return in_h / ph; }
    std::size_t out_w() const { return in_w / pw; }
    std::size_t in_size() const { return channels * in_h * in_w; }
    std::size_t out_size() const { return channels * out_h() * out_w(); }

    void validate() const {
        if (ph == 0 || pw == 0 || in_h % ph != 0 || in_w % pw != 0) {
            throw ShapeMismatch("pool window " + std::to_string(ph) + "x" +
                                std::to_string(pw) + " does not tile input " +
                                std::to_string(in_h) + "x" + std::to_string(in_w));
        }
    }
};

// argmax records, per output element, the flat index of the winning input
// element within the sample's C x H x W block; that is all backward needs.
template <class S>
void forward(const S* in, std::size_t batch, const Geometry& g, S* out,
             std::uint32_t* argmax) {
    g.validate();
    const std::size_t oh = g.out_h(), ow = g.out_w();
    for (std::size_t b = 0; b < batch; ++b) {
        const S* in_b = in + b * g.in_size();
        S* out_b = out + b * g.out_size();
        std::uint32_t* am_b = argmax + b * g.out_size();
        for (std::size_t c = 0; c < g.channels; ++c) {
            const S* plane = in_b + c * g.in_h * g.in_w;
            for (std::size_t oy = 0; oy < oh; ++oy) {
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    std::size_t best = (oy * g.ph) * g.in_w + ox * g.pw;
                    S best_v = plane[best];
                    for (std::size_t dy = 0; dy < g.ph; ++dy) {
                        for (std::size_t dx = 0; dx < g.pw; ++dx) {
                            const std::size_t idx =
                                (oy * g.ph + dy) * g.in_w + (ox * g.pw + dx);
                            if (plane[idx] > best_v) {
                                best_v = plane[idx];
                                best = idx;
                            }
                        }
                    }
                    out_b[c * oh * ow + oy * ow + ox] = best_v;
                    am_b[c * oh * ow + oy * ow + ox] =
                        static_cast<std::uint32_t>(c * g.in_h * g.in_w + best);
                }
            }
        }
    }
}

template <class S>
void backward(const std::uint32_t* argmax, std::size_t batch, const Geometry& g,
              const S* d_out, S* d_in) {
    std::fill(d_in, d_in + batch * g.in_size(), S(0));
    for (std::size_t b = 0; b < batch; ++b) {
        const S* d_out_b = d_out + b * g.out_size();
        const std::uint32_t* am_b = argmax + b * g.out_size();
        S* d_in_b = d_in + b * g.in_size();
        for (std::size_t i = 0; i < g.out_size(); ++i) {
            d_in_b[am_b[i]] += d_out_b[i];
        }
    }
}

}  // namespace pool

namespace dense {

// out (B x m) = in (B x n) . W^T (n x m) + bias
template <class S>
void forward(const S* in, std::size_t batch, std::size_t n, const S* weights,
             std::size_t m, const S* bias, S* out) {
    gemm<S>(false, true, batch, m, n, S(1), in, n, weights, n, S(0), out, m);
    for (std::size_t b = 0; b < batch; ++b) {
        S* row = out + b * m;
        for (std::size_t j = 0; j < m; ++j) row[j] += bias[j];
    }
}

template <class S>
void backward(const S* in, std::size_t batch, std::size_t n, const S* weights,
              std::size_t m, const S* d_out, S* d_weights, S* d_bias, S* d_in) {
    // dW = dY^T . X
    gemm<S>(true, false, m, n, batch, S(1), d_out, m, in, n, S(0), d_weights, n);
    for (std::size_t j = 0; j < m; ++j) {
        S acc = 0;
        for (std::size_t b = 0; b < batch; ++b) acc += d_out[b * m + j];
        d_bias[j] = acc;
    }
    if (d_in) {
        // dX = dY . W
        gemm<S>(false, false, batch, n, m, S(1), d_out, m, weights, n, S(0), d_in, n);
    }
}

}  // namespace dense

// ReLU works on post-activation values: a > 0 iff the pre-activation was > 0,
// and both derivatives vanish at a == 0.
template <class S>
void relu_inplace(S* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (x[i] < S(0)) x[i] = S(0);
    }
}

template <class S>
void relu_backward_inplace(const S* activated, S* grad, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (activated[i] <= S(0)) grad[i] = S(0);
    }
}

}  // namespace digitsum
