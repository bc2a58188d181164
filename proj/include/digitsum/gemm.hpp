#pragma once

#include <cstddef>

#if DIGITSUM_USE_OPENBLAS
#include <cblas.h>
extern "C" void openblas_set_num_threads(int);
#endif

namespace digitsum {

// Row-major C = alpha * op(A) * op(B) + beta * C, with op(X) = X or X^T.
// A is M x K after op, B is K x N after op, C is M x N. Leading dimensions
// are the row strides of the stored (un-transposed) matrices.
//
// Backed by OpenBLAS when available; the fallback below is a plain loop nest
// kept for portability and as a second route in oracle tests.
template <class S>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          S alpha, const S* a, std::size_t lda, const S* b, std::size_t ldb, S beta,
          S* c, std::size_t ldc);

namespace detail {

template <class S>
void gemm_naive(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                std::size_t k, S alpha, const S* a, std::size_t lda, const S* b,
                std::size_t ldb, S beta, S* c, std::size_t ldc) {
    auto at = [&](std::size_t i, std::size_t p) {
        return trans_a ? a[p * lda + i] : a[i * lda + p];
    };
    auto bt = [&](std::size_t p, std::size_t j) {
        return trans_b ? b[j * ldb + p] : b[p * ldb + j];
    };
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            S acc = 0;
            for (std::size_t p = 0; p < k; ++p) {
                acc += at(i, p) * bt(p, j);
            }
            c[i * ldc + j] = alpha * acc + beta * c[i * ldc + j];
        }
    }
}

}  // namespace detail

#if DIGITSUM_USE_OPENBLAS

template <>
inline void gemm<float>(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                        std::size_t k, float alpha, const float* a, std::size_t lda,
                        const float* b, std::size_t ldb, float beta, float* c,
                        std::size_t ldc) {
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
                static_cast<int>(ldc));
}

template <>
inline void gemm<double>(bool trans_a, bool trans_b, std::size_t m, std::size_t n,
                         std::size_t k, double alpha, const double* a, std::size_t lda,
                         const double* b, std::size_t ldb, double beta, double* c,
                         std::size_t ldc) {
    cblas_dgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
                static_cast<int>(ldc));
}

inline void set_blas_threads(int n) { openblas_set_num_threads(n); }

#else

template <class S>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          S alpha, const S* a, std::size_t lda, const S* b, std::size_t ldb, S beta,
          S* c, std::size_t ldc) {
    detail::gemm_naive(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

inline void set_blas_threads(int) {}

#endif

}  // namespace digitsum
