// AVX2+FMA variants of the dense kernels. Built only on x86-64; the
// dispatcher never hands these out unless the CPU reports avx2 and fma.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "nsr/simd.hpp"

namespace nsr::simd {

namespace {

constexpr std::size_t kLanes = 4;  // doubles per __m256d

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_max_sd(lo, shuf));
}

inline __m256d abs_pd(__m256d v) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    return _mm256_andnot_pd(sign, v);
}

void gemm_avx2(std::size_t n, const double* a, const double* b, double* c) {
    const std::size_t nv = n - n % kLanes;
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            const double* bk = b + k * n;
            const __m256d va = _mm256_set1_pd(aik);
            std::size_t j = 0;
            for (; j < nv; j += kLanes) {
                __m256d vc = _mm256_loadu_pd(ci + j);
                vc = _mm256_fmadd_pd(va, _mm256_loadu_pd(bk + j), vc);
                _mm256_storeu_pd(ci + j, vc);
            }
            for (; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
}

void gemv_avx2(std::size_t n, const double* a, const double* x, double* y) {
    const std::size_t nv = n - n % kLanes;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * n;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j < nv; j += kLanes)
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + j), _mm256_loadu_pd(x + j), acc);
        double s = hsum(acc);
        for (; j < n; ++j) s += ai[j] * x[j];
        y[i] = s;
    }
}

void axpy_avx2(std::size_t len, double alpha, const double* x, double* y) {
    const std::size_t nv = len - len % kLanes;
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i < nv; i += kLanes) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < len; ++i) y[i] += alpha * x[i];
}

void combine_avx2(std::size_t len, double alpha, const double* x, double beta,
                  const double* y, double* out) {
    const std::size_t nv = len - len % kLanes;
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i < nv; i += kLanes) {
        const __m256d t = _mm256_mul_pd(vb, _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), t));
    }
    for (; i < len; ++i) out[i] = alpha * x[i] + beta * y[i];
}

double max_abs_row_sum_avx2(std::size_t n, const double* a) {
    const std::size_t nv = n - n % kLanes;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * n;
        __m256d acc = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j < nv; j += kLanes)
            acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(ai + j)));
        double row = hsum(acc);
        for (; j < n; ++j) row += std::fabs(ai[j]);
        if (row > best) best = row;
    }
    return best;
}

double max_abs_avx2(std::size_t len, const double* x) {
    const std::size_t nv = len - len % kLanes;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < nv; i += kLanes) acc = _mm256_max_pd(acc, abs_pd(_mm256_loadu_pd(x + i)));
    double best = hmax(acc);
    for (; i < len; ++i) {
        const double v = std::fabs(x[i]);
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

const Kernels& avx2_kernels() {
    static const Kernels k{gemm_avx2,    gemv_avx2,    axpy_avx2,  combine_avx2,
                           max_abs_row_sum_avx2, max_abs_avx2, "avx2"};
    return k;
}

}  // namespace nsr::simd

#endif  // x86-64
