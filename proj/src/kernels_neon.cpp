// NEON variants of the dense kernels, aarch64 only (f64 NEON is baseline
// there, so no runtime feature probe is needed beyond the architecture).

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <cstddef>

#include "nsr/simd.hpp"

namespace nsr::simd {

namespace {

constexpr std::size_t kLanes = 2;  // doubles per float64x2_t

void gemm_neon(std::size_t n, const double* a, const double* b, double* c) {
    const std::size_t nv = n - n % kLanes;
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            const double* bk = b + k * n;
            const float64x2_t va = vdupq_n_f64(aik);
            std::size_t j = 0;
            for (; j < nv; j += kLanes) {
                float64x2_t vc = vld1q_f64(ci + j);
                vc = vfmaq_f64(vc, va, vld1q_f64(bk + j));
                vst1q_f64(ci + j, vc);
            }
            for (; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
}

void gemv_neon(std::size_t n, const double* a, const double* x, double* y) {
    const std::size_t nv = n - n % kLanes;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * n;
        float64x2_t acc = vdupq_n_f64(0.0);
        std::size_t j = 0;
        for (; j < nv; j += kLanes)
            acc = vfmaq_f64(acc, vld1q_f64(ai + j), vld1q_f64(x + j));
        double s = vaddvq_f64(acc);
        for (; j < n; ++j) s += ai[j] * x[j];
        y[i] = s;
    }
}

void axpy_neon(std::size_t len, double alpha, const double* x, double* y) {
    const std::size_t nv = len - len % kLanes;
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i < nv; i += kLanes) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < len; ++i) y[i] += alpha * x[i];
}

void combine_neon(std::size_t len, double alpha, const double* x, double beta,
                  const double* y, double* out) {
    const std::size_t nv = len - len % kLanes;
    const float64x2_t va = vdupq_n_f64(alpha);
    const float64x2_t vb = vdupq_n_f64(beta);
    std::size_t i = 0;
    for (; i < nv; i += kLanes) {
        const float64x2_t t = vmulq_f64(vb, vld1q_f64(y + i));
        vst1q_f64(out + i, vfmaq_f64(t, va, vld1q_f64(x + i)));
    }
    for (; i < len; ++i) out[i] = alpha * x[i] + beta * y[i];
}

double max_abs_row_sum_neon(std::size_t n, const double* a) {
    const std::size_t nv = n - n % kLanes;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * n;
        float64x2_t acc = vdupq_n_f64(0.0);
        std::size_t j = 0;
        for (; j < nv; j += kLanes) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(ai + j)));
        double row = vaddvq_f64(acc);
        for (; j < n; ++j) row += std::fabs(ai[j]);
        if (row > best) best = row;
    }
    return best;
}

double max_abs_neon(std::size_t len, const double* x) {
    const std::size_t nv = len - len % kLanes;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i < nv; i += kLanes) acc = vmaxq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
    double best = vmaxvq_f64(acc);
    for (; i < len; ++i) {
        const double v = std::fabs(x[i]);
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

const Kernels& neon_kernels() {
    static const Kernels k{gemm_neon,    gemv_neon,    axpy_neon,  combine_neon,
                           max_abs_row_sum_neon, max_abs_neon, "neon"};
    return k;
}

}  // namespace nsr::simd

#endif  // aarch64
