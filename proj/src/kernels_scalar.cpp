#include "nsr/simd.hpp"

#include <cmath>

// Reference kernels. Plain loops, no intrinsics; every other backend is
// equivalence-tested against these.

namespace nsr::simd {

namespace {

void gemm_scalar(std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double aik = a[i * n + k];
            const double* bk = b + k * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
}

void gemv_scalar(std::size_t n, const double* a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += ai[j] * x[j];
        y[i] = acc;
    }
}

void axpy_scalar(std::size_t len, double alpha, const double* x, double* y) {
    for (std::size_t i = 0; i < len; ++i) y[i] += alpha * x[i];
}

void combine_scalar(std::size_t len, double alpha, const double* x, double beta,
                    const double* y, double* out) {
    for (std::size_t i = 0; i < len; ++i) out[i] = alpha * x[i] + beta * y[i];
}

double max_abs_row_sum_scalar(std::size_t n, const double* a) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = a + i * n;
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j) row += std::fabs(ai[j]);
        if (row > best) best = row;
    }
    return best;
}

double max_abs_scalar(std::size_t len, const double* x) {
    double best = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double v = std::fabs(x[i]);
        if (v > best) best = v;
    }
    return best;
}

}  // namespace

const Kernels& scalar_kernels() {
    static const Kernels k{gemm_scalar,    gemv_scalar,    axpy_scalar,
                           combine_scalar, max_abs_row_sum_scalar,
                           max_abs_scalar, "scalar"};
    return k;
}

}  // namespace nsr::simd
