#pragma once

#include <cstddef>
#include <string>

namespace nsr::simd {

enum class Backend { scalar, avx2, neon };

/// Dense inner-loop kernels. All matrices are square n x n, row-major,
/// double precision. Output buffers must not alias inputs unless noted.
struct Kernels {
    /// c = a * b
    void (*gemm)(std::size_t n, const double* a, const double* b, double* c);
    /// y = a * x
    void (*gemv)(std::size_t n, const double* a, const double* x, double* y);
    /// y += alpha * x, vectors of length len
    void (*axpy)(std::size_t len, double alpha, const double* x, double* y);
    /// out = alpha * x + beta * y, elementwise; out may alias x or y
    void (*combine)(std::size_t len, double alpha, const double* x, double beta,
                    const double* y, double* out);
    /// max over rows of the sum of absolute entries (matrix infinity norm)
    double (*max_abs_row_sum)(std::size_t n, const double* a);
    /// max_i |x_i|
    double (*max_abs)(std::size_t len, const double* x);
    const char* name;
};

/// Backend the current process would pick on its own: the widest SIMD level
/// the CPU reports, overridable with NSR_SIMD=scalar|avx2|neon.
Backend detect_backend();

bool backend_supported(Backend b);

/// Kernel table for an explicitly named backend (equivalence tests).
/// Throws std::invalid_argument if the backend cannot run on this host.
const Kernels& kernel_table(Backend b);

/// Force the active backend for the rest of the process.
void select_backend(Backend b);

/// Currently active kernel table.
const Kernels& active();

std::string backend_name(Backend b);

}  // namespace nsr::simd
