#include "nsr/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace nsr::simd {

const Kernels& scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_kernels();
#endif
#if defined(__aarch64__)
const Kernels& neon_kernels();
#endif

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar:
            return true;
        case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
        case Backend::neon: return "neon";
    }
    return "unknown";
}

Backend detect_backend() {
    if (const char* env = std::getenv("NSR_SIMD")) {
        const std::string want(env);
        for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon})
            if (want == backend_name(b) && backend_supported(b)) return b;
        // unknown or unsupported value: fall through to auto-detection
    }
    if (backend_supported(Backend::avx2)) return Backend::avx2;
    if (backend_supported(Backend::neon)) return Backend::neon;
    return Backend::scalar;
}

const Kernels& kernel_table(Backend b) {
    if (!backend_supported(b))
        throw std::invalid_argument("simd backend not available on this host: " +
                                    backend_name(b));
    switch (b) {
        case Backend::scalar:
            return scalar_kernels();
#if defined(__x86_64__) || defined(_M_X64)
        case Backend::avx2:
            return avx2_kernels();
#endif
#if defined(__aarch64__)
        case Backend::neon:
            return neon_kernels();
#endif
        default:
            return scalar_kernels();
    }
}

namespace {
std::atomic<const Kernels*>& active_slot() {
    static std::atomic<const Kernels*> slot{&kernel_table(detect_backend())};
    return slot;
}
}  // namespace

void select_backend(Backend b) { active_slot().store(&kernel_table(b)); }

const Kernels& active() { return *active_slot().load(); }

}  // namespace nsr::simd
