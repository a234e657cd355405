#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "nsr/simd.hpp"

namespace {

using nsr::simd::Backend;

std::vector<double> random_buffer(std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    std::vector<double> v(len);
    for (double& x : v) x = dist(rng);
    return v;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

// Yardstick versions, written with no shared code with the kernels.
void plain_gemm(std::size_t n, const double* a, const double* b, double* c) {
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += a[i * n + k] * b[k * n + j];
            c[i * n + j] = acc;
        }
}

void check_table_against_plain(const nsr::simd::Kernels& table, std::uint64_t seed) {
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 10u, 13u, 20u}) {
        const std::vector<double> a = random_buffer(n * n, seed + n);
        const std::vector<double> b = random_buffer(n * n, seed + 101 * n);
        std::vector<double> want(n * n), got(n * n);
        plain_gemm(n, a.data(), b.data(), want.data());
        table.gemm(n, a.data(), b.data(), got.data());
        CAPTURE(n);
        CHECK(max_diff(want, got) < 1e-12);

        const std::vector<double> x = random_buffer(n, seed + 7 * n);
        std::vector<double> yw(n, 0.0), yg(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) yw[i] += a[i * n + k] * x[k];
        table.gemv(n, a.data(), x.data(), yg.data());
        CHECK(max_diff(yw, yg) < 1e-12);

        std::vector<double> axw = b, axg = b;
        axw.resize(n * n);
        axg.resize(n * n);
        for (std::size_t i = 0; i < n * n; ++i) axw[i] += 0.75 * a[i];
        table.axpy(n * n, 0.75, a.data(), axg.data());
        CHECK(max_diff(axw, axg) < 1e-13);

        std::vector<double> cw(n * n), cg(n * n);
        for (std::size_t i = 0; i < n * n; ++i) cw[i] = -1.5 * a[i] + 0.25 * b[i];
        table.combine(n * n, -1.5, a.data(), 0.25, b.data(), cg.data());
        CHECK(max_diff(cw, cg) < 1e-13);

        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double row = 0.0;
            for (std::size_t k = 0; k < n; ++k) row += std::fabs(a[i * n + k]);
            norm = std::max(norm, row);
        }
        CHECK(table.max_abs_row_sum(n, a.data()) == doctest::Approx(norm).epsilon(1e-13));

        double big = 0.0;
        for (double v : a) big = std::max(big, std::fabs(v));
        CHECK(table.max_abs(n * n, a.data()) == doctest::Approx(big).epsilon(1e-13));
    }
}

}  // namespace

TEST_CASE("scalar kernels match plain loops") {
    check_table_against_plain(nsr::simd::kernel_table(Backend::scalar), 999);
}

TEST_CASE("combine supports aliased output") {
    const nsr::simd::Kernels& table = nsr::simd::active();
    std::vector<double> x = random_buffer(37, 5);
    const std::vector<double> y = random_buffer(37, 6);
    std::vector<double> want(37);
    for (std::size_t i = 0; i < 37; ++i) want[i] = 2.0 * x[i] - 0.5 * y[i];
    table.combine(37, 2.0, x.data(), -0.5, y.data(), x.data());
    CHECK(max_diff(want, x) < 1e-13);
}

TEST_CASE("simd backend equivalence with scalar") {
    for (Backend b : {Backend::avx2, Backend::neon}) {
        if (!nsr::simd::backend_supported(b)) continue;
        INFO("backend ", nsr::simd::backend_name(b));
        check_table_against_plain(nsr::simd::kernel_table(b), 4242);
    }
}

TEST_CASE("backend selection and naming") {
    CHECK(nsr::simd::backend_supported(Backend::scalar));
    CHECK(nsr::simd::backend_name(Backend::scalar) == "scalar");
    CHECK(nsr::simd::backend_name(Backend::avx2) == "avx2");
    CHECK(nsr::simd::backend_name(Backend::neon) == "neon");

    const Backend detected = nsr::simd::detect_backend();
    CHECK(nsr::simd::backend_supported(detected));

    const std::string before = nsr::simd::active().name;
    nsr::simd::select_backend(Backend::scalar);
    CHECK(std::string(nsr::simd::active().name) == "scalar");
    nsr::simd::select_backend(detected);
    CHECK(std::string(nsr::simd::active().name) == before);

    for (Backend b : {Backend::avx2, Backend::neon})
        if (!nsr::simd::backend_supported(b))
            CHECK_THROWS_AS((void)nsr::simd::kernel_table(b), std::invalid_argument);
}
