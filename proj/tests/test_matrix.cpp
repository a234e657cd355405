#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "nsr/matrix.hpp"
#include "nsr/precond.hpp"
#include "oracles.hpp"

using nsr::DenseMatrix;
using nsr::DenseVector;
using nsr::ProductCounter;

TEST_CASE("construction and validation") {
    CHECK_THROWS_AS(DenseMatrix(0), std::invalid_argument);
    CHECK_THROWS_AS(DenseMatrix(2, {1.0, 2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(DenseVector(0), std::invalid_argument);

    const DenseMatrix i3 = DenseMatrix::identity(3);
    CHECK(i3(0, 0) == 1.0);
    CHECK(i3(0, 1) == 0.0);

    const DenseMatrix d = DenseMatrix::diagonal({2.0, 4.0});
    CHECK(d(1, 1) == 4.0);
    CHECK(d(1, 0) == 0.0);

    const DenseMatrix m(2, {1.0, 2.0, 3.0, 4.0});
    const DenseMatrix t = m.transpose();
    CHECK(t(0, 1) == 3.0);
    CHECK(t(1, 0) == 2.0);
}

TEST_CASE("counted and uncounted products") {
    const DenseMatrix a(2, {1.0, 2.0, 3.0, 4.0});
    const DenseMatrix b(2, {5.0, 6.0, 7.0, 8.0});

    ProductCounter counter;
    const DenseMatrix c = mat_mul(a, b, counter);
    CHECK(counter.mmm == 1);
    CHECK(counter.mvm == 0);
    CHECK(c(0, 0) == 19.0);
    CHECK(c(0, 1) == 22.0);
    CHECK(c(1, 0) == 43.0);
    CHECK(c(1, 1) == 50.0);

    const DenseMatrix c2 = a * b;  // diagnostics path: no counting
    CHECK(oracle::max_abs_diff(c, c2) == 0.0);
    CHECK(counter.mmm == 1);

    const DenseVector x{1.0, -1.0};
    const DenseVector y = mat_vec(a, x, counter);
    CHECK(counter.mvm == 1);
    CHECK(y[0] == -1.0);
    CHECK(y[1] == -1.0);

    CHECK_THROWS_AS(mat_mul(a, DenseMatrix(3), counter), std::invalid_argument);
}

TEST_CASE("products match the naive oracle on random data") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const DenseMatrix a = nsr::random_spd_matrix(7, seed, 0.5, 3.0);
        const DenseMatrix b = nsr::random_spd_matrix(7, seed + 50, 0.5, 3.0);
        ProductCounter counter;
        CHECK(oracle::max_abs_diff(mat_mul(a, b, counter), oracle::mul(a, b)) < 1e-12);
    }
}

TEST_CASE("infinity norms") {
    const DenseMatrix m(2, {1.0, -2.0, 3.0, 4.0});
    CHECK(nsr::inf_norm(m) == 7.0);
    CHECK(nsr::inf_norm(DenseVector{1.0, -5.0, 2.0}) == 5.0);
}

TEST_CASE("residual is I - g*a and costs one counted product") {
    const DenseMatrix a = DenseMatrix::diagonal({2.0, 4.0});
    const DenseMatrix g = 0.25 * DenseMatrix::identity(2);
    ProductCounter counter;
    const DenseMatrix f = nsr::residual(a, g, counter);
    CHECK(counter.mmm == 1);
    CHECK(f(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(f(1, 1) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(f(0, 1) == 0.0);
}

TEST_CASE("spectral radius estimate") {
    SUBCASE("diagonal") {
        const DenseMatrix d = DenseMatrix::diagonal({0.25, -0.75, 0.5});
        CHECK(nsr::spectral_radius_estimate(d) == doctest::Approx(0.75).epsilon(1e-6));
    }
    SUBCASE("nilpotent goes to zero") {
        const DenseMatrix n(2, {0.0, 1.0, 0.0, 0.0});
        CHECK(nsr::spectral_radius_estimate(n) == 0.0);
    }
    SUBCASE("zero matrix") {
        CHECK(nsr::spectral_radius_estimate(DenseMatrix(3)) == 0.0);
    }
    SUBCASE("matches Jacobi eigenvalues on symmetric input") {
        for (std::uint64_t seed : {11u, 12u, 13u, 14u}) {
            DenseMatrix f = nsr::random_spd_matrix(6, seed, 0.2, 1.8);
            f -= DenseMatrix::identity(6);  // mixed-sign spectrum
            const auto eig = nsr::jacobi_eigenvalues(f);
            double rho = 0.0;
            for (double v : eig) rho = std::max(rho, std::fabs(v));
            CAPTURE(seed);
            CHECK(nsr::spectral_radius_estimate(f) ==
                  doctest::Approx(rho).epsilon(1e-4));
        }
    }
    SUBCASE("never exceeds the matrix norm") {
        const DenseMatrix m = nsr::random_spd_matrix(5, 77, 1.0, 9.0);
        CHECK(nsr::spectral_radius_estimate(m) <= nsr::inf_norm(m) + 1e-12);
    }
}

TEST_CASE("random SPD generator") {
    const DenseMatrix a = nsr::random_spd_matrix(6, 123, 1.0, 10.0);
    const DenseMatrix b = nsr::random_spd_matrix(6, 123, 1.0, 10.0);
    CHECK(oracle::max_abs_diff(a, b) == 0.0);  // deterministic

    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 6; ++j) CHECK(a(i, j) == a(j, i));

    const auto eig = nsr::jacobi_eigenvalues(a);
    CHECK(eig.front() >= 1.0 - 1e-9);
    CHECK(eig.back() <= 10.0 + 1e-9);

    const DenseMatrix c = nsr::random_spd_matrix(6, 124, 1.0, 10.0);
    CHECK(oracle::max_abs_diff(a, c) > 1e-3);

    CHECK_THROWS_AS(nsr::random_spd_matrix(3, 1, -1.0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(nsr::random_spd_matrix(3, 1, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("all_finite") {
    DenseMatrix m(2);
    CHECK(nsr::all_finite(m));
    m(1, 1) = std::nan("");
    CHECK_FALSE(nsr::all_finite(m));
    DenseVector v{1.0, 2.0};
    CHECK(nsr::all_finite(v));
    v[0] = INFINITY;
    CHECK_FALSE(nsr::all_finite(v));
}
