#include <doctest.h>

#include <optional>
#include <stdexcept>

#include "nsr/inverters.hpp"
#include "nsr/matrix.hpp"
#include "nsr/precond.hpp"
#include "oracles.hpp"

using namespace nsr;

namespace {

// Scalar problem where every intermediate is an exact binary fraction:
// a = 2, g0 = 1/4, f0 = 1/2. Hand-evaluated update values below.
const DenseMatrix kA1(1, {2.0});
const DenseMatrix kG1(1, {0.25});

InverterState seeded_state() { return make_state(kA1, kG1); }

}  // namespace

TEST_CASE("make_state computes the residual and counts one product") {
    InverterState s = seeded_state();
    CHECK(s.counter.mmm == 1);
    CHECK(s.step == 0);
    REQUIRE(s.f.has_value());
    CHECK((*s.f)(0, 0) == 0.5);
    CHECK_THROWS_AS(make_state(DenseMatrix(2), kG1), std::invalid_argument);
}

TEST_CASE("ns2 scalar steps: g doubles its correct bits, two products each") {
    InverterState s = seeded_state();
    ns2_step(s, kA1);
    CHECK(s.g(0, 0) == 0.375);       // g0 + f0*g0
    CHECK((*s.f)(0, 0) == 0.25);     // f0^2
    CHECK(s.counter.mmm == 3);
    CHECK(s.step == 1);

    ns2_step(s, kA1);
    CHECK(s.g(0, 0) == 0.46875);
    CHECK((*s.f)(0, 0) == 0.0625);   // f0^4
    CHECK(s.counter.mmm == 5);
}

TEST_CASE("hyperpower order 3 scalar step") {
    InverterState s = seeded_state();
    hyperpower_step(s, kA1, 3);
    CHECK(s.g(0, 0) == 0.4375);      // (1 + f0 + f0^2) g0
    CHECK((*s.f)(0, 0) == 0.125);    // f0^3
    CHECK(s.counter.mmm == 4);       // 1 seed + 3
    CHECK_THROWS_AS(hyperpower_step(s, kA1, 1), std::invalid_argument);
}

TEST_CASE("durand steps leave the residual stale") {
    InverterState s = seeded_state();
    const DenseMatrix f0 = *s.f;
    const DenseMatrix g0 = s.g;

    durand_step(s, f0, g0);
    CHECK(s.g(0, 0) == 0.375);
    CHECK_FALSE(s.f.has_value());
    durand_step(s, f0, g0);
    CHECK(s.g(0, 0) == 0.4375);
    CHECK(s.counter.mmm == 3);  // 1 seed + 1 per step

    // Refresh on demand costs exactly one product and equals f0^(k+1).
    const DenseMatrix& f = materialized_residual(s, kA1);
    CHECK(f(0, 0) == 0.125);
    CHECK(s.counter.mmm == 4);
    materialized_residual(s, kA1);
    CHECK(s.counter.mmm == 4);  // cached now
}

TEST_CASE("residual exponent identities on a conditioned SPD system") {
    const DenseMatrix a = random_spd_matrix(4, 42, 1.0, 8.0);
    const Preconditioner pc = alpha_preconditioner(a);
    const InverterState base = make_state(a, pc.s_inv);
    const DenseMatrix f0 = *base.f;

    auto check_exponent = [&](InverterState& s, InverterKind kind, int n, long k) {
        const auto e = predicted_exponent(kind, n, k);
        REQUIRE(e.has_value());
        const DenseMatrix expect = oracle::power(f0, *e);
        CAPTURE(static_cast<int>(kind));
        CAPTURE(k);
        CHECK(oracle::max_abs_diff(materialized_residual(s, a), expect) < 1e-12);
    };

    SUBCASE("ns2: f_k = f0^(2^k)") {
        InverterState s = base;
        for (long k = 1; k <= 4; ++k) {
            ns2_step(s, a);
            check_exponent(s, InverterKind::ns2, 2, k);
        }
    }
    SUBCASE("hyperpower 3: f_k = f0^(3^k)") {
        InverterState s = base;
        for (long k = 1; k <= 3; ++k) {
            hyperpower_step(s, a, 3);
            check_exponent(s, InverterKind::hyperpower, 3, k);
        }
    }
    SUBCASE("durand: f_k = f0^(k+1)") {
        InverterState s = base;
        for (long k = 1; k <= 6; ++k) {
            durand_step(s, f0, pc.s_inv);
            check_exponent(s, InverterKind::durand, 1, k);
            s.f.reset();  // keep the stale-residual regime
        }
    }
    SUBCASE("combined order 2: f_k = f0^(k*2^(k+1) + 2^k)") {
        InverterState s = make_combined_state(a, pc.s_inv, 2);
        CHECK(s.counter.mmm == 3);  // n+1 seed products
        for (long k = 1; k <= 2; ++k) {
            combined_step(s, a, 2);
            check_exponent(s, InverterKind::combined, 2, k);
        }
        CHECK(s.counter.mmm == 3 + 2 * 5);  // 2n+1 per step
    }
    SUBCASE("factorized 8: f_k = f0^(8^k)") {
        InverterState s = base;
        const auto fact = OrderFactorization::canonical(8);
        for (long k = 1; k <= 2; ++k) {
            factorized_step(s, a, fact);
            check_exponent(s, InverterKind::factorized, 8, k);
        }
        CHECK(s.counter.mmm == 1 + 2 * 6);
    }
}

TEST_CASE("combined order 1 reproduces durand bit for bit") {
    const DenseMatrix a = random_spd_matrix(5, 99, 0.5, 4.0);
    const Preconditioner pc = alpha_preconditioner(a);

    InverterState dur = make_state(a, pc.s_inv);
    const DenseMatrix f0 = *dur.f;
    InverterState cmb = make_combined_state(a, pc.s_inv, 1);

    for (int k = 0; k < 4; ++k) {
        durand_step(dur, f0, pc.s_inv);
        combined_step(cmb, a, 1);
        CAPTURE(k);
        CHECK(oracle::max_abs_diff(dur.g, cmb.g) == 0.0);
    }
}

TEST_CASE("combined_step rejects unseeded states") {
    InverterState s = seeded_state();
    CHECK_THROWS_AS(combined_step(s, kA1, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_combined_state(kA1, kG1, 0), std::invalid_argument);
}

TEST_CASE("order factorization arithmetic") {
    const auto f8 = OrderFactorization::of(8, 2, 3, false);
    CHECK(f8.w == 2);
    CHECK(f8.p == 3);
    CHECK_FALSE(f8.prime_bump);
    CHECK(OrderFactorization::of(9, 4, 1, true).prime_bump);
    CHECK(OrderFactorization::of(2, 1, 1, false).product_budget() == 2);

    CHECK_THROWS_AS(OrderFactorization::of(8, 3, 2, false), std::invalid_argument);
    CHECK_THROWS_AS(OrderFactorization::of(1, 1, 0, false), std::invalid_argument);
    CHECK_THROWS_AS(OrderFactorization::of(4, 2, -1, false), std::invalid_argument);
}

TEST_CASE("canonical factorizations and product budgets") {
    struct Expect {
        int n, w, p;
        bool bump;
    };
    const Expect tuned[] = {{8, 2, 3, false}, {9, 3, 2, false}, {10, 5, 1, false},
                            {11, 5, 1, true}};
    for (const auto& e : tuned) {
        const auto f = OrderFactorization::canonical(e.n);
        CAPTURE(e.n);
        CHECK(f.w == e.w);
        CHECK(f.p == e.p);
        CHECK(f.prime_bump == e.bump);
        CHECK(f.product_budget() == 6);
        CHECK(f.is_tuned_scheme());
    }

    const auto f6 = OrderFactorization::canonical(6);
    CHECK(f6.w == 3);
    CHECK(f6.p == 1);
    CHECK_FALSE(f6.prime_bump);
    CHECK(f6.product_budget() == 5);
    CHECK_FALSE(f6.is_tuned_scheme());

    CHECK(OrderFactorization::canonical(12).product_budget() == 7);
    CHECK(OrderFactorization::canonical(2).product_budget() == 2);
    CHECK_FALSE(OrderFactorization::of(8, 4, 1, false).is_tuned_scheme());
    CHECK_THROWS_AS(OrderFactorization::canonical(1), std::invalid_argument);
}

TEST_CASE("factorized steps match plain hyperpower steps of the same order") {
    const DenseMatrix a = random_spd_matrix(6, 7, 1.0, 6.0);
    const Preconditioner pc = alpha_preconditioner(a);

    for (int n : {8, 9, 10, 11, 12}) {
        InverterState plain = make_state(a, pc.s_inv);
        InverterState fast = make_state(a, pc.s_inv);
        const auto fact = OrderFactorization::canonical(n);

        hyperpower_step(plain, a, n);
        factorized_step(fast, a, fact);

        CAPTURE(n);
        CHECK(oracle::max_abs_diff(plain.g, fast.g) < 1e-12);
        CHECK(oracle::max_abs_diff(*plain.f, *fast.f) < 1e-12);
        CHECK(plain.counter.mmm == 1 + static_cast<std::uint64_t>(n));
        CHECK(fast.counter.mmm ==
              1 + static_cast<std::uint64_t>(fact.product_budget()));
        if (n <= 11) CHECK(fact.product_budget() == 6);
    }
}

TEST_CASE("factorized_step re-validates hand-built factorizations") {
    const DenseMatrix a = random_spd_matrix(3, 5, 1.0, 2.0);
    InverterState s = make_state(a, alpha_preconditioner(a).s_inv);
    const OrderFactorization bogus{9, 2, 3, false};  // 2*(3+1) != 9
    CHECK_THROWS_AS(factorized_step(s, a, bogus), std::invalid_argument);
}

TEST_CASE("predicted exponents and overflow behaviour") {
    using K = InverterKind;
    CHECK(predicted_exponent(K::ns2, 2, 0) == 1);
    CHECK(predicted_exponent(K::ns2, 2, 3) == 8);
    CHECK(predicted_exponent(K::ns2, 2, 63) == (std::uint64_t{1} << 63));
    CHECK_FALSE(predicted_exponent(K::ns2, 2, 64).has_value());

    CHECK(predicted_exponent(K::hyperpower, 3, 2) == 9);
    CHECK(predicted_exponent(K::hyperpower, 3, 40) == 12157665459056928801ULL);
    CHECK_FALSE(predicted_exponent(K::hyperpower, 3, 41).has_value());
    CHECK(predicted_exponent(K::factorized, 10, 3) == 1000);

    CHECK(predicted_exponent(K::durand, 1, 7) == 8);

    CHECK(predicted_exponent(K::combined, 2, 0) == 1);
    CHECK(predicted_exponent(K::combined, 2, 1) == 6);
    CHECK(predicted_exponent(K::combined, 2, 2) == 20);
    CHECK(predicted_exponent(K::combined, 2, 3) == 56);
    CHECK(predicted_exponent(K::combined, 1, 9) == 10);  // order 1 == durand
    CHECK_FALSE(predicted_exponent(K::combined, 2, 60).has_value());

    CHECK_THROWS_AS(predicted_exponent(K::ns2, 2, -1), std::invalid_argument);
    CHECK_THROWS_AS(predicted_exponent(K::hyperpower, 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(predicted_exponent(K::combined, 0, 2), std::invalid_argument);
}

TEST_CASE("efficiency index") {
    CHECK(efficiency_index(2, 2) == doctest::Approx(1.41421356).epsilon(1e-8));
    CHECK(efficiency_index(9, 6) == doctest::Approx(1.44224957).epsilon(1e-8));
    CHECK_THROWS_AS(efficiency_index(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(efficiency_index(4, 0), std::invalid_argument);
}

TEST_CASE("series preconditioning") {
    SUBCASE("order 1 is the plain guess, no products") {
        ProductCounter c;
        const DenseMatrix g0 = series_precondition(kG1, kA1, 1, &c);
        CHECK(g0(0, 0) == 0.25);
        CHECK(c.mmm == 0);
    }
    SUBCASE("scalar order 4") {
        ProductCounter c;
        const DenseMatrix g0 = series_precondition(kG1, kA1, 4, &c);
        CHECK(g0(0, 0) == 0.46875);  // (1 + 1/2 + 1/4 + 1/8)/4
        CHECK(c.mmm == 4);           // residual + 3 Horner terms
    }
    SUBCASE("factorized orders agree with the explicit power sum") {
        const DenseMatrix a = random_spd_matrix(5, 21, 1.0, 5.0);
        const DenseMatrix s_inv = alpha_preconditioner(a).s_inv;
        const DenseMatrix f0 = oracle::residual(a, s_inv);
        for (int order : {9, 11}) {
            DenseMatrix expect(5);
            for (int j = 0; j < order; ++j) expect += oracle::mul(oracle::power(f0, j), s_inv);
            ProductCounter c;
            const DenseMatrix g0 = series_precondition(s_inv, a, order, &c);
            CAPTURE(order);
            CHECK(oracle::max_abs_diff(g0, expect) < 1e-12);
            CHECK(c.mmm == 6);  // residual + five-product scheme
        }
    }
    SUBCASE("rejects non-positive orders") {
        CHECK_THROWS_AS(series_precondition(kG1, kA1, 0), std::invalid_argument);
    }
}

TEST_CASE("divergence is detected and reported with the step index") {
    const DenseMatrix g_huge(1, {1e60});
    InverterState s = make_state(kA1, g_huge);
    try {
        ns2_step(s, kA1);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        CHECK(e.step == 1);
    }
}
