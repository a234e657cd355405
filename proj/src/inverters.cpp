#include "nsr/inverters.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "nsr/simd.hpp"

namespace nsr {

namespace {

constexpr double kDivergenceCap = 1e100;

DenseMatrix mul(const DenseMatrix& a, const DenseMatrix& b, int& mmm) {
    ++mmm;
    return a * b;
}

DenseMatrix identity_minus(DenseMatrix m) {
    const std::size_t n = m.dim();
    simd::active().combine(n * n, -1.0, m.data(), 0.0, m.data(), m.data());
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
    return m;
}

/// (I + f + ... + f^(order-1)) g by Horner: acc = g + f*acc, order-1 products.
DenseMatrix series_times(const DenseMatrix& f, const DenseMatrix& g, int order,
                         int& mmm) {
    DenseMatrix acc = g;
    for (int j = 1; j < order; ++j) acc = g + mul(f, acc, mmm);
    return acc;
}

void check_finite(const DenseMatrix& m, long step, const char* where) {
    if (!all_finite(m) || simd::active().max_abs(m.size(), m.data()) > kDivergenceCap)
        throw DivergenceError(std::string(where) + ": iteration diverged at step " +
                                  std::to_string(step),
                              step);
}

// Published 6-product schemes (residual refresh included elsewhere). Each
// applies (sum_{j<n} f^j) to g in 5 products.
DenseMatrix series8(const DenseMatrix& f, const DenseMatrix& g, int& mmm) {
    // (I + F^4)(I + F^2)(I + F) G
    DenseMatrix t = g + mul(f, g, mmm);
    const DenseMatrix f2 = mul(f, f, mmm);
    t += mul(f2, t, mmm);
    const DenseMatrix f4 = mul(f2, f2, mmm);
    t += mul(f4, t, mmm);
    return t;
}

DenseMatrix series9(const DenseMatrix& f, const DenseMatrix& g, int& mmm) {
    // (I + (I + F^4)(I + F^2)(F + F^2)) G
    const DenseMatrix f2 = mul(f, f, mmm);
    const DenseMatrix f4 = mul(f2, f2, mmm);
    const std::size_t n = f.dim();
    DenseMatrix i_plus_f4 = f4;
    for (std::size_t i = 0; i < n; ++i) i_plus_f4(i, i) += 1.0;
    DenseMatrix i_plus_f2 = f2;
    for (std::size_t i = 0; i < n; ++i) i_plus_f2(i, i) += 1.0;
    const DenseMatrix m = mul(i_plus_f4, i_plus_f2, mmm);
    const DenseMatrix nn = mul(m, f + f2, mmm);
    return g + mul(nn, g, mmm);
}

DenseMatrix series10(const DenseMatrix& f, const DenseMatrix& g, int& mmm) {
    // (I + (F^2 + F^4)(I + F^4)) (I + F) G
    DenseMatrix t = g + mul(f, g, mmm);
    const DenseMatrix f2 = mul(f, f, mmm);
    const DenseMatrix f4 = mul(f2, f2, mmm);
    const std::size_t n = f.dim();
    DenseMatrix i_plus_f4 = f4;
    for (std::size_t i = 0; i < n; ++i) i_plus_f4(i, i) += 1.0;
    const DenseMatrix m = mul(f2 + f4, i_plus_f4, mmm);
    return t + mul(m, t, mmm);
}

DenseMatrix series11(const DenseMatrix& f, const DenseMatrix& g, int& mmm) {
    // (I + (I + (F^2 + F^4)(I + F^4))(F + F^2)) G
    const DenseMatrix f2 = mul(f, f, mmm);
    const DenseMatrix f4 = mul(f2, f2, mmm);
    const std::size_t n = f.dim();
    DenseMatrix i_plus_f4 = f4;
    for (std::size_t i = 0; i < n; ++i) i_plus_f4(i, i) += 1.0;
    DenseMatrix m = mul(f2 + f4, i_plus_f4, mmm);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += 1.0;
    const DenseMatrix nn = mul(m, f + f2, mmm);
    return g + mul(nn, g, mmm);
}

/// Factored application of (sum_{j<n} f^j) to g. The generic route evaluates
/// the inner sum against g first, recovers F^(p+1) from it as
/// I - (sum_d F^d G) A, then runs the outer sum; a is only touched on that
/// recovery.
DenseMatrix apply_factored_series(const DenseMatrix& f, const DenseMatrix& g,
                                  const DenseMatrix& a, const OrderFactorization& fact,
                                  int& mmm) {
    if (fact.is_tuned_scheme()) {
        switch (fact.n) {
            case 8: return series8(f, g, mmm);
            case 9: return series9(f, g, mmm);
            case 10: return series10(f, g, mmm);
            case 11: return series11(f, g, mmm);
        }
    }
    DenseMatrix t = series_times(f, g, fact.p + 1, mmm);
    if (fact.w > 1) {
        if (fact.p > 0) {
            const DenseMatrix q = identity_minus(mul(t, a, mmm));  // F^(p+1)
            t = series_times(q, t, fact.w, mmm);
        } else {
            t = series_times(f, t, fact.w, mmm);
        }
    }
    if (fact.prime_bump) t = g + mul(f, t, mmm);
    return t;
}

std::optional<std::uint64_t> checked_pow(std::uint64_t base, long exp) {
    std::uint64_t r = 1;
    for (long i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(r, base, &r)) return std::nullopt;
    }
    return r;
}

}  // namespace

InverterState make_state(const DenseMatrix& a, const DenseMatrix& g0) {
    if (a.dim() != g0.dim()) throw std::invalid_argument("make_state: dimension mismatch");
    InverterState s{g0, std::nullopt, 0, {}, std::nullopt};
    s.f = residual(a, g0, s.counter);
    return s;
}

InverterState make_combined_state(const DenseMatrix& a, const DenseMatrix& s_inv, int n) {
    if (n < 1) throw std::invalid_argument("make_combined_state: order must be >= 1");
    if (a.dim() != s_inv.dim())
        throw std::invalid_argument("make_combined_state: dimension mismatch");
    int mmm = 0;
    DenseMatrix f0 = identity_minus(mul(s_inv, a, mmm));
    DenseMatrix l0 = series_times(f0, s_inv, n, mmm);  // Gamma_0 = F_0
    DenseMatrix gamma_n = identity_minus(mul(l0, a, mmm));
    InverterState s{s_inv, std::move(f0), 0, {}, std::nullopt};
    s.counter.mmm += static_cast<std::uint64_t>(mmm);
    s.extra = CombinedExtra{std::move(l0), std::move(gamma_n)};
    return s;
}

const DenseMatrix& materialized_residual(InverterState& state, const DenseMatrix& a) {
    if (!state.f) state.f = residual(a, state.g, state.counter);
    return *state.f;
}

void ns2_step(InverterState& state, const DenseMatrix& a) {
    const DenseMatrix& f = materialized_residual(state, a);
    int mmm = 0;
    DenseMatrix g_next = state.g + mul(f, state.g, mmm);
    DenseMatrix f_next = identity_minus(mul(g_next, a, mmm));
    state.counter.mmm += static_cast<std::uint64_t>(mmm);
    ++state.step;
    check_finite(g_next, state.step, "ns2_step");
    state.g = std::move(g_next);
    state.f = std::move(f_next);
}

void hyperpower_step(InverterState& state, const DenseMatrix& a, int n) {
    if (n < 2) throw std::invalid_argument("hyperpower_step: order must be >= 2");
    const DenseMatrix& f = materialized_residual(state, a);
    int mmm = 0;
    DenseMatrix g_next = series_times(f, state.g, n, mmm);
    DenseMatrix f_next = identity_minus(mul(g_next, a, mmm));
    state.counter.mmm += static_cast<std::uint64_t>(mmm);
    ++state.step;
    check_finite(g_next, state.step, "hyperpower_step");
    state.g = std::move(g_next);
    state.f = std::move(f_next);
}

void durand_step(InverterState& state, const DenseMatrix& f0, const DenseMatrix& g0) {
    int mmm = 0;
    DenseMatrix g_next = mul(f0, state.g, mmm) + g0;
    state.counter.mmm += static_cast<std::uint64_t>(mmm);
    ++state.step;
    check_finite(g_next, state.step, "durand_step");
    state.g = std::move(g_next);
    state.f.reset();  // stale from here on; f_k = f0^(k+1) analytically
}

void combined_step(InverterState& state, const DenseMatrix& a, int n) {
    if (n < 1) throw std::invalid_argument("combined_step: order must be >= 1");
    if (!state.extra)
        throw std::invalid_argument("combined_step: state not seeded by make_combined_state");
    const DenseMatrix& f = materialized_residual(state, a);
    int mmm = 0;

    // First half: the L/Gamma chain. Gamma_k = I - L_{k-1} A is exactly the
    // Gamma^n saved by the previous step, so it is reused, not recomputed.
    const DenseMatrix& gamma = state.extra->gamma_n;
    DenseMatrix l_next = series_times(gamma, state.extra->l, n, mmm);
    DenseMatrix gamma_n_next = identity_minus(mul(l_next, a, mmm));

    // Second half, data-independent of the first: (sum_{j<n} f^j) g.
    DenseMatrix sf_g = series_times(f, state.g, n, mmm);

    // Merge.
    DenseMatrix g_next = l_next + mul(gamma_n_next, sf_g, mmm);
    DenseMatrix f_next = identity_minus(mul(g_next, a, mmm));

    state.counter.mmm += static_cast<std::uint64_t>(mmm);
    ++state.step;
    check_finite(g_next, state.step, "combined_step");
    state.g = std::move(g_next);
    state.f = std::move(f_next);
    state.extra->l = std::move(l_next);
    state.extra->gamma_n = std::move(gamma_n_next);
}

OrderFactorization OrderFactorization::of(int n, int w, int p, bool prime_bump) {
    if (n < 2 || w < 1 || p < 0)
        throw std::invalid_argument("OrderFactorization: need n >= 2, w >= 1, p >= 0");
    const long base = static_cast<long>(w) * (p + 1);
    const long want = prime_bump ? base + 1 : base;
    if (want != n)
        throw std::invalid_argument(
            "OrderFactorization: n != w*(p+1)" + std::string(prime_bump ? "+1" : ""));
    return OrderFactorization{n, w, p, prime_bump};
}

bool OrderFactorization::is_tuned_scheme() const {
    return (n == 8 && w == 2 && p == 3 && !prime_bump) ||
           (n == 9 && w == 3 && p == 2 && !prime_bump) ||
           (n == 10 && w == 5 && p == 1 && !prime_bump) ||
           (n == 11 && w == 5 && p == 1 && prime_bump);
}

int OrderFactorization::product_budget() const {
    if (is_tuned_scheme()) return 6;
    int cost = p;                       // inner Horner
    if (w > 1 && p > 0) cost += 1;      // recover F^(p+1)
    if (w > 1) cost += w - 1;           // outer Horner
    if (prime_bump) cost += 1;
    return cost + 1;                    // residual refresh
}

OrderFactorization OrderFactorization::canonical(int n) {
    if (n < 2) throw std::invalid_argument("OrderFactorization: order must be >= 2");
    switch (n) {
        case 8: return {8, 2, 3, false};
        case 9: return {9, 3, 2, false};
        case 10: return {10, 5, 1, false};
        case 11: return {11, 5, 1, true};
        default: break;
    }
    OrderFactorization best{n, 1, n - 1, false};
    for (int m : {n, n - 1}) {
        const bool bump = (m == n - 1);
        if (m < 1) continue;
        for (int d = 1; d <= m; ++d) {
            if (m % d != 0) continue;
            OrderFactorization cand{n, m / d, d - 1, bump};
            if (cand.product_budget() < best.product_budget()) best = cand;
        }
    }
    return best;
}

void factorized_step(InverterState& state, const DenseMatrix& a,
                     const OrderFactorization& fact) {
    // Re-validate: callers may have built the struct by hand.
    OrderFactorization::of(fact.n, fact.w, fact.p, fact.prime_bump);
    const DenseMatrix& f = materialized_residual(state, a);
    int mmm = 0;
    DenseMatrix g_next = apply_factored_series(f, state.g, a, fact, mmm);
    DenseMatrix f_next = identity_minus(mul(g_next, a, mmm));
    state.counter.mmm += static_cast<std::uint64_t>(mmm);
    ++state.step;
    check_finite(g_next, state.step, "factorized_step");
    state.g = std::move(g_next);
    state.f = std::move(f_next);
}

double efficiency_index(int n, int n_p) {
    if (n < 2 || n_p < 1)
        throw std::invalid_argument("efficiency_index: need n >= 2, n_p >= 1");
    return std::pow(static_cast<double>(n), 1.0 / static_cast<double>(n_p));
}

std::optional<std::uint64_t> predicted_exponent(InverterKind kind, int n, long k) {
    if (k < 0) throw std::invalid_argument("predicted_exponent: k must be >= 0");
    switch (kind) {
        case InverterKind::ns2:
            if (k >= 64) return std::nullopt;
            return std::uint64_t{1} << k;
        case InverterKind::hyperpower:
        case InverterKind::factorized:
            if (n < 2) throw std::invalid_argument("predicted_exponent: order must be >= 2");
            return checked_pow(static_cast<std::uint64_t>(n), k);
        case InverterKind::durand:
            return static_cast<std::uint64_t>(k) + 1;
        case InverterKind::combined: {
            if (n < 1) throw std::invalid_argument("predicted_exponent: order must be >= 1");
            // k * n^(k+1) + n^k
            const auto nk = checked_pow(static_cast<std::uint64_t>(n), k);
            if (!nk) return std::nullopt;
            std::uint64_t nk1 = 0, lhs = 0, out = 0;
            if (__builtin_mul_overflow(*nk, static_cast<std::uint64_t>(n), &nk1))
                return std::nullopt;
            if (__builtin_mul_overflow(static_cast<std::uint64_t>(k), nk1, &lhs))
                return std::nullopt;
            if (__builtin_add_overflow(lhs, *nk, &out)) return std::nullopt;
            return out;
        }
    }
    throw std::invalid_argument("predicted_exponent: unknown algorithm");
}

DenseMatrix series_precondition(const DenseMatrix& s_inv, const DenseMatrix& a,
                                int order, ProductCounter* counter) {
    if (order < 1) throw std::invalid_argument("series_precondition: order must be >= 1");
    if (order == 1) return s_inv;
    int mmm = 0;
    const DenseMatrix f0 = identity_minus(mul(s_inv, a, mmm));
    DenseMatrix g0 = (order >= 8 && order <= 11)
                         ? apply_factored_series(f0, s_inv, a,
                                                 OrderFactorization::canonical(order), mmm)
                         : series_times(f0, s_inv, order, mmm);
    if (counter) counter->mmm += static_cast<std::uint64_t>(mmm);
    return g0;
}

}  // namespace nsr
