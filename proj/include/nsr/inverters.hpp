#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nsr/matrix.hpp"

namespace nsr {

/// Thrown when an iteration leaves the finite range (entry magnitude above
/// 1e100 or non-finite). Carries the step/iteration index where it happened.
struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& what, long step_index)
        : std::runtime_error(what), step(step_index) {}
    DivergenceError(const std::string& what, long step_index, std::vector<double> trace)
        : std::runtime_error(what), step(step_index), residual_trace(std::move(trace)) {}
    long step;
    std::vector<double> residual_trace;  ///< filled by solvers that track norms
};

enum class InverterKind { ns2, hyperpower, durand, combined, factorized };

/// (L_k, Gamma_k^n) pair carried only by the combined two-step algorithm.
struct CombinedExtra {
    DenseMatrix l;
    DenseMatrix gamma_n;  // == I - l*A at every step boundary
};

/// Evolving state of one inversion run: current estimate g of A^-1, the left
/// residual f = I - g*A, the step index and the product counter. f may be
/// absent after Durand steps, which never refresh it; use
/// materialized_residual to (re)compute it on demand.
struct InverterState {
    DenseMatrix g;
    std::optional<DenseMatrix> f;
    long step = 0;
    ProductCounter counter;
    std::optional<CombinedExtra> extra;
};

/// Start a run from an initial guess g0: computes f0 = I - g0*A (one product).
InverterState make_state(const DenseMatrix& a, const DenseMatrix& g0);

/// Start a combined-algorithm run of order n from s_inv: seeds
/// L0 = (sum_{j<n} F0^j) s_inv and Gamma0^n = I - L0*A (n+1 products).
InverterState make_combined_state(const DenseMatrix& a, const DenseMatrix& s_inv, int n);

/// Second order Newton-Schulz: g' = g + f*g, f' = I - g'*A. Two products.
void ns2_step(InverterState& state, const DenseMatrix& a);

/// Order-n hyperpower step: g' = (sum_{j<n} f^j) g by Horner, then the
/// residual refresh. n products total, n >= 2.
void hyperpower_step(InverterState& state, const DenseMatrix& a, int n);

/// Durand step g' = f0*g + g0 against the frozen initial pair. One product;
/// the state's residual goes stale (f_k = f0^{k+1} analytically).
void durand_step(InverterState& state, const DenseMatrix& f0, const DenseMatrix& g0);

/// Combined two-step accelerator of order n: advances the L/Gamma chain and
/// the hyperpower chain, then merges g' = L' + Gamma'^n (sum f^j) g.
/// Requires a state from make_combined_state. 2n+1 products per step.
void combined_step(InverterState& state, const DenseMatrix& a, int n);

/// How an order n = w*(p+1) (+1 when prime_bump) splits the power series
/// (sum_{j<w} F^{(p+1)j})(sum_{d<=p} F^d).
struct OrderFactorization {
    int n;
    int w;
    int p;
    bool prime_bump;

    /// Validates the arithmetic constraint between n, w, p and prime_bump.
    static OrderFactorization of(int n, int w, int p, bool prime_bump);

    /// Cheapest known factorization for n: the published 6-product schemes
    /// for n = 8, 9, 10, 11, otherwise the best split by computed budget.
    static OrderFactorization canonical(int n);

    /// Matrix products one factorized_step will spend, residual refresh
    /// included.
    int product_budget() const;

    bool is_tuned_scheme() const;
};

/// One step of the order-n series evaluated through the factorization.
/// Mathematically identical to hyperpower_step(n); spends exactly
/// fact.product_budget() products (6 for the published n = 8..11 schemes).
void factorized_step(InverterState& state, const DenseMatrix& a,
                     const OrderFactorization& fact);

/// Residual of the state's current g, computing and caching it if stale
/// (one product when a refresh is needed).
const DenseMatrix& materialized_residual(InverterState& state, const DenseMatrix& a);

/// Efficiency index n^(1/n_p): convergence order per matrix product.
double efficiency_index(int n, int n_p);

/// Closed-form exponent e with F_k = F0^e after k steps: 2^k (ns2), n^k
/// (hyperpower/factorized), k+1 (durand), k*n^(k+1) + n^k (combined).
/// nullopt when the exponent overflows 64 bits.
std::optional<std::uint64_t> predicted_exponent(InverterKind kind, int n, long k);

/// Series-boosted initial guess G0 = (sum_{j<order} F0^j) s_inv with
/// F0 = I - s_inv*A; uses the factorized evaluators for order 8..11 and
/// Horner otherwise. Products spent are added to counter when given.
DenseMatrix series_precondition(const DenseMatrix& s_inv, const DenseMatrix& a,
                                int order, ProductCounter* counter = nullptr);

}  // namespace nsr
