#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "nsr/matrix.hpp"

// Reference implementations kept deliberately independent of the library's
// kernel layer: plain triple loops, no dispatch, no counting. Tests compare
// production results against these.
namespace oracle {

nsr::DenseMatrix mul(const nsr::DenseMatrix& a, const nsr::DenseMatrix& b);
nsr::DenseVector mul(const nsr::DenseMatrix& a, const nsr::DenseVector& x);

/// f^e by repeated naive multiplication; e == 0 gives the identity.
nsr::DenseMatrix power(const nsr::DenseMatrix& f, std::uint64_t e);

/// I - g*a through the naive product.
nsr::DenseMatrix residual(const nsr::DenseMatrix& a, const nsr::DenseMatrix& g);

double inf_norm(const nsr::DenseMatrix& m);
double max_abs_diff(const nsr::DenseMatrix& x, const nsr::DenseMatrix& y);
double max_abs_diff(const nsr::DenseVector& x, const nsr::DenseVector& y);

/// Window sums recomputed from scratch out of the accumulator's buffer.
std::pair<nsr::DenseMatrix, nsr::DenseVector> batch_normal_equations(
    const std::deque<std::pair<nsr::DenseVector, double>>& buffer, std::size_t dim);

/// Minimum-norm least-squares solution of a*theta ~ b via the eigen
/// decomposition of a^T a (directions with eigenvalue below rel_cut times
/// the largest are dropped).
nsr::DenseVector min_norm_least_squares(const nsr::DenseMatrix& a, const nsr::DenseVector& b,
                                        double rel_cut = 1e-12);

/// Singular values of a, descending (square roots of eig(a^T a)).
std::vector<double> singular_values(const nsr::DenseMatrix& a);

}  // namespace oracle
