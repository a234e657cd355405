#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nsr/matrix.hpp"

namespace nsr {

/// How a starting inverse guess was built. alpha_scaled is I/(inf_norm(A)/2 + eps);
/// series_boosted additionally applies a truncated Neumann series to that guess;
/// custom is anything supplied by the caller.
enum class PreconditionerKind { alpha_scaled, series_boosted, custom };

struct Preconditioner {
    DenseMatrix s_inv;
    std::optional<double> alpha;
    std::optional<double> eps;
    std::optional<double> beta;
    PreconditionerKind kind = PreconditionerKind::custom;
};

/// beta*I + A^T A together with the matching right-hand side A^T b.
struct RegularizedSystem {
    DenseMatrix a_r;
    DenseVector rhs;
    double beta = 0.0;
};

/// Scale-aware default slack for the alpha preconditioner: 1e-6 * (1 + inf_norm(a)).
double default_eps(const DenseMatrix& a);

/// S^-1 = I/alpha with alpha = inf_norm(a)/2 + eps. For SPD input this puts
/// every eigenvalue of I - S^-1 A strictly inside the unit disc. Throws
/// std::invalid_argument for the zero matrix or eps <= 0.
Preconditioner alpha_preconditioner(const DenseMatrix& a, double eps);
Preconditioner alpha_preconditioner(const DenseMatrix& a);

/// Alpha preconditioner sharpened by an order-term truncated Neumann series
/// (computed once, not per solve). order == 1 degenerates to alpha_scaled.
Preconditioner series_boosted_preconditioner(const DenseMatrix& a, int order,
                                             double eps);
Preconditioner series_boosted_preconditioner(const DenseMatrix& a, int order);

/// Tikhonov-style lift: a_r = beta*I + a^T a, rhs = a^T b. SPD for any a when
/// beta > 0, which is what makes the faulted (column-zeroed) windows solvable.
RegularizedSystem regularize(const DenseMatrix& a, const DenseVector& b, double beta);

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
/// Terminates when the off-diagonal part's inf-norm drops below
/// 1e-12 * inf_norm(a). Throws std::invalid_argument if a is not symmetric
/// within 1e-10 * (1 + inf_norm(a)).
std::vector<double> jacobi_eigenvalues(const DenseMatrix& a);

/// Same sweep, also accumulating the rotations: returns ascending eigenvalues
/// and the orthogonal matrix whose columns are the matching eigenvectors.
struct EigenSystem {
    std::vector<double> values;
    DenseMatrix vectors;
};
EigenSystem jacobi_eigensystem(const DenseMatrix& a);

/// lambda_max / lambda_min of a symmetric matrix; +inf when lambda_min <= 0.
double condition_number(const DenseMatrix& a);

struct SweepPoint {
    double beta;
    double kappa;
};

/// Condition numbers of beta*I + a^T a over the given strictly increasing
/// beta grid. a^T a is formed once; each grid point gets its own Jacobi run.
/// A per-entry failure is recorded as kappa = +inf instead of aborting.
std::vector<SweepPoint> condition_sweep(const DenseMatrix& a,
                                        const std::vector<double>& betas);

/// 21 logarithmically spaced points spanning [1e-8, 1].
std::vector<double> default_beta_grid();

}  // namespace nsr
