#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nsr/inverters.hpp"
#include "nsr/matrix.hpp"
#include "nsr/precond.hpp"

namespace nsr {

/// Which approximate-inverse update runs inside the solver, and its order
/// where the scheme has one (ignored by ns2 and durand).
struct InverterSpec {
    InverterKind kind = InverterKind::ns2;
    int order = 2;
};

struct RichardsonConfig {
    InverterSpec inverter{};
    /// Number of leading iterations that also advance G; 0 keeps G frozen at
    /// the preconditioner, nullopt never stops updating.
    std::optional<long> freeze_after = 8;
    /// Residual tolerance on inf_norm(A*theta - b); defaults to
    /// 1e-10 * (1 + inf_norm(b)) when absent.
    std::optional<double> tol;
    long max_iter = 200;
};

enum class StopReason { tolerance, plateau, max_iterations };

struct SolveReport {
    DenseVector theta;
    double residual_norm = 0.0;
    long iterations = 0;
    std::uint64_t mmm = 0;
    std::uint64_t mvm = 0;
    bool converged = false;
    StopReason stop = StopReason::max_iterations;
    /// inf-norm residual per recorded iterate, starting at the initial guess.
    std::vector<double> residual_trace;
};

class SingularMatrixError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// theta_k = theta_{k-1} - G_k (A theta_{k-1} - b), with G advanced one
/// inverter step per iteration until cfg.freeze_after and frozen afterwards,
/// so late iterations cost matrix-vector products only. Stops on tolerance,
/// on a residual plateau (< 1e-3 relative improvement over 5 consecutive
/// frozen iterations; armed only once G stops updating), or at max_iter.
/// Residual growth past 1e6x its running
/// minimum, or any non-finite iterate, throws DivergenceError carrying the
/// residual trace. A spectral radius of I - S^-1 A at or above 1 only emits
/// a one-line stderr warning; the iteration still runs.
SolveReport richardson_solve(const DenseMatrix& a, const DenseVector& b,
                             const Preconditioner& precond, const RichardsonConfig& cfg,
                             const std::optional<DenseVector>& theta0 = std::nullopt);

/// Gaussian elimination with partial pivoting. Throws SingularMatrixError
/// when no usable pivot remains.
DenseVector direct_solve(const DenseMatrix& a, const DenseVector& b);

const char* stop_reason_name(StopReason r);

}  // namespace nsr
