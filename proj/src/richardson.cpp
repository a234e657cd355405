#include "nsr/richardson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

namespace nsr {

namespace {

constexpr double kPlateauImprovement = 1e-3;
constexpr int kPlateauWindow = 5;
constexpr double kDivergenceRatio = 1e6;

void advance_inverter(InverterState& state, const DenseMatrix& a, const InverterSpec& spec,
                      const DenseMatrix& f0, const DenseMatrix& g0) {
    switch (spec.kind) {
        case InverterKind::ns2: ns2_step(state, a); return;
        case InverterKind::hyperpower: hyperpower_step(state, a, spec.order); return;
        case InverterKind::durand: durand_step(state, f0, g0); return;
        case InverterKind::combined: combined_step(state, a, spec.order); return;
        case InverterKind::factorized:
            factorized_step(state, a, OrderFactorization::canonical(spec.order));
            return;
    }
    throw std::invalid_argument("richardson_solve: unknown inverter");
}

}  // namespace

SolveReport richardson_solve(const DenseMatrix& a, const DenseVector& b,
                             const Preconditioner& precond, const RichardsonConfig& cfg,
                             const std::optional<DenseVector>& theta0) {
    const std::size_t n = a.dim();
    if (b.size() != n || precond.s_inv.dim() != n)
        throw std::invalid_argument("richardson_solve: dimension mismatch");
    if (cfg.max_iter < 1)
        throw std::invalid_argument("richardson_solve: max_iter must be >= 1");
    if (cfg.tol && !(*cfg.tol > 0.0))
        throw std::invalid_argument("richardson_solve: tol must be > 0");
    if (theta0 && theta0->size() != n)
        throw std::invalid_argument("richardson_solve: starting guess has wrong size");
    const double tol = cfg.tol ? *cfg.tol : 1e-10 * (1.0 + inf_norm(b));

    {
        // Advisory contraction check only. The loose tolerance keeps the
        // probe cheap but lets the estimate overshoot by a few tenths of a
        // percent, so only clearly non-contractive setups trip the warning.
        DenseMatrix f_probe = DenseMatrix::identity(n);
        f_probe -= precond.s_inv * a;
        const double rho = spectral_radius_estimate(f_probe, 1e-3);
        if (rho >= 1.01)
            std::fprintf(stderr,
                         "richardson_solve: warning: spectral radius of I - S^-1 A is "
                         "%.3g (>= 1), convergence not guaranteed\n",
                         rho);
    }

    InverterState state = (cfg.inverter.kind == InverterKind::combined)
                              ? make_combined_state(a, precond.s_inv, cfg.inverter.order)
                              : make_state(a, precond.s_inv);
    // Durand's recurrence reuses the seed pair (F0, G0) forever.
    const DenseMatrix g0 = precond.s_inv;
    const DenseMatrix f0 = *state.f;

    SolveReport report;
    report.theta = theta0 ? *theta0 : DenseVector(n, 0.0);

    DenseVector r = mat_vec(a, report.theta, state.counter);
    for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
    double res = inf_norm(r);
    report.residual_trace.push_back(res);

    double best = res;
    double min_seen = res;
    int stall = 0;

    auto finish = [&](long iters, bool conv, StopReason why) {
        report.iterations = iters;
        report.converged = conv;
        report.stop = why;
        report.residual_norm = res;
        report.mmm = state.counter.mmm;
        report.mvm = state.counter.mvm;
        return report;
    };

    if (!std::isfinite(res))
        throw DivergenceError("richardson_solve: non-finite initial residual", 0,
                              report.residual_trace);
    if (res <= tol) return finish(0, true, StopReason::tolerance);

    for (long k = 1; k <= cfg.max_iter; ++k) {
        const bool update_g = !cfg.freeze_after || k <= *cfg.freeze_after;
        if (update_g) {
            try {
                advance_inverter(state, a, cfg.inverter, f0, g0);
            } catch (const DivergenceError& e) {
                throw DivergenceError(e.what(), k, report.residual_trace);
            }
        }

        const DenseVector correction = mat_vec(state.g, r, state.counter);
        for (std::size_t i = 0; i < n; ++i) report.theta[i] -= correction[i];

        r = mat_vec(a, report.theta, state.counter);
        for (std::size_t i = 0; i < n; ++i) r[i] -= b[i];
        res = inf_norm(r);
        report.residual_trace.push_back(res);

        if (!std::isfinite(res))
            throw DivergenceError("richardson_solve: residual became non-finite at iteration " +
                                      std::to_string(k),
                                  k, report.residual_trace);
        min_seen = std::min(min_seen, res);
        if (res > kDivergenceRatio * min_seen)
            throw DivergenceError("richardson_solve: residual grew more than 1e6x past its "
                                  "minimum at iteration " +
                                      std::to_string(k),
                                  k, report.residual_trace);

        if (res <= tol) return finish(k, true, StopReason::tolerance);

        // The plateau describes the frozen regime, where the iteration is
        // stationary and the residual settles onto its floor. While G is
        // still advancing the residual can look flat for several steps and
        // then collapse, so the detector only arms once updates stop.
        if (update_g) {
            best = std::min(best, res);
        } else if (res <= (1.0 - kPlateauImprovement) * best) {
            best = res;
            stall = 0;
        } else {
            best = std::min(best, res);
            ++stall;
            if (stall >= kPlateauWindow) return finish(k, false, StopReason::plateau);
        }
    }
    return finish(cfg.max_iter, false, StopReason::max_iterations);
}

DenseVector direct_solve(const DenseMatrix& a, const DenseVector& b) {
    const std::size_t n = a.dim();
    if (b.size() != n) throw std::invalid_argument("direct_solve: dimension mismatch");
    DenseMatrix m = a;
    DenseVector x = b;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        double big = std::fabs(m(col, col));
        for (std::size_t row = col + 1; row < n; ++row) {
            const double v = std::fabs(m(row, col));
            if (v > big) {
                big = v;
                pivot = row;
            }
        }
        if (big == 0.0)
            throw SingularMatrixError("direct_solve: matrix is singular to working precision");
        if (pivot != col) {
            for (std::size_t j = col; j < n; ++j) std::swap(m(col, j), m(pivot, j));
            std::swap(x[col], x[pivot]);
        }
        const double inv_p = 1.0 / m(col, col);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = m(row, col) * inv_p;
            if (factor == 0.0) continue;
            m(row, col) = 0.0;
            for (std::size_t j = col + 1; j < n; ++j) m(row, j) -= factor * m(col, j);
            x[row] -= factor * x[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = x[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= m(i, j) * x[j];
        x[i] = acc / m(i, i);
    }
    return x;
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::tolerance: return "tolerance";
        case StopReason::plateau: return "plateau";
        case StopReason::max_iterations: return "max_iterations";
    }
    return "unknown";
}

}  // namespace nsr
