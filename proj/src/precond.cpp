#include "nsr/precond.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsr/inverters.hpp"

namespace nsr {

namespace {

constexpr int kMaxJacobiSweeps = 128;

/// inf-norm of the matrix with its diagonal zeroed.
double off_diagonal_norm(const DenseMatrix& m) {
    const std::size_t n = m.dim();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) row += std::fabs(m(i, j));
        worst = std::max(worst, row);
    }
    return worst;
}

void require_symmetric(const DenseMatrix& a, const char* who) {
    const double tol = 1e-10 * (1.0 + inf_norm(a));
    const std::size_t n = a.dim();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::fabs(a(i, j) - a(j, i)) > tol)
                throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}

/// One cyclic Jacobi pass machinery shared by the values-only and full calls.
/// vectors may be null.
std::vector<double> jacobi_core(const DenseMatrix& a, DenseMatrix* vectors) {
    require_symmetric(a, "jacobi_eigenvalues");
    const std::size_t n = a.dim();
    DenseMatrix m = a;
    if (vectors) *vectors = DenseMatrix::identity(n);
    const double stop = 1e-12 * inf_norm(a);

    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        if (off_diagonal_norm(m) <= stop) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t =
                    (theta >= 0.0 ? 1.0 : -1.0) /
                    (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double mip = m(i, p);
                    const double miq = m(i, q);
                    m(i, p) = c * mip - s * miq;
                    m(i, q) = s * mip + c * miq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double mpj = m(p, j);
                    const double mqj = m(q, j);
                    m(p, j) = c * mpj - s * mqj;
                    m(q, j) = s * mpj + c * mqj;
                }
                if (vectors) {
                    for (std::size_t i = 0; i < n; ++i) {
                        const double vip = (*vectors)(i, p);
                        const double viq = (*vectors)(i, q);
                        (*vectors)(i, p) = c * vip - s * viq;
                        (*vectors)(i, q) = s * vip + c * viq;
                    }
                }
            }
        }
    }

    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = m(i, i);
    if (vectors) {
        // Sort values ascending and permute the columns to match.
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
        std::vector<double> sorted(n);
        DenseMatrix v(n);
        for (std::size_t j = 0; j < n; ++j) {
            sorted[j] = values[order[j]];
            for (std::size_t i = 0; i < n; ++i) v(i, j) = (*vectors)(i, order[j]);
        }
        values = std::move(sorted);
        *vectors = std::move(v);
    } else {
        std::sort(values.begin(), values.end());
    }
    return values;
}

double kappa_of_spectrum(const std::vector<double>& values) {
    const double lo = values.front();
    const double hi = values.back();
    if (lo <= 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

}  // namespace

double default_eps(const DenseMatrix& a) { return 1e-6 * (1.0 + inf_norm(a)); }

Preconditioner alpha_preconditioner(const DenseMatrix& a, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("alpha_preconditioner: eps must be > 0");
    const double norm = inf_norm(a);
    if (norm == 0.0)
        throw std::invalid_argument("alpha_preconditioner: zero matrix has no usable scale");
    const double alpha = norm / 2.0 + eps;
    Preconditioner p{DenseMatrix::identity(a.dim()), alpha, eps, std::nullopt,
                     PreconditionerKind::alpha_scaled};
    p.s_inv *= 1.0 / alpha;
    return p;
}

Preconditioner alpha_preconditioner(const DenseMatrix& a) {
    return alpha_preconditioner(a, default_eps(a));
}

Preconditioner series_boosted_preconditioner(const DenseMatrix& a, int order, double eps) {
    Preconditioner p = alpha_preconditioner(a, eps);
    if (order > 1) {
        p.s_inv = series_precondition(p.s_inv, a, order);
        p.kind = PreconditionerKind::series_boosted;
    }
    return p;
}

Preconditioner series_boosted_preconditioner(const DenseMatrix& a, int order) {
    return series_boosted_preconditioner(a, order, default_eps(a));
}

RegularizedSystem regularize(const DenseMatrix& a, const DenseVector& b, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("regularize: beta must be > 0");
    if (a.dim() != b.size()) throw std::invalid_argument("regularize: dimension mismatch");
    const std::size_t n = a.dim();
    const DenseMatrix at = a.transpose();
    DenseMatrix a_r = at * a;  // setup work, deliberately uncounted
    // Symmetrize exactly: (i,j) and (j,i) accumulate the same products in a
    // different order, so force bitwise symmetry before the diagonal shift.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (a_r(i, j) + a_r(j, i));
            a_r(i, j) = avg;
            a_r(j, i) = avg;
        }
    for (std::size_t i = 0; i < n; ++i) a_r(i, i) += beta;
    DenseVector rhs = at * b;
    return RegularizedSystem{std::move(a_r), std::move(rhs), beta};
}

std::vector<double> jacobi_eigenvalues(const DenseMatrix& a) {
    return jacobi_core(a, nullptr);
}

EigenSystem jacobi_eigensystem(const DenseMatrix& a) {
    EigenSystem es{{}, DenseMatrix(a.dim())};
    es.values = jacobi_core(a, &es.vectors);
    return es;
}

double condition_number(const DenseMatrix& a) {
    return kappa_of_spectrum(jacobi_eigenvalues(a));
}

std::vector<SweepPoint> condition_sweep(const DenseMatrix& a,
                                        const std::vector<double>& betas) {
    if (betas.empty()) throw std::invalid_argument("condition_sweep: empty beta grid");
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!(betas[i] > 0.0))
            throw std::invalid_argument("condition_sweep: betas must be positive");
        if (i > 0 && !(betas[i] > betas[i - 1]))
            throw std::invalid_argument("condition_sweep: betas must be strictly increasing");
    }
    const std::size_t n = a.dim();
    DenseMatrix gram = a.transpose() * a;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (gram(i, j) + gram(j, i));
            gram(i, j) = avg;
            gram(j, i) = avg;
        }

    std::vector<SweepPoint> out;
    out.reserve(betas.size());
    for (double beta : betas) {
        DenseMatrix shifted = gram;
        for (std::size_t i = 0; i < n; ++i) shifted(i, i) += beta;
        double kappa;
        try {
            kappa = condition_number(shifted);
        } catch (const std::exception&) {
            kappa = std::numeric_limits<double>::infinity();
        }
        out.push_back({beta, kappa});
    }
    return out;
}

std::vector<double> default_beta_grid() {
    constexpr int kPoints = 21;
    constexpr double lo = 1e-8;
    constexpr double hi = 1.0;
    std::vector<double> grid(kPoints);
    const double step = (std::log10(hi) - std::log10(lo)) / (kPoints - 1);
    for (int i = 0; i < kPoints; ++i) grid[i] = std::pow(10.0, std::log10(lo) + step * i);
    grid.back() = hi;
    return grid;
}

}  // namespace nsr
