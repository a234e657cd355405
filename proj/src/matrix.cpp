#include "nsr/matrix.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "nsr/simd.hpp"

namespace nsr {

DenseMatrix::DenseMatrix(std::size_t dim, std::initializer_list<double> rows)
    : DenseMatrix(dim) {
    if (rows.size() != dim * dim)
        throw std::invalid_argument("DenseMatrix: initializer size does not match dim");
    std::size_t i = 0;
    for (double v : rows) e_[i++] = v;
}

DenseMatrix DenseMatrix::identity(std::size_t dim) {
    DenseMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::initializer_list<double> d) {
    DenseMatrix m(d.size());
    std::size_t i = 0;
    for (double v : d) m(i, i) = v, ++i;
    return m;
}

DenseMatrix DenseMatrix::transpose() const {
    DenseMatrix t(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
    if (o.dim_ != dim_) throw std::invalid_argument("matrix add: dimension mismatch");
    simd::active().combine(e_.size(), 1.0, e_.data(), 1.0, o.e_.data(), e_.data());
    return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
    if (o.dim_ != dim_) throw std::invalid_argument("matrix sub: dimension mismatch");
    simd::active().combine(e_.size(), 1.0, e_.data(), -1.0, o.e_.data(), e_.data());
    return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
    simd::active().combine(e_.size(), s, e_.data(), 0.0, e_.data(), e_.data());
    return *this;
}

DenseVector& DenseVector::operator+=(const DenseVector& o) {
    if (o.dim() != dim()) throw std::invalid_argument("vector add: dimension mismatch");
    simd::active().axpy(e_.size(), 1.0, o.data(), e_.data());
    return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& o) {
    if (o.dim() != dim()) throw std::invalid_argument("vector sub: dimension mismatch");
    simd::active().axpy(e_.size(), -1.0, o.data(), e_.data());
    return *this;
}

DenseVector& DenseVector::operator*=(double s) {
    simd::active().combine(e_.size(), s, e_.data(), 0.0, e_.data(), e_.data());
    return *this;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("mat_mul: dimension mismatch");
    DenseMatrix c(a.dim());
    simd::active().gemm(a.dim(), a.data(), b.data(), c.data());
    return c;
}

DenseVector operator*(const DenseMatrix& a, const DenseVector& x) {
    if (a.dim() != x.dim()) throw std::invalid_argument("mat_vec: dimension mismatch");
    DenseVector y(x.dim());
    simd::active().gemv(a.dim(), a.data(), x.data(), y.data());
    return y;
}

DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b, ProductCounter& counter) {
    DenseMatrix c = a * b;
    counter.mmm += 1;
    return c;
}

DenseVector mat_vec(const DenseMatrix& a, const DenseVector& x, ProductCounter& counter) {
    DenseVector y = a * x;
    counter.mvm += 1;
    return y;
}

double inf_norm(const DenseMatrix& a) {
    return simd::active().max_abs_row_sum(a.dim(), a.data());
}

double inf_norm(const DenseVector& v) {
    return simd::active().max_abs(v.dim(), v.data());
}

DenseMatrix residual(const DenseMatrix& a, const DenseMatrix& g, ProductCounter& counter) {
    DenseMatrix r = mat_mul(g, a, counter);
    const std::size_t n = r.dim();
    simd::active().combine(n * n, -1.0, r.data(), 0.0, r.data(), r.data());
    for (std::size_t i = 0; i < n; ++i) r(i, i) += 1.0;
    return r;
}

double spectral_radius_estimate(const DenseMatrix& f, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("spectral_radius_estimate: tol must be > 0");
    if (!all_finite(f)) return std::numeric_limits<double>::infinity();

    const std::size_t n = f.dim();
    const double norm0 = inf_norm(f);
    if (norm0 == 0.0) return 0.0;

    // Normalized repeated squaring: m_{j+1} = (m_j / ||m_j||)^2 keeps entries
    // bounded, and log ||f^(2^j)|| / 2^j accumulates as sum_i log(nu_i)/2^i.
    constexpr int kMaxSquarings = 60;
    DenseMatrix m = f;
    DenseMatrix scratch(n);
    double nu = norm0;                    // norm at the current level
    double log_acc = std::log(norm0);     // level-0 term
    double weight = 1.0;
    double estimate = norm0;              // ||f^(2^0)||^(1/2^0)

    for (int j = 1; j <= kMaxSquarings; ++j) {
        simd::active().combine(n * n, 1.0 / nu, m.data(), 0.0, m.data(), m.data());
        simd::active().gemm(n, m.data(), m.data(), scratch.data());
        std::swap(m, scratch);
        if (!all_finite(m)) return std::max(estimate, 1.0);

        nu = inf_norm(m);
        if (nu == 0.0) return 0.0;  // nilpotent: some power vanished exactly
        weight *= 0.5;
        log_acc += weight * std::log(nu);
        const double next = std::exp(log_acc);
        if (!std::isfinite(next)) return std::max(estimate, 1.0);
        const bool settled = std::fabs(next - estimate) <= tol * std::max(next, 1e-300);
        estimate = next;
        if (settled) break;
    }
    // rho(f) <= ||f|| for every induced norm; clamp rounding spill.
    return std::min(estimate, norm0);
}

bool all_finite(const DenseMatrix& a) {
    const double* p = a.data();
    for (std::size_t i = 0, e = a.size(); i < e; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

bool all_finite(const DenseVector& v) {
    for (std::size_t i = 0; i < v.dim(); ++i)
        if (!std::isfinite(v[i])) return false;
    return true;
}

DenseMatrix random_spd_matrix(std::size_t dim, std::uint64_t seed, double eig_lo,
                              double eig_hi) {
    if (!(eig_lo > 0.0) || !(eig_hi >= eig_lo))
        throw std::invalid_argument("random_spd_matrix: need 0 < eig_lo <= eig_hi");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> eig(eig_lo, eig_hi);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);

    DenseMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = eig(rng);

    // Conjugate by Givens rotations: two full (i, j) sweeps keep symmetry
    // exactly while mixing all coordinate pairs.
    for (int sweep = 0; sweep < 2; ++sweep) {
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = i + 1; j < dim; ++j) {
                const double th = angle(rng);
                const double c = std::cos(th);
                const double s = std::sin(th);
                for (std::size_t k = 0; k < dim; ++k) {
                    const double mi = m(i, k);
                    const double mj = m(j, k);
                    m(i, k) = c * mi - s * mj;
                    m(j, k) = s * mi + c * mj;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    const double mi = m(k, i);
                    const double mj = m(k, j);
                    m(k, i) = c * mi - s * mj;
                    m(k, j) = s * mi + c * mj;
                }
            }
        }
    }
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i + 1; j < dim; ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
    return m;
}

}  // namespace nsr
