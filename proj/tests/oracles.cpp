#include "oracles.hpp"

#include <algorithm>
#include <cmath>

#include "nsr/precond.hpp"

namespace oracle {

using nsr::DenseMatrix;
using nsr::DenseVector;

DenseMatrix mul(const DenseMatrix& a, const DenseMatrix& b) {
    const std::size_t n = a.dim();
    DenseMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    return out;
}

DenseVector mul(const DenseMatrix& a, const DenseVector& x) {
    const std::size_t n = a.dim();
    DenseVector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += a(i, k) * x[k];
        out[i] = acc;
    }
    return out;
}

DenseMatrix power(const DenseMatrix& f, std::uint64_t e) {
    DenseMatrix out = DenseMatrix::identity(f.dim());
    for (std::uint64_t i = 0; i < e; ++i) out = mul(out, f);
    return out;
}

DenseMatrix residual(const DenseMatrix& a, const DenseMatrix& g) {
    DenseMatrix out = mul(g, a);
    const std::size_t n = a.dim();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out(i, j) = (i == j ? 1.0 : 0.0) - out(i, j);
    return out;
}

double inf_norm(const DenseMatrix& m) {
    double worst = 0.0;
    for (std::size_t i = 0; i < m.dim(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m.dim(); ++j) row += std::fabs(m(i, j));
        worst = std::max(worst, row);
    }
    return worst;
}

double max_abs_diff(const DenseMatrix& x, const DenseMatrix& y) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i)
        for (std::size_t j = 0; j < x.dim(); ++j)
            worst = std::max(worst, std::fabs(x(i, j) - y(i, j)));
    return worst;
}

double max_abs_diff(const DenseVector& x, const DenseVector& y) {
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        worst = std::max(worst, std::fabs(x[i] - y[i]));
    return worst;
}

std::pair<DenseMatrix, DenseVector> batch_normal_equations(
    const std::deque<std::pair<DenseVector, double>>& buffer, std::size_t dim) {
    DenseMatrix a(dim);
    DenseVector b(dim);
    for (const auto& [phi, y] : buffer) {
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) a(i, j) += phi[i] * phi[j];
            b[i] += phi[i] * y;
        }
    }
    return {a, b};
}

DenseVector min_norm_least_squares(const DenseMatrix& a, const DenseVector& b,
                                   double rel_cut) {
    const std::size_t n = a.dim();
    const DenseMatrix gram = mul(a.transpose(), a);
    const DenseVector atb = mul(a.transpose(), b);
    const nsr::EigenSystem es = nsr::jacobi_eigensystem(gram);
    const double cut = rel_cut * std::max(es.values.back(), 0.0);

    DenseVector theta(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (es.values[j] <= cut) continue;
        double proj = 0.0;
        for (std::size_t i = 0; i < n; ++i) proj += es.vectors(i, j) * atb[i];
        proj /= es.values[j];
        for (std::size_t i = 0; i < n; ++i) theta[i] += proj * es.vectors(i, j);
    }
    return theta;
}

std::vector<double> singular_values(const DenseMatrix& a) {
    const DenseMatrix gram = mul(a.transpose(), a);
    std::vector<double> eig = nsr::jacobi_eigenvalues(gram);
    std::vector<double> sv;
    sv.reserve(eig.size());
    for (double v : eig) sv.push_back(std::sqrt(std::max(v, 0.0)));
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

}  // namespace oracle
