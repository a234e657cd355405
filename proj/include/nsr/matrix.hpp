#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace nsr {

/// Square real matrix, row-major, double precision. Value semantics; all
/// arithmetic lives in free functions so that matrix-matrix products can be
/// counted where the algorithms require exact product budgets.
class DenseMatrix {
public:
    explicit DenseMatrix(std::size_t dim) : dim_(dim), e_(dim * dim, 0.0) {
        if (dim == 0) throw std::invalid_argument("DenseMatrix: dim must be >= 1");
    }

    /// Row-major entries; list size must be dim*dim.
    DenseMatrix(std::size_t dim, std::initializer_list<double> rows);

    static DenseMatrix identity(std::size_t dim);
    static DenseMatrix diagonal(std::initializer_list<double> d);

    std::size_t dim() const { return dim_; }

    double& operator()(std::size_t i, std::size_t j) { return e_[i * dim_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return e_[i * dim_ + j]; }

    double* data() { return e_.data(); }
    const double* data() const { return e_.data(); }
    std::size_t size() const { return e_.size(); }

    DenseMatrix transpose() const;

    DenseMatrix& operator+=(const DenseMatrix& o);
    DenseMatrix& operator-=(const DenseMatrix& o);
    DenseMatrix& operator*=(double s);

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
    friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

private:
    std::size_t dim_;
    std::vector<double> e_;
};

class DenseVector {
public:
    /// Empty vector; a placeholder state for report/record structs.
    DenseVector() = default;
    explicit DenseVector(std::size_t dim, double fill = 0.0) : e_(dim, fill) {
        if (dim == 0) throw std::invalid_argument("DenseVector: dim must be >= 1");
    }
    DenseVector(std::initializer_list<double> v) : e_(v) {
        if (e_.empty()) throw std::invalid_argument("DenseVector: dim must be >= 1");
    }

    std::size_t dim() const { return e_.size(); }
    std::size_t size() const { return e_.size(); }
    double& operator[](std::size_t i) { return e_[i]; }
    double operator[](std::size_t i) const { return e_[i]; }
    double* data() { return e_.data(); }
    const double* data() const { return e_.data(); }

    DenseVector& operator+=(const DenseVector& o);
    DenseVector& operator-=(const DenseVector& o);
    DenseVector& operator*=(double s);
    friend DenseVector operator-(DenseVector a, const DenseVector& b) { return a -= b; }
    friend DenseVector operator+(DenseVector a, const DenseVector& b) { return a += b; }
    friend DenseVector operator*(double s, DenseVector a) { return a *= s; }

private:
    std::vector<double> e_;
};

/// Counts the matrix products spent by an iteration. Confined to one run;
/// reset only at run boundaries.
struct ProductCounter {
    std::uint64_t mmm = 0;  ///< matrix-matrix multiplications
    std::uint64_t mvm = 0;  ///< matrix-vector multiplications
    void reset() { mmm = 0; mvm = 0; }
};

/// Exact dense product a*b; bumps counter.mmm by one.
DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b, ProductCounter& counter);

/// a*x; bumps counter.mvm by one.
DenseVector mat_vec(const DenseMatrix& a, const DenseVector& x, ProductCounter& counter);

/// Uncounted product for setup and diagnostics paths. Iteration code must go
/// through mat_mul so that product budgets stay exact.
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseVector operator*(const DenseMatrix& a, const DenseVector& x);

/// Maximum row sum matrix norm.
double inf_norm(const DenseMatrix& a);
double inf_norm(const DenseVector& v);

/// Left inversion-error residual I - g*a; one counted matrix product.
DenseMatrix residual(const DenseMatrix& a, const DenseMatrix& g, ProductCounter& counter);

/// Spectral radius estimate by the norm-root method: repeated normalized
/// squaring of f, rho ~ ||f^(2^j)||^(1/2^j), until two successive estimates
/// agree to a relative tol or 60 squarings. Works for non-symmetric f; never
/// exceeds inf_norm(f). Non-finite input reports a value >= 1.
double spectral_radius_estimate(const DenseMatrix& f, double tol = 1e-6);

bool all_finite(const DenseMatrix& a);
bool all_finite(const DenseVector& v);

/// Seeded SPD test matrix: eigenvalues drawn uniformly from [eig_lo, eig_hi],
/// conjugated by a random rotation (two full Givens sweeps). Exactly
/// symmetric by construction.
DenseMatrix random_spd_matrix(std::size_t dim, std::uint64_t seed, double eig_lo,
                              double eig_hi);

}  // namespace nsr
