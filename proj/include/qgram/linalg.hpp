#ifndef QGRAM_LINALG_HPP
#define QGRAM_LINALG_HPP

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qgram/sparse.hpp"

#if defined(QGRAM_HAVE_LAPACKE)
// Make LAPACKE take std::complex directly so Eigen buffers pass through.
#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#endif

namespace qgram {

inline Eigen::MatrixXcd to_dense(const SparseMatrix& m) {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(m.dim()),
                                                  static_cast<Eigen::Index>(m.dim()));
    for (const auto& e : m.entries())
        out(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    return out;
}

inline Eigen::MatrixXd to_dense_real(const SparseMatrix& m) {
    if (!m.is_real()) throw std::invalid_argument("matrix has nonzero imaginary parts");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.dim()),
                                                static_cast<Eigen::Index>(m.dim()));
    for (const auto& e : m.entries())
        out(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value.real();
    return out;
}

/** Full eigendecomposition of a Hermitian matrix, eigenvalues ascending. */
struct EighResult {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors; // column k pairs with values[k]
};

/// Eigenvalues and vectors of a real symmetric matrix (divide and conquer).
inline void eigh_real(Eigen::MatrixXd a, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    const auto n = a.rows();
    values.resize(n);
#if defined(QGRAM_HAVE_LAPACKE)
    // Column-major with jobz='V': a is overwritten by the eigenvectors.
    lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L',
                                     static_cast<lapack_int>(n), a.data(),
                                     static_cast<lapack_int>(n), values.data());
    if (info != 0) throw std::runtime_error("dsyevd failed to converge");
    vectors = std::move(a);
#else
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
#endif
}

inline void eigh_complex(Eigen::MatrixXcd a, Eigen::VectorXd& values,
                         Eigen::MatrixXcd& vectors) {
    const auto n = a.rows();
    values.resize(n);
#if defined(QGRAM_HAVE_LAPACKE)
    lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L',
                                     static_cast<lapack_int>(n), a.data(),
                                     static_cast<lapack_int>(n), values.data());
    if (info != 0) throw std::runtime_error("zheevd failed to converge");
    vectors = std::move(a);
#else
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
#endif
}

/// Dense Hermitian eigendecomposition; routes real input to the real kernel.
inline EighResult eigh(const SparseMatrix& m) {
    EighResult out;
    if (m.is_real()) {
        Eigen::MatrixXd vecs;
        eigh_real(to_dense_real(m), out.values, vecs);
        out.vectors = vecs.cast<Complex>();
    } else {
        eigh_complex(to_dense(m), out.values, out.vectors);
    }
    return out;
}

/// Eigenvalues only, via the same kernels with vectors discarded.
inline Eigen::VectorXd eigh_values(const SparseMatrix& m) {
    Eigen::VectorXd values;
#if defined(QGRAM_HAVE_LAPACKE)
    if (m.is_real()) {
        Eigen::MatrixXd a = to_dense_real(m);
        values.resize(a.rows());
        lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L',
                                         static_cast<lapack_int>(a.rows()), a.data(),
                                         static_cast<lapack_int>(a.rows()), values.data());
        if (info != 0) throw std::runtime_error("dsyevd failed to converge");
    } else {
        Eigen::MatrixXcd a = to_dense(m);
        values.resize(a.rows());
        lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L',
                                         static_cast<lapack_int>(a.rows()), a.data(),
                                         static_cast<lapack_int>(a.rows()), values.data());
        if (info != 0) throw std::runtime_error("zheevd failed to converge");
    }
#else
    values = eigh(m).values;
#endif
    return values;
}

/**
 * Dense matrix exponential by scaling and squaring on a truncated Taylor
 * series. The series on the scaled matrix B = A / 2^s runs until the 1-norm
 * term bound, extended by a geometric tail estimate, drops below tol. Fine
 * for the small non-normal generators handled here; Hermitian exponentials
 * use the eigendecomposition instead.
 */
inline Eigen::MatrixXcd expm_dense(const Eigen::MatrixXcd& a, double tol = 1e-14) {
    if (a.rows() != a.cols()) throw std::invalid_argument("expm needs a square matrix");
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff(); // 1-norm
    int s = 0;
    while (norm / std::pow(2.0, s) > 0.5) ++s;
    const Eigen::MatrixXcd b = a / std::pow(2.0, s);
    const double bnorm = norm / std::pow(2.0, s);

    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Identity(a.rows(), a.cols());
    Eigen::MatrixXcd term = sum;
    double term_bound = 1.0;
    for (int k = 1; k <= 200; ++k) {
        term = term * b / static_cast<double>(k);
        sum += term;
        term_bound *= bnorm / static_cast<double>(k);
        const double ratio = bnorm / static_cast<double>(k + 1);
        if (ratio < 1.0 && term_bound * ratio / (1.0 - ratio) < tol) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

/**
 * Power-iteration estimate of the spectral norm via A^H A. Deterministic for
 * a fixed seed; a lower bound on the true norm up to iteration error.
 */
inline double spectral_norm_estimate(const SparseMatrix& m, std::size_t iters = 60,
                                     std::uint64_t seed = 12345) {
    const std::size_t d = m.dim();
    if (d == 0 || m.nnz() == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Complex> v(d);
    for (auto& x : v) x = Complex{gauss(rng), gauss(rng)};
    const SparseMatrix mh = m.adjoint();
    double est = 0.0;
    for (std::size_t it = 0; it < iters; ++it) {
        std::vector<Complex> w = mh.apply(m.apply(v));
        double nrm = 0.0;
        for (const auto& x : w) nrm += std::norm(x);
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) return 0.0;
        for (auto& x : w) x /= nrm;
        v = std::move(w);
        est = std::sqrt(nrm);
    }
    return est;
}

inline double vec_norm(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

inline Complex vec_dot(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    Complex s{};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace qgram

#endif
