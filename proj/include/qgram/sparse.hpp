#ifndef QGRAM_SPARSE_HPP
#define QGRAM_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qgram/rules.hpp"

namespace qgram {

/**
 * Immutable square sparse matrix over complex doubles, stored row-major as
 * sorted merged coordinates plus row offsets. Duplicate coordinates passed to
 * the constructor are summed in their insertion order, which keeps assembly
 * deterministic.
 */
class SparseMatrix {
public:
    struct Entry {
        std::size_t row, col;
        Complex value;
    };

    explicit SparseMatrix(std::size_t dim) : dim_(dim), row_ptr_(dim + 1, 0) {}

    SparseMatrix(std::size_t dim, std::vector<Entry> entries) : dim_(dim) {
        for (const auto& e : entries)
            if (e.row >= dim_ || e.col >= dim_)
                throw std::out_of_range("sparse entry outside the matrix");
        std::stable_sort(entries.begin(), entries.end(),
                         [](const Entry& a, const Entry& b) {
                             return a.row != b.row ? a.row < b.row : a.col < b.col;
                         });
        entries_.reserve(entries.size());
        for (const auto& e : entries) {
            if (!entries_.empty() && entries_.back().row == e.row
                && entries_.back().col == e.col)
                entries_.back().value += e.value;
            else
                entries_.push_back(e);
        }
        entries_.erase(std::remove_if(entries_.begin(), entries_.end(),
                                      [](const Entry& e) { return e.value == Complex{}; }),
                       entries_.end());
        build_row_ptr();
    }

    static SparseMatrix identity(std::size_t dim) {
        std::vector<Entry> e;
        e.reserve(dim);
        for (std::size_t i = 0; i < dim; ++i) e.push_back({i, i, Complex{1.0, 0.0}});
        return SparseMatrix(dim, std::move(e));
    }

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    Complex entry(std::size_t row, std::size_t col) const {
        auto first = entries_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
        auto last = entries_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
        auto it = std::lower_bound(first, last, col,
                                   [](const Entry& e, std::size_t c) { return e.col < c; });
        return (it != last && it->col == col) ? it->value : Complex{};
    }

    // y = A x
    std::vector<Complex> apply(const std::vector<Complex>& x) const {
        if (x.size() != dim_) throw std::invalid_argument("vector length mismatch");
        std::vector<Complex> y(dim_, Complex{});
        for (const auto& e : entries_) y[e.row] += e.value * x[e.col];
        return y;
    }

    SparseMatrix adjoint() const {
        std::vector<Entry> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back({e.col, e.row, std::conj(e.value)});
        return SparseMatrix(dim_, std::move(out));
    }

    SparseMatrix transpose() const {
        std::vector<Entry> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back({e.col, e.row, e.value});
        return SparseMatrix(dim_, std::move(out));
    }

    SparseMatrix scaled(Complex factor) const {
        auto out = entries_;
        for (auto& e : out) e.value *= factor;
        return SparseMatrix(dim_, std::move(out));
    }

    SparseMatrix plus(const SparseMatrix& other) const {
        if (other.dim_ != dim_) throw std::invalid_argument("dimension mismatch");
        auto out = entries_;
        out.insert(out.end(), other.entries_.begin(), other.entries_.end());
        return SparseMatrix(dim_, std::move(out));
    }

    // this * other, dense-free; fine at enumeration scale.
    SparseMatrix times(const SparseMatrix& other) const {
        if (other.dim_ != dim_) throw std::invalid_argument("dimension mismatch");
        std::vector<Entry> out;
        for (const auto& a : entries_) {
            const std::size_t b0 = other.row_ptr_[a.col];
            const std::size_t b1 = other.row_ptr_[a.col + 1];
            for (std::size_t t = b0; t < b1; ++t)
                out.push_back({a.row, other.entries_[t].col,
                               a.value * other.entries_[t].value});
        }
        return SparseMatrix(dim_, std::move(out));
    }

    SparseMatrix commutator_with(const SparseMatrix& other) const {
        return times(other).plus(other.times(*this).scaled(Complex{-1.0, 0.0}));
    }

    bool is_hermitian() const { // exact, entry for entry
        for (const auto& e : entries_)
            if (entry(e.col, e.row) != std::conj(e.value)) return false;
        return true;
    }

    bool is_real() const {
        for (const auto& e : entries_)
            if (e.value.imag() != 0.0) return false;
        return true;
    }

    bool is_diagonal() const {
        for (const auto& e : entries_)
            if (e.row != e.col) return false;
        return true;
    }

    double norm_inf() const { // max absolute row sum
        std::vector<double> s(dim_, 0.0);
        for (const auto& e : entries_) s[e.row] += std::abs(e.value);
        return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
    }

    double norm_1() const { // max absolute column sum
        std::vector<double> s(dim_, 0.0);
        for (const auto& e : entries_) s[e.col] += std::abs(e.value);
        return s.empty() ? 0.0 : *std::max_element(s.begin(), s.end());
    }

    double norm_frobenius() const {
        double s = 0.0;
        for (const auto& e : entries_) s += std::norm(e.value);
        return std::sqrt(s);
    }

    // Upper bound on the spectral norm: min(Frobenius, sqrt(norm1 * norminf)).
    double norm_2_upper() const {
        const double schur = std::sqrt(norm_1() * norm_inf());
        return std::min(schur, norm_frobenius());
    }

    std::size_t row_nnz(std::size_t row) const { return row_ptr_[row + 1] - row_ptr_[row]; }

private:
    void build_row_ptr() {
        row_ptr_.assign(dim_ + 1, 0);
        for (const auto& e : entries_) ++row_ptr_[e.row + 1];
        for (std::size_t i = 0; i < dim_; ++i) row_ptr_[i + 1] += row_ptr_[i];
    }

    std::size_t dim_;
    std::vector<Entry> entries_;
    std::vector<std::size_t> row_ptr_;
};

/**
 * A sparse matrix with the Hermitian pairing enforced: entry (i, j, v) is
 * present exactly when (j, i, conj v) is. Construction rejects anything that
 * is not exactly Hermitian.
 */
class SparseHermitianOperator {
public:
    explicit SparseHermitianOperator(SparseMatrix m) : mat_(std::move(m)) {
        if (!mat_.is_hermitian())
            throw std::invalid_argument("operator is not exactly Hermitian");
    }

    /**
     * Assemble from lower-triangle contributions (row index >= col index):
     * the strict upper triangle is emitted as the conjugate mirror and the
     * diagonal is projected to its real part, so the result is Hermitian by
     * construction. Contributions above the diagonal are rejected.
     */
    static SparseHermitianOperator from_lower_triangle(
        std::size_t dim, const std::vector<SparseMatrix::Entry>& lower) {
        std::vector<SparseMatrix::Entry> all;
        all.reserve(lower.size() * 2);
        for (const auto& e : lower) {
            if (e.row < e.col)
                throw std::invalid_argument("contribution above the diagonal");
            all.push_back(e);
        }
        SparseMatrix folded(dim, std::move(all));
        std::vector<SparseMatrix::Entry> sym;
        sym.reserve(folded.nnz() * 2);
        for (const auto& e : folded.entries()) {
            if (e.row == e.col) {
                sym.push_back({e.row, e.col, Complex{e.value.real(), 0.0}});
            } else {
                sym.push_back(e);
                sym.push_back({e.col, e.row, std::conj(e.value)});
            }
        }
        return SparseHermitianOperator(SparseMatrix(dim, std::move(sym)));
    }

    const SparseMatrix& matrix() const { return mat_; }
    std::size_t dim() const { return mat_.dim(); }
    std::size_t nnz() const { return mat_.nnz(); }
    Complex entry(std::size_t r, std::size_t c) const { return mat_.entry(r, c); }
    std::vector<Complex> apply(const std::vector<Complex>& x) const { return mat_.apply(x); }
    bool is_real() const { return mat_.is_real(); }
    bool is_diagonal() const { return mat_.is_diagonal(); }

private:
    SparseMatrix mat_;
};

} // namespace qgram

#endif
