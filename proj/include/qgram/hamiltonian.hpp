#ifndef QGRAM_HAMILTONIAN_HPP
#define QGRAM_HAMILTONIAN_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "qgram/sparse.hpp"
#include "qgram/word.hpp"

namespace qgram {

/**
 * Matrix of the summed application operator of a single rule on the cut-off
 * word space: column alpha picks up `amplitude` at row beta for every
 * application site turning alpha into beta, with targets longer than the
 * cutoff projected away. Not Hermitian on its own.
 */
inline SparseMatrix rule_operator(const TruncatedWordSpace& space,
                                  const SubstitutionRule& rule) {
    std::vector<SparseMatrix::Entry> entries;
    const std::size_t d = space.dim();
    for (std::size_t col = 0; col < d; ++col) {
        const Word w = space.word_at(col);
        if (rule.lhs.size() > w.size()) continue;
        for (std::size_t pos = 0; pos + rule.lhs.size() <= w.size(); ++pos) {
            if (!std::equal(rule.lhs.begin(), rule.lhs.end(), w.begin() + pos)) continue;
            Word target;
            target.reserve(w.size() - rule.lhs.size() + rule.rhs.size());
            target.insert(target.end(), w.begin(), w.begin() + pos);
            target.insert(target.end(), rule.rhs.begin(), rule.rhs.end());
            target.insert(target.end(), w.begin() + pos + rule.lhs.size(), w.end());
            if (target.size() > space.max_length()) continue;
            entries.push_back({space.index_of(target), col, rule.amplitude});
        }
    }
    return SparseMatrix(d, std::move(entries));
}

/// Diagonal word-length (particle number) operator.
inline SparseMatrix number_operator(const TruncatedWordSpace& space) {
    std::vector<SparseMatrix::Entry> entries;
    const std::size_t d = space.dim();
    for (std::size_t i = 0; i < d; ++i) {
        const double n = static_cast<double>(space.length_at(i));
        if (n != 0.0) entries.push_back({i, i, Complex{n, 0.0}});
    }
    return SparseMatrix(d, std::move(entries));
}

/**
 * Cut-off Hamiltonian H_N = P_N (sum_i sum_j lambda_i a_i(j)) P_N + mu * n.
 *
 * The rule set must be Hermitian-closed. Entries are generated in conjugate
 * pairs: each application with target index >= source index contributes to
 * the lower triangle, the mirror entry is its exact conjugate, and diagonal
 * sums are projected to their real part. Cutoff losses are symmetric (an
 * entry survives only if both words fit), so closure makes H_N Hermitian.
 */
inline SparseHermitianOperator build_hamiltonian(const TruncatedWordSpace& space,
                                                 const RuleSet& rules, double mu = 0.0) {
    if (space.alphabet().size() != rules.alphabet().size())
        throw std::invalid_argument("rule set and space use different alphabets");
    if (!rules.is_hermitian_closed())
        throw std::invalid_argument("rule set is not Hermitian-closed");

    std::vector<SparseMatrix::Entry> lower;
    const std::size_t d = space.dim();
    for (std::size_t col = 0; col < d; ++col) {
        const Word w = space.word_at(col);
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const auto& rule = rules.rule(i);
            if (rule.lhs.size() > w.size()) continue;
            for (std::size_t pos = 0; pos + rule.lhs.size() <= w.size(); ++pos) {
                if (!std::equal(rule.lhs.begin(), rule.lhs.end(), w.begin() + pos)) continue;
                Word target;
                target.reserve(w.size() - rule.lhs.size() + rule.rhs.size());
                target.insert(target.end(), w.begin(), w.begin() + pos);
                target.insert(target.end(), rule.rhs.begin(), rule.rhs.end());
                target.insert(target.end(), w.begin() + pos + rule.lhs.size(), w.end());
                if (target.size() > space.max_length()) continue;
                const std::size_t row = space.index_of(target);
                if (row >= col) lower.push_back({row, col, rule.amplitude});
            }
        }
        if (mu != 0.0 && !w.empty())
            lower.push_back({col, col, Complex{mu * static_cast<double>(w.size()), 0.0}});
    }
    return SparseHermitianOperator::from_lower_triangle(d, lower);
}

/**
 * A dense operator acting on word positions first..last (1-based, inclusive)
 * embedded identically elsewhere. Matrix indices are the base-r codes of the
 * covered subword, most significant symbol first. Words shorter than `last`
 * are annihilated.
 */
struct LocalObservable {
    std::size_t first = 1;
    std::size_t last = 1;
    Eigen::MatrixXcd mat;

    std::size_t span() const {
        if (first == 0 || last < first)
            throw std::invalid_argument("observable interval must satisfy 1 <= first <= last");
        return last - first + 1;
    }
};

inline SparseMatrix embed_observable(const TruncatedWordSpace& space,
                                     const LocalObservable& obs) {
    const std::size_t r = space.alphabet().size();
    const std::size_t span = obs.span();
    std::size_t codes = 1;
    for (std::size_t i = 0; i < span; ++i) codes *= r;
    if (static_cast<std::size_t>(obs.mat.rows()) != codes
        || static_cast<std::size_t>(obs.mat.cols()) != codes)
        throw std::invalid_argument("observable matrix must be r^span square");

    std::vector<SparseMatrix::Entry> entries;
    const std::size_t d = space.dim();
    for (std::size_t col = 0; col < d; ++col) {
        const Word w = space.word_at(col);
        if (w.size() < obs.last) continue;
        std::size_t code = 0;
        for (std::size_t p = obs.first - 1; p < obs.last; ++p) code = code * r + w[p];
        for (std::size_t code2 = 0; code2 < codes; ++code2) {
            const Complex v = obs.mat(static_cast<Eigen::Index>(code2),
                                      static_cast<Eigen::Index>(code));
            if (v == Complex{}) continue;
            Word target = w;
            std::size_t rem = code2;
            for (std::size_t p = obs.last; p-- > obs.first - 1;) {
                target[p] = static_cast<std::uint32_t>(rem % r);
                rem /= r;
            }
            entries.push_back({space.index_of(target), col, v});
        }
    }
    return SparseMatrix(d, std::move(entries));
}

/// Rank-one |target><source| on the cut-off space.
inline SparseMatrix word_projector(const TruncatedWordSpace& space, const Word& target,
                                   const Word& source) {
    std::vector<SparseMatrix::Entry> e{
        {space.index_of(target), space.index_of(source), Complex{1.0, 0.0}}};
    return SparseMatrix(space.dim(), std::move(e));
}

/// Single-entry observable A sending e_alpha to e_rho and all other basis
/// vectors to zero. A + its adjoint is Hermitian.
inline SparseMatrix matrix_observable(const TruncatedWordSpace& space, const Word& alpha,
                                      const Word& rho) {
    return word_projector(space, rho, alpha);
}

} // namespace qgram

#endif
