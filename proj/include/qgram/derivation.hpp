#ifndef QGRAM_DERIVATION_HPP
#define QGRAM_DERIVATION_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgram/hamiltonian.hpp"
#include "qgram/linalg.hpp"

namespace qgram {

/**
 * A substitution grammar whose alphabet splits into terminals and variables,
 * with every left side containing at least one variable. The generated
 * operator is not required to be symmetric; all-terminal words are
 * structural fixed points of its exponential.
 */
class DerivationGrammar {
public:
    DerivationGrammar(Alphabet alphabet, std::vector<std::string> variables,
                      std::vector<SubstitutionRule> rules)
        : alphabet_(std::move(alphabet)), rules_(std::move(rules)) {
        is_variable_.assign(alphabet_.size(), false);
        for (const auto& name : variables) {
            const std::uint32_t idx = alphabet_.index(name); // throws on unknown
            if (is_variable_[idx])
                throw std::invalid_argument("variable listed twice: " + name);
            is_variable_[idx] = true;
        }
        if (rules_.empty()) throw std::invalid_argument("grammar needs at least one rule");
        for (const auto& r : rules_) {
            if (r.lhs.empty()) throw std::invalid_argument("rule lhs must be nonempty");
            for (auto s : r.lhs)
                if (s >= alphabet_.size())
                    throw std::invalid_argument("rule lhs uses a symbol outside the alphabet");
            for (auto s : r.rhs)
                if (s >= alphabet_.size())
                    throw std::invalid_argument("rule rhs uses a symbol outside the alphabet");
            if (!std::any_of(r.lhs.begin(), r.lhs.end(),
                             [&](std::uint32_t s) { return is_variable_[s]; }))
                throw std::invalid_argument("every rule lhs must contain a variable");
        }
    }

    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<SubstitutionRule>& rules() const { return rules_; }
    bool is_variable(std::uint32_t symbol) const { return is_variable_.at(symbol); }

    bool all_terminal(const Word& w) const {
        return std::none_of(w.begin(), w.end(),
                            [&](std::uint32_t s) { return is_variable_[s]; });
    }

private:
    Alphabet alphabet_;
    std::vector<bool> is_variable_;
    std::vector<SubstitutionRule> rules_;
};

/**
 * The generator L = sum lambda_i a_i(j) on the cut-off space, assembled
 * column by column with no symmetrization. Columns of all-terminal words are
 * exactly zero.
 */
inline SparseMatrix derivation_generator(const TruncatedWordSpace& space,
                                         const DerivationGrammar& grammar) {
    std::vector<SparseMatrix::Entry> entries;
    const std::size_t d = space.dim();
    for (std::size_t col = 0; col < d; ++col) {
        const Word w = space.word_at(col);
        for (const auto& rule : grammar.rules()) {
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
    }
    return SparseMatrix(d, std::move(entries));
}

/// e^{itL} applied to a basis word, via the dense scaled-and-squared series.
inline std::vector<Complex> derivation_evolve(const TruncatedWordSpace& space,
                                              const DerivationGrammar& grammar,
                                              const Word& start, double t,
                                              double tol = 1e-13) {
    const SparseMatrix l = derivation_generator(space, grammar);
    const Eigen::MatrixXcd u = expm_dense(to_dense(l) * Complex{0.0, t}, tol);
    const std::size_t col = space.index_of(start);
    std::vector<Complex> out(space.dim());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
    return out;
}

/**
 * The transition amplitude <e_target, e^{itL} e_start> for a variable start
 * word and an all-terminal target.
 */
inline Complex derivation_amplitude(const TruncatedWordSpace& space,
                                    const DerivationGrammar& grammar, const Word& start,
                                    const Word& target, double t, double tol = 1e-13) {
    if (grammar.all_terminal(start))
        throw std::invalid_argument("start word must contain a variable");
    if (!grammar.all_terminal(target))
        throw std::invalid_argument("target word must be all-terminal");
    const std::vector<Complex> evolved = derivation_evolve(space, grammar, start, t, tol);
    return evolved[space.index_of(target)];
}

} // namespace qgram

#endif
