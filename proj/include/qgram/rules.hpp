#ifndef QGRAM_RULES_HPP
#define QGRAM_RULES_HPP

#include <algorithm>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgram/word.hpp"

namespace qgram {

using Complex = std::complex<double>;

/// One substitution lhs -> rhs with a complex amplitude. lhs must be nonempty.
struct SubstitutionRule {
    Word lhs;
    Word rhs;
    Complex amplitude{1.0, 0.0};
};

/// A single rule application site: rule index plus 1-based word position.
struct Application {
    std::size_t rule;
    std::size_t position; // 1-based, as in all public interfaces
};

/**
 * An ordered list of substitution rules over one alphabet.
 *
 * Derived quantities used by bounds and truncations:
 *   k            number of rules,
 *   growth C1    max(|rhs| - |lhs|) clamped to >= 1,
 *   shrink C2    max(|lhs| - |rhs|) clamped to >= 0,
 *   lambda_max   max |amplitude|.
 */
class RuleSet {
public:
    RuleSet(Alphabet alphabet, std::vector<SubstitutionRule> rules)
        : alphabet_(std::move(alphabet)), rules_(std::move(rules)) {
        if (rules_.empty())
            throw std::invalid_argument("rule set must contain at least one rule");
        for (const auto& rule : rules_) {
            if (rule.lhs.empty())
                throw std::invalid_argument("rule lhs must be a nonempty word");
            for (auto s : rule.lhs)
                if (s >= alphabet_.size())
                    throw std::invalid_argument("rule lhs uses a symbol outside the alphabet");
            for (auto s : rule.rhs)
                if (s >= alphabet_.size())
                    throw std::invalid_argument("rule rhs uses a symbol outside the alphabet");
        }
    }

    const Alphabet& alphabet() const { return alphabet_; }
    const std::vector<SubstitutionRule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }
    const SubstitutionRule& rule(std::size_t i) const { return rules_.at(i); }

    std::size_t growth_bound() const { // C1, clamped so radius formulas stay finite
        std::ptrdiff_t c = 1;
        for (const auto& r : rules_)
            c = std::max(c, static_cast<std::ptrdiff_t>(r.rhs.size())
                            - static_cast<std::ptrdiff_t>(r.lhs.size()));
        return static_cast<std::size_t>(c);
    }

    std::size_t shrink_bound() const { // C2 >= 0
        std::ptrdiff_t c = 0;
        for (const auto& r : rules_)
            c = std::max(c, static_cast<std::ptrdiff_t>(r.lhs.size())
                            - static_cast<std::ptrdiff_t>(r.rhs.size()));
        return static_cast<std::size_t>(c);
    }

    std::size_t max_rhs_length() const {
        std::size_t m = 0;
        for (const auto& r : rules_) m = std::max(m, r.rhs.size());
        return m;
    }

    double lambda_max() const {
        double m = 0.0;
        for (const auto& r : rules_) m = std::max(m, std::abs(r.amplitude));
        return m;
    }

    /**
     * Hermitian closure: for every rule (lhs, rhs, a) the formal adjoint
     * (rhs, lhs, conj a) must be present, as a multiset condition.
     */
    bool is_hermitian_closed() const { return closure_defect().empty(); }

    // Rules whose adjoints are missing (indices into rules()).
    std::vector<std::size_t> closure_defect() const {
        std::vector<std::size_t> missing;
        std::vector<bool> used(rules_.size(), false);
        for (std::size_t i = 0; i < rules_.size(); ++i) {
            bool found = false;
            for (std::size_t j = 0; j < rules_.size(); ++j) {
                if (used[j]) continue;
                if (rules_[j].lhs == rules_[i].rhs && rules_[j].rhs == rules_[i].lhs
                    && rules_[j].amplitude == std::conj(rules_[i].amplitude)) {
                    used[j] = true;
                    found = true;
                    break;
                }
            }
            if (!found) missing.push_back(i);
        }
        return missing;
    }

    // Append the missing adjoint rules and return the closed set.
    RuleSet hermitian_closure() const {
        auto closed = rules_;
        for (auto i : closure_defect())
            closed.push_back({rules_[i].rhs, rules_[i].lhs, std::conj(rules_[i].amplitude)});
        return RuleSet(alphabet_, std::move(closed));
    }

private:
    Alphabet alphabet_;
    std::vector<SubstitutionRule> rules_;
};

/// Apply rule at 1-based position j; nullopt when lhs does not occur there.
inline std::optional<Word> apply_rule(const Word& w, const SubstitutionRule& rule,
                                      std::size_t j) {
    if (j == 0 || j + rule.lhs.size() - 1 > w.size()) return std::nullopt;
    const std::size_t pos = j - 1;
    if (!std::equal(rule.lhs.begin(), rule.lhs.end(), w.begin() + pos))
        return std::nullopt;
    Word out;
    out.reserve(w.size() - rule.lhs.size() + rule.rhs.size());
    out.insert(out.end(), w.begin(), w.begin() + pos);
    out.insert(out.end(), rule.rhs.begin(), rule.rhs.end());
    out.insert(out.end(), w.begin() + pos + rule.lhs.size(), w.end());
    return out;
}

/// All application sites on a word, ordered by rule index then position.
inline std::vector<Application> enumerate_applications(const Word& w, const RuleSet& rules) {
    std::vector<Application> apps;
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& lhs = rules.rule(i).lhs;
        if (lhs.size() > w.size()) continue;
        for (std::size_t pos = 0; pos + lhs.size() <= w.size(); ++pos)
            if (std::equal(lhs.begin(), lhs.end(), w.begin() + pos))
                apps.push_back({i, pos + 1});
    }
    return apps;
}

} // namespace qgram

#endif
