#ifndef QGRAM_WORD_HPP
#define QGRAM_WORD_HPP

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qgram {

/// A word is a finite sequence of symbol indices into an Alphabet.
/// The empty word is a valid word and prints as "ε".
using Word = std::vector<std::uint32_t>;

/**
 * Finite set of named symbols. Symbol indices are the positions in the
 * declaration order; words store indices, never names.
 */
class Alphabet {
public:
    explicit Alphabet(std::vector<std::string> symbols)
        : names_(std::move(symbols)) {
        if (names_.empty())
            throw std::invalid_argument("alphabet must declare at least one symbol");
        for (std::size_t i = 0; i < names_.size(); ++i) {
            const auto& name = names_[i];
            if (name.empty())
                throw std::invalid_argument("alphabet symbol names must be nonempty");
            if (name == "\xce\xb5")
                throw std::invalid_argument("symbol name ε is reserved for the empty word");
            if (!index_.emplace(name, static_cast<std::uint32_t>(i)).second)
                throw std::invalid_argument("duplicate alphabet symbol: " + name);
        }
    }

    std::size_t size() const { return names_.size(); }

    const std::string& name(std::uint32_t i) const {
        if (i >= names_.size())
            throw std::out_of_range("symbol index out of range");
        return names_[i];
    }

    bool has(std::string_view name) const { return index_.count(std::string(name)) > 0; }

    std::uint32_t index(std::string_view name) const {
        auto it = index_.find(std::string(name));
        if (it == index_.end())
            throw std::invalid_argument("unknown symbol: " + std::string(name));
        return it->second;
    }

    // Greedy longest-match tokenization. Unambiguous for single-character
    // symbol sets; multi-character names are matched longest-first.
    Word parse(std::string_view text) const {
        Word w;
        if (text == "\xce\xb5") return w;
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t best = 0;
            std::uint32_t best_idx = 0;
            for (std::size_t i = 0; i < names_.size(); ++i) {
                const auto& n = names_[i];
                if (n.size() > best && text.substr(pos, n.size()) == n) {
                    best = n.size();
                    best_idx = static_cast<std::uint32_t>(i);
                }
            }
            if (best == 0)
                throw std::invalid_argument("cannot parse word: no symbol matches at \""
                                            + std::string(text.substr(pos)) + "\"");
            w.push_back(best_idx);
            pos += best;
        }
        return w;
    }

    std::string format(const Word& w) const {
        if (w.empty()) return "\xce\xb5";
        std::string out;
        for (auto s : w) out += name(s);
        return out;
    }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::uint32_t> index_;
};

/**
 * The word space cut off at length N: all words of length 0..N over an
 * r-symbol alphabet, enumerated length-major and lexicographically within
 * each length (symbol indices as base-r digits, most significant first).
 *
 * dim = (r^{N+1} - 1)/(r - 1) for r > 1 and N + 1 for r = 1.
 */
class TruncatedWordSpace {
public:
    TruncatedWordSpace(Alphabet alphabet, std::size_t max_length)
        : alphabet_(std::move(alphabet)), max_length_(max_length) {
        const std::size_t r = alphabet_.size();
        offsets_.resize(max_length_ + 2);
        offsets_[0] = 0;
        std::size_t count = 1; // r^n, starting at n = 0
        for (std::size_t n = 0; n <= max_length_; ++n) {
            if (offsets_[n] > std::numeric_limits<std::size_t>::max() - count)
                throw std::overflow_error("truncated word space dimension overflows");
            offsets_[n + 1] = offsets_[n] + count;
            if (n < max_length_) {
                if (r != 0 && count > std::numeric_limits<std::size_t>::max() / r)
                    throw std::overflow_error("truncated word space dimension overflows");
                count *= r;
            }
        }
    }

    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t max_length() const { return max_length_; }
    std::size_t dim() const { return offsets_[max_length_ + 1]; }

    // Half-open index range of the words of exactly length n.
    std::pair<std::size_t, std::size_t> sector_range(std::size_t n) const {
        if (n > max_length_)
            throw std::out_of_range("sector length exceeds the cutoff");
        return {offsets_[n], offsets_[n + 1]};
    }

    std::size_t index_of(const Word& w) const {
        if (w.size() > max_length_)
            throw std::out_of_range("word longer than the cutoff");
        const std::size_t r = alphabet_.size();
        std::size_t digits = 0;
        for (auto s : w) {
            if (s >= r) throw std::invalid_argument("symbol index outside the alphabet");
            digits = digits * r + s;
        }
        return offsets_[w.size()] + digits;
    }

    Word word_at(std::size_t index) const {
        if (index >= dim())
            throw std::out_of_range("basis index out of range");
        std::size_t n = length_at(index);
        std::size_t digits = index - offsets_[n];
        const std::size_t r = alphabet_.size();
        Word w(n);
        for (std::size_t i = n; i-- > 0;) {
            w[i] = static_cast<std::uint32_t>(digits % r);
            digits /= r;
        }
        return w;
    }

    std::size_t length_at(std::size_t index) const {
        if (index >= dim())
            throw std::out_of_range("basis index out of range");
        // offsets_ is strictly increasing; find n with offsets_[n] <= index < offsets_[n+1]
        std::size_t lo = 0, hi = max_length_;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (offsets_[mid] <= index) lo = mid; else hi = mid - 1;
        }
        return lo;
    }

private:
    Alphabet alphabet_;
    std::size_t max_length_;
    std::vector<std::size_t> offsets_;
};

} // namespace qgram

#endif
