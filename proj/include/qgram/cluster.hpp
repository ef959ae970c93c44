#ifndef QGRAM_CLUSTER_HPP
#define QGRAM_CLUSTER_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "qgram/rules.hpp"
#include "qgram/word.hpp"

namespace qgram {

/**
 * One diagonal trace term: the application chain (rule_ids, positions) acting
 * on alpha. Valid terms match at every step and return to alpha.
 */
struct ClusterTerm {
    Word alpha;
    std::vector<std::size_t> rule_ids;  // step order, indices into the rule set
    std::vector<std::size_t> positions; // 1-based application sites
};

namespace detail {

/// Merge every label found in [pos, pos+count) of `labels` into fresh label
/// `merged`, replace the window by `repl` copies of it, rewriting survivors.
inline std::vector<std::size_t> induce_window(const std::vector<std::size_t>& labels,
                                              std::size_t pos, std::size_t count,
                                              std::size_t repl, std::size_t merged) {
    std::vector<bool> hit;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (labels[i] >= hit.size()) hit.resize(labels[i] + 1, false);
        hit[labels[i]] = true;
    }
    std::vector<std::size_t> out;
    out.reserve(labels.size() - count + repl);
    auto rewrite = [&](std::size_t l) {
        return (l < hit.size() && hit[l]) ? merged : l;
    };
    for (std::size_t i = 0; i < pos; ++i) out.push_back(rewrite(labels[i]));
    for (std::size_t i = 0; i < repl; ++i) out.push_back(merged);
    for (std::size_t i = pos + count; i < labels.size(); ++i) out.push_back(rewrite(labels[i]));
    return out;
}

/// Canonical block labels: each position gets the smallest position index
/// sharing its block.
inline std::vector<std::size_t> normalize_labels(const std::vector<std::size_t>& labels) {
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t first = i;
        for (std::size_t j = 0; j < i; ++j)
            if (labels[j] == labels[i]) {
                first = j;
                break;
            }
        out[i] = first;
    }
    return out;
}

} // namespace detail

/**
 * The footprint partition of the initial positions of alpha, by the literal
 * two-pass induction: a forward sweep builds the partition of the final word
 * step by step, then a backward sweep through the same substitutions induces
 * it back onto alpha. Positions no substitution ever covers stay singletons.
 * Returned as canonical labels (smallest member position, 0-based).
 */
inline std::vector<std::size_t> footprint_partition(const ClusterTerm& term,
                                                    const RuleSet& rules) {
    if (term.rule_ids.size() != term.positions.size())
        throw std::invalid_argument("rule and position arrays differ in length");
    const std::size_t k = term.rule_ids.size();

    struct Step {
        std::size_t pos0, dlen, glen;
    };
    std::vector<Step> steps(k);

    // Forward sweep: partitions of the evolving word, starting discrete.
    Word w = term.alpha;
    std::vector<std::size_t> labels(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) labels[i] = i;
    std::size_t next_label = w.size();
    for (std::size_t s = 0; s < k; ++s) {
        const auto& rule = rules.rule(term.rule_ids[s]);
        auto next = apply_rule(w, rule, term.positions[s]);
        if (!next) throw std::invalid_argument("application chain breaks: no match");
        steps[s] = {term.positions[s] - 1, rule.lhs.size(), rule.rhs.size()};
        labels = detail::induce_window(labels, steps[s].pos0, steps[s].dlen, steps[s].glen,
                                       next_label++);
        w = std::move(*next);
    }

    // Backward sweep through the same substitutions, coarsening as it goes.
    for (std::size_t s = k; s-- > 0;)
        labels = detail::induce_window(labels, steps[s].pos0, steps[s].glen, steps[s].dlen,
                                       next_label++);

    return detail::normalize_labels(labels);
}

/**
 * Union-find over symbol instance ids with O(1) rollback, for the
 * backtracking enumerator. No path compression so undo stays exact.
 */
class BacktrackUnionFind {
public:
    struct Mark {
        std::size_t ids, log;
    };

    std::size_t add() {
        parent_.push_back(parent_.size());
        size_.push_back(1);
        return parent_.size() - 1;
    }

    std::size_t find(std::size_t x) const {
        while (parent_[x] != x) x = parent_[x];
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        log_.push_back({b, a});
    }

    Mark mark() const { return {parent_.size(), log_.size()}; }

    void rollback(const Mark& m) {
        while (log_.size() > m.log) {
            const auto [child, root] = log_.back();
            log_.pop_back();
            size_[root] -= size_[child];
            parent_[child] = child;
        }
        parent_.resize(m.ids);
        size_.resize(m.ids);
    }

private:
    std::vector<std::size_t> parent_, size_;
    std::vector<std::pair<std::size_t, std::size_t>> log_;
};

struct ClusterOptions {
    std::size_t k_max = 8;
    std::size_t node_budget = 200000000; // enumeration blow-up guard
};

/**
 * Raw per-order sums over application chains: raw[k] is the sum of amplitude
 * products over all counted chains of length k. The trace series value is
 * sum_k (-beta)^k / k! raw[k]; exp_coeffs are the matching power-series
 * coefficients in beta, whose products absorb chain interleaving factors.
 */
struct OrderedSeries {
    std::vector<Complex> raw; // index = chain length k

    double value(double beta) const {
        Complex acc{};
        double scalar = 1.0; // (-beta)^k / k!
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (k > 0) scalar *= -beta / static_cast<double>(k);
            acc += scalar * raw[k];
        }
        return acc.real();
    }

    std::vector<Complex> exp_coeffs() const {
        std::vector<Complex> c(raw.size());
        double scalar = 1.0; // (-1)^k / k!
        for (std::size_t k = 0; k < raw.size(); ++k) {
            if (k > 0) scalar *= -1.0 / static_cast<double>(k);
            c[k] = scalar * raw[k];
        }
        return c;
    }
};

namespace detail {

/// True per-step length changes (unclamped, unlike the radius bound).
inline void length_steps(const RuleSet& rules, std::ptrdiff_t& grow, std::ptrdiff_t& shrink) {
    grow = 0;
    shrink = 0;
    for (const auto& r : rules.rules()) {
        const auto d = static_cast<std::ptrdiff_t>(r.rhs.size())
                       - static_cast<std::ptrdiff_t>(r.lhs.size());
        grow = std::max(grow, d);
        shrink = std::max(shrink, -d);
    }
}

/**
 * Depth-first enumeration of application chains from alpha, accumulating
 * amplitude products of chains returning to alpha into three per-order sums:
 *   total       - every returning chain;
 *   connected   - footprint partition is a single class spanning alpha
 *                 (tracked online: every application unions the ids it
 *                 consumes with the ids it creates);
 *   irreducible - no splitting cut: a boundary b of alpha splits the chain
 *                 when no substitution window ever crosses b AND the part
 *                 left of b returns alpha's prefix on its own. Connected
 *                 chains are irreducible; the converse fails once disjoint
 *                 blocks trade length (first at |alpha| = 3), which is why
 *                 the exact interval factorization needs this wider family.
 */
class ChainEnumerator {
public:
    ChainEnumerator(const Word& alpha, const RuleSet& rules, const ClusterOptions& opt)
        : alpha_(alpha), rules_(rules), opt_(opt) {
        detail::length_steps(rules, grow_, shrink_);
        total_.raw.assign(opt.k_max + 1, Complex{});
        connected_.raw.assign(opt.k_max + 1, Complex{});
        irreducible_.raw.assign(opt.k_max + 1, Complex{});
        straddles_.assign(alpha.empty() ? 0 : alpha.size() - 1, 0);
        Word w = alpha;
        std::vector<std::size_t> ids(w.size());
        std::vector<std::size_t> lo(w.size()), hi(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            ids[i] = uf_.add();
            lo[i] = hi[i] = i; // ancestry: the initial position itself
        }
        dfs(w, ids, lo, hi, 0, Complex{1.0, 0.0});
    }

    OrderedSeries total_series() const { return total_; }
    OrderedSeries connected_series() const { return connected_; }
    OrderedSeries irreducible_series() const { return irreducible_; }

private:
    bool reachable(std::ptrdiff_t len, std::size_t steps_left) const {
        const auto m = static_cast<std::ptrdiff_t>(alpha_.size());
        const auto left = static_cast<std::ptrdiff_t>(steps_left);
        if (len > m) return len - m <= left * shrink_;
        if (len < m) return m - len <= left * grow_;
        return true;
    }

    void record(const Word& w, const std::vector<std::size_t>& hi, std::size_t depth,
                Complex product) {
        if (w != alpha_) return;
        total_.raw[depth] += product;
        // Connected: the initial positions form one class spanning all of
        // alpha. Every fresh id joins a class holding an initial id, so the
        // check over initial ids alone decides it.
        bool connected = !alpha_.empty();
        if (connected) {
            const std::size_t root = uf_.find(0);
            for (std::size_t i = 1; i < alpha_.size() && connected; ++i)
                connected = uf_.find(i) == root;
        }
        if (connected) connected_.raw[depth] += product;
        // Irreducible: every boundary is either straddled by some window or
        // fails to split the word back into two separately returning parts.
        // With boundary b unstraddled no letter's ancestry crosses b, so the
        // left part returns on its own iff exactly b letters descend from it.
        bool irreducible = !alpha_.empty();
        for (std::size_t b = 1; b < alpha_.size() && irreducible; ++b) {
            if (straddles_[b - 1] > 0) continue;
            std::size_t left_letters = 0;
            while (left_letters < hi.size() && hi[left_letters] < b) ++left_letters;
            if (left_letters == b) irreducible = false;
        }
        if (irreducible) irreducible_.raw[depth] += product;
    }

    void dfs(const Word& w, const std::vector<std::size_t>& ids,
             const std::vector<std::size_t>& lo, const std::vector<std::size_t>& hi,
             std::size_t depth, Complex product) {
        if (++nodes_ > opt_.node_budget)
            throw std::runtime_error("chain enumeration exceeded its node budget");
        record(w, hi, depth, product);
        if (depth == opt_.k_max) return;
        const std::size_t left = opt_.k_max - depth;
        for (std::size_t ri = 0; ri < rules_.size(); ++ri) {
            const auto& rule = rules_.rule(ri);
            if (rule.amplitude == Complex{} || rule.lhs.size() > w.size()) continue;
            const auto new_len = static_cast<std::ptrdiff_t>(w.size()) -
                                 static_cast<std::ptrdiff_t>(rule.lhs.size()) +
                                 static_cast<std::ptrdiff_t>(rule.rhs.size());
            if (!reachable(new_len, left - 1)) continue;
            for (std::size_t pos = 0; pos + rule.lhs.size() <= w.size(); ++pos) {
                if (!std::equal(rule.lhs.begin(), rule.lhs.end(), w.begin() + pos)) continue;
                const BacktrackUnionFind::Mark mark = uf_.mark();
                // Ancestry of the window: the smallest interval of initial
                // positions the consumed letters descend from.
                std::size_t wlo = lo[pos], whi = hi[pos];
                for (std::size_t i = 1; i < rule.lhs.size(); ++i) {
                    wlo = std::min(wlo, lo[pos + i]);
                    whi = std::max(whi, hi[pos + i]);
                }
                for (std::size_t b = wlo + 1; b <= whi; ++b) ++straddles_[b - 1];
                Word nw;
                nw.reserve(static_cast<std::size_t>(new_len));
                std::vector<std::size_t> nids, nlo, nhi;
                nids.reserve(static_cast<std::size_t>(new_len));
                nw.insert(nw.end(), w.begin(), w.begin() + pos);
                nids.insert(nids.end(), ids.begin(), ids.begin() + pos);
                nlo.insert(nlo.end(), lo.begin(), lo.begin() + pos);
                nhi.insert(nhi.end(), hi.begin(), hi.begin() + pos);
                // The consumed and the created ids all join one class.
                const std::size_t anchor = ids[pos];
                for (std::size_t i = 1; i < rule.lhs.size(); ++i)
                    uf_.unite(anchor, ids[pos + i]);
                for (std::size_t i = 0; i < rule.rhs.size(); ++i) {
                    const std::size_t fresh = uf_.add();
                    uf_.unite(anchor, fresh);
                    nw.push_back(rule.rhs[i]);
                    nids.push_back(fresh);
                    nlo.push_back(wlo);
                    nhi.push_back(whi);
                }
                nw.insert(nw.end(), w.begin() + pos + rule.lhs.size(), w.end());
                nids.insert(nids.end(), ids.begin() + pos + rule.lhs.size(), ids.end());
                nlo.insert(nlo.end(), lo.begin() + pos + rule.lhs.size(), lo.end());
                nhi.insert(nhi.end(), hi.begin() + pos + rule.lhs.size(), hi.end());
                dfs(nw, nids, nlo, nhi, depth + 1, product * rule.amplitude);
                uf_.rollback(mark);
                for (std::size_t b = wlo + 1; b <= whi; ++b) --straddles_[b - 1];
            }
        }
    }

    const Word& alpha_;
    const RuleSet& rules_;
    const ClusterOptions& opt_;
    std::ptrdiff_t grow_ = 0, shrink_ = 0;
    BacktrackUnionFind uf_;
    OrderedSeries total_, connected_, irreducible_;
    std::vector<std::size_t> straddles_; // [b-1]: windows crossing boundary b
    std::size_t nodes_ = 0;
};

} // namespace detail

/**
 * z(alpha) = (e_alpha, e^{-beta H} e_alpha) as a truncated series, by
 * exhaustive chain enumeration with no length cut-off on intermediate words.
 */
inline OrderedSeries brute_force_series_z(const Word& alpha, const RuleSet& rules,
                                          const ClusterOptions& opt = {}) {
    return detail::ChainEnumerator(alpha, rules, opt).total_series();
}

/** Connected-cluster weight c(m), summed over all words of length m. */
struct ClusterWeight {
    std::size_t m = 0;
    std::size_t k_max = 0;
    OrderedSeries series; // connected chains only

    double value(double beta) const { return series.value(beta); }
};

namespace detail {

template <typename Pick>
inline OrderedSeries sum_over_words(std::size_t m, const RuleSet& rules,
                                    const ClusterOptions& opt, Pick pick) {
    OrderedSeries out;
    out.raw.assign(opt.k_max + 1, Complex{});
    const std::size_t r = rules.alphabet().size();
    double words = 1.0;
    for (std::size_t i = 0; i < m; ++i) words *= static_cast<double>(r);
    if (words > 1e7) throw std::invalid_argument("too many base words at this length");
    Word alpha(m);
    const auto count = static_cast<std::size_t>(words);
    for (std::size_t code = 0; code < count; ++code) {
        std::size_t rem = code;
        for (std::size_t i = m; i-- > 0;) {
            alpha[i] = static_cast<std::uint32_t>(rem % r);
            rem /= r;
        }
        const OrderedSeries one = pick(detail::ChainEnumerator(alpha, rules, opt));
        for (std::size_t k = 0; k <= opt.k_max; ++k) out.raw[k] += one.raw[k];
    }
    return out;
}

} // namespace detail

inline ClusterWeight cluster_weight(std::size_t m, const RuleSet& rules,
                                    const ClusterOptions& opt = {}) {
    if (m < 1) throw std::invalid_argument("cluster weights start at length 1");
    ClusterWeight out;
    out.m = m;
    out.k_max = opt.k_max;
    out.series = detail::sum_over_words(
        m, rules, opt, [](const detail::ChainEnumerator& e) { return e.connected_series(); });
    return out;
}

/**
 * Interval-irreducible weight: chains with no splitting cut, summed over all
 * words of length m. Equals the connected weight plus the chains whose
 * disjoint blocks trade length with each other; the exact composition
 * identity z(n) = sum over m_1+...+m_p = n of prod c_irr(m_i) holds for this
 * family (each returning chain splits uniquely at its splitting cuts), while
 * connected weights alone undercount once such trades appear.
 */
inline ClusterWeight irreducible_weight(std::size_t m, const RuleSet& rules,
                                        const ClusterOptions& opt = {}) {
    if (m < 1) throw std::invalid_argument("cluster weights start at length 1");
    ClusterWeight out;
    out.m = m;
    out.k_max = opt.k_max;
    out.series = detail::sum_over_words(
        m, rules, opt, [](const detail::ChainEnumerator& e) { return e.irreducible_series(); });
    return out;
}

/**
 * Order-by-order check of the interval factorization: the full series z(n)
 * summed over words of length n must equal the sum over compositions
 * n = m_1 + ... + m_p of products of per-interval weights, as power series
 * in beta. With irreducible weights the identity is exact (every returning
 * chain splits uniquely at its splitting cuts, and the exponential-series
 * coefficients absorb the k!/(m_1!...m_p!) interleaving count); with
 * connected weights the same composition sum undercounts by the chains whose
 * blocks trade length, so that residual is reported separately as a measure
 * of the length-trade contribution (zero through n = 2 always, and zero at
 * every n for length-preserving rule sets).
 */
struct FactorizationReport {
    std::size_t cutoff = 0;
    std::size_t k_max = 0;
    std::vector<std::vector<Complex>> z_coeffs;        // [n][k], direct
    std::vector<std::vector<Complex>> factored_coeffs; // [n][k], irreducible composition sum
    std::vector<double> residual_per_order;            // max over n, exact identity
    double max_residual = 0.0;
    std::vector<double> connected_residual_per_order;  // composition sum of connected weights
    double max_connected_residual = 0.0;
    double value_direct = 0.0;   // sum_n z(n) at the given beta
    double value_factored = 0.0;
};

inline FactorizationReport factorization_check(std::size_t cutoff, const RuleSet& rules,
                                               double beta, const ClusterOptions& opt = {}) {
    FactorizationReport rep;
    rep.cutoff = cutoff;
    rep.k_max = opt.k_max;
    const std::size_t orders = opt.k_max + 1;

    // Direct series per length, summed over all words of that length.
    for (std::size_t n = 0; n <= cutoff; ++n) {
        const OrderedSeries z = detail::sum_over_words(
            n, rules, opt, [](const detail::ChainEnumerator& e) { return e.total_series(); });
        rep.z_coeffs.push_back(z.exp_coeffs());
        rep.value_direct += z.value(beta);
    }

    // Per-interval weights, then the composition sums by convolution over n.
    std::vector<std::vector<Complex>> irr(cutoff + 1, std::vector<Complex>(orders));
    std::vector<std::vector<Complex>> conn(cutoff + 1, std::vector<Complex>(orders));
    for (std::size_t m = 1; m <= cutoff; ++m) {
        irr[m] = irreducible_weight(m, rules, opt).series.exp_coeffs();
        conn[m] = cluster_weight(m, rules, opt).series.exp_coeffs();
    }

    const auto compose = [&](const std::vector<std::vector<Complex>>& w) {
        std::vector<std::vector<Complex>> f(cutoff + 1,
                                            std::vector<Complex>(orders, Complex{}));
        f[0][0] = Complex{1.0, 0.0}; // empty composition
        for (std::size_t n = 1; n <= cutoff; ++n)
            for (std::size_t m = 1; m <= n; ++m)
                for (std::size_t k = 0; k < orders; ++k)
                    for (std::size_t j = 0; j + k < orders; ++j)
                        f[n][k + j] += w[m][k] * f[n - m][j];
        return f;
    };
    const auto f_irr = compose(irr);
    const auto f_conn = compose(conn);

    rep.residual_per_order.assign(orders, 0.0);
    rep.connected_residual_per_order.assign(orders, 0.0);
    for (std::size_t n = 0; n <= cutoff; ++n) {
        double beta_pow = 1.0;
        for (std::size_t k = 0; k < orders; ++k) {
            const double res = std::abs(rep.z_coeffs[n][k] - f_irr[n][k]);
            rep.residual_per_order[k] = std::max(rep.residual_per_order[k], res);
            rep.max_residual = std::max(rep.max_residual, res);
            const double cres = std::abs(rep.z_coeffs[n][k] - f_conn[n][k]);
            rep.connected_residual_per_order[k] =
                std::max(rep.connected_residual_per_order[k], cres);
            rep.max_connected_residual = std::max(rep.max_connected_residual, cres);
            rep.value_factored += (f_irr[n][k] * beta_pow).real();
            beta_pow *= beta;
        }
        rep.factored_coeffs.push_back(f_irr[n]);
    }
    return rep;
}

} // namespace qgram

#endif
