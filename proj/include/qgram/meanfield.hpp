#ifndef QGRAM_MEANFIELD_HPP
#define QGRAM_MEANFIELD_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "qgram/sparse.hpp"
#include "qgram/spin_graph.hpp"

namespace qgram {

/// Append a pendant vertex to a chosen vertex.
inline GraphSubstitution meanfield_sub1() {
    return GraphSubstitution(SpinGraph({0}, {}), SpinGraph({0, 0}, {{0, 1}}), {0}, {0});
}

/// Inverse of sub1: delete a vertex of host degree 1 together with its edge.
inline GraphSubstitution meanfield_sub2() {
    return GraphSubstitution(SpinGraph({0, 0}, {{0, 1}}), SpinGraph({0}, {}), {0}, {0},
                             {-1, 1});
}

/// Connect two chosen vertices by a new edge.
inline GraphSubstitution meanfield_sub3() {
    return GraphSubstitution(SpinGraph({0, 0}, {}), SpinGraph({0, 0}, {{0, 1}}), {0, 1},
                             {0, 1});
}

/// Delete one edge.
inline GraphSubstitution meanfield_sub4() {
    return GraphSubstitution(SpinGraph({0, 0}, {{0, 1}}), SpinGraph({0, 0}, {}), {0, 1},
                             {0, 1});
}

struct MeanFieldOptions {
    // With multi-edges off, sub3 only applies to non-adjacent pairs.
    bool allow_multi_edges = false;
    // Required cap when multi-edges are on; otherwise the family is infinite.
    std::uint32_t max_edges = 0;
};

/// Embeddings of sub `s` (1..4) into the host, with the family policy applied.
inline std::vector<GraphEmbedding> meanfield_applications(const SpinGraph& host, int s,
                                                          const MeanFieldOptions& opt) {
    static const std::array<GraphSubstitution, 4> subs{meanfield_sub1(), meanfield_sub2(),
                                                       meanfield_sub3(), meanfield_sub4()};
    if (s < 1 || s > 4) throw std::invalid_argument("substitution index must be 1..4");
    auto psis = subs[static_cast<std::size_t>(s - 1)].applications(host);
    if (s == 3 && !opt.allow_multi_edges) {
        std::vector<GraphEmbedding> kept;
        for (const auto& psi : psis)
            if (host.edge_multiplicity(psi[0], psi[1]) == 0) kept.push_back(psi);
        return kept;
    }
    return psis;
}

inline SpinGraph meanfield_apply(const SpinGraph& host, int s, const GraphEmbedding& psi) {
    static const std::array<GraphSubstitution, 4> subs{meanfield_sub1(), meanfield_sub2(),
                                                       meanfield_sub3(), meanfield_sub4()};
    return apply_graph_sub(host, subs[static_cast<std::size_t>(s - 1)], psi);
}

/**
 * All graph classes reachable from the single vertex under the four moves,
 * up to n_max vertices. With multi-edges off this is every nonempty simple
 * graph class of at most n_max vertices.
 */
inline GraphBasisSpace<SpinGraph> build_meanfield_basis(std::uint32_t n_max,
                                                        MeanFieldOptions opt = {}) {
    if (n_max == 0) throw std::invalid_argument("basis needs at least one vertex");
    if (opt.allow_multi_edges && opt.max_edges == 0)
        throw std::invalid_argument("multi-edge family needs an edge cap");
    std::map<CanonicalKey, SpinGraph> classes;
    std::deque<SpinGraph> queue;
    SpinGraph seed({0}, {});
    classes.emplace(seed.canonical_key(), seed);
    queue.push_back(seed);
    while (!queue.empty()) {
        SpinGraph g = queue.front();
        queue.pop_front();
        for (int s = 1; s <= 4; ++s) {
            if (s == 1 && g.n_vertices() >= n_max) continue;
            for (const auto& psi : meanfield_applications(g, s, opt)) {
                SpinGraph out = meanfield_apply(g, s, psi);
                if (opt.allow_multi_edges && out.n_edges() > opt.max_edges) continue;
                CanonicalKey key = out.canonical_key();
                if (classes.emplace(key, out).second) queue.push_back(out);
            }
        }
    }
    return GraphBasisSpace<SpinGraph>(std::move(classes));
}

/**
 * The mean-field Hamiltonian on a basis of graph classes.
 *
 * Each substitution matrix entry between classes g and g' is the geometric
 * mean sqrt(t_fwd * t_rev) of the forward and reverse embedding counts.
 * Raw counts satisfy t_fwd(g,g') |Aut(g')| = t_rev(g',g) |Aut(g)|, so this
 * is exactly the matrix of the substitution operator in the orthonormalized
 * class basis, and the paired matrices are exact transposes of each other.
 */
class MeanFieldModel {
public:
    explicit MeanFieldModel(GraphBasisSpace<SpinGraph> basis, MeanFieldOptions opt = {})
        : basis_(std::move(basis)), opt_(opt) {
        for (int s = 0; s < 4; ++s) counts_[s].resize(basis_.dim());
        for (std::size_t i = 0; i < basis_.dim(); ++i) {
            const SpinGraph& g = basis_.graph(i);
            for (int s = 1; s <= 4; ++s) {
                for (const auto& psi : meanfield_applications(g, s, opt_)) {
                    SpinGraph out = meanfield_apply(g, s, psi);
                    auto j = basis_.index_of(out.canonical_key());
                    if (!j) continue; // target outside the truncated basis
                    ++counts_[s - 1][i][*j];
                }
            }
        }
    }

    const GraphBasisSpace<SpinGraph>& basis() const { return basis_; }

    // Number of embeddings of sub `s` taking class `source` to class `target`.
    std::size_t transition_count(int s, std::size_t source, std::size_t target) const {
        const auto& row = counts_.at(static_cast<std::size_t>(s - 1)).at(source);
        auto it = row.find(target);
        return it == row.end() ? 0 : it->second;
    }

    // Matrix of Σ_j a_s(j); s in 1..4. Entry (target, source) is the
    // geometric mean of this sub's count and its inverse partner's count.
    SparseMatrix sub_matrix(int s) const {
        if (s < 1 || s > 4) throw std::invalid_argument("substitution index must be 1..4");
        const int pair = (s % 2 == 1) ? s + 1 : s - 1;
        std::vector<SparseMatrix::Entry> entries;
        for (std::size_t i = 0; i < basis_.dim(); ++i) {
            for (const auto& [j, fwd] : counts_[static_cast<std::size_t>(s - 1)][i]) {
                std::size_t rev = transition_count(pair, j, i);
                if (rev == 0)
                    throw std::logic_error("substitution has no inverse embedding");
                entries.push_back({j, i,
                                   Complex{std::sqrt(static_cast<double>(fwd) *
                                                     static_cast<double>(rev)),
                                           0.0}});
            }
        }
        return SparseMatrix(basis_.dim(), std::move(entries));
    }

    // B = λ₁ Σ a₁(j) + (λ₂/N) Σ a₃(j), with N the source vertex count.
    SparseMatrix b_matrix(double lambda1, double lambda2) const {
        SparseMatrix m1 = sub_matrix(1);
        SparseMatrix m3 = scale_by_source(sub_matrix(3), lambda2);
        return m1.scaled(Complex{lambda1, 0.0}).plus(m3);
    }

    // H = λ₁ Σ (a₁+a₂) + (λ₂/N) Σ (a₃+a₄). Exactly Hermitian because each
    // paired entry is assembled from the same count product.
    SparseHermitianOperator hamiltonian(double lambda1, double lambda2) const {
        if (lambda1 < 0.0 || lambda2 < 0.0)
            throw std::invalid_argument("coupling constants must be nonnegative");
        SparseMatrix sum = sub_matrix(1).plus(sub_matrix(2)).scaled(Complex{lambda1, 0.0});
        sum = sum.plus(scale_by_source(sub_matrix(3), lambda2));
        sum = sum.plus(scale_by_source(sub_matrix(4), lambda2));
        return SparseHermitianOperator(sum);
    }

private:
    // Scale each column by λ / n(source). Edge moves preserve the vertex
    // count, so the scaling is symmetric between the paired matrices.
    SparseMatrix scale_by_source(const SparseMatrix& m, double lambda) const {
        std::vector<SparseMatrix::Entry> entries;
        for (const auto& e : m.entries()) {
            double n = static_cast<double>(basis_.graph(e.col).n_vertices());
            entries.push_back({e.row, e.col, e.value * (lambda / n)});
        }
        return SparseMatrix(m.dim(), std::move(entries));
    }

    GraphBasisSpace<SpinGraph> basis_;
    MeanFieldOptions opt_;
    std::array<std::vector<std::map<std::size_t, std::size_t>>, 4> counts_;
};

inline SparseHermitianOperator meanfield_hamiltonian(const GraphBasisSpace<SpinGraph>& basis,
                                                     double lambda1, double lambda2,
                                                     MeanFieldOptions opt = {}) {
    return MeanFieldModel(basis, opt).hamiltonian(lambda1, lambda2);
}

} // namespace qgram

#endif
