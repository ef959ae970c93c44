#ifndef QGRAM_ROTATION_HPP
#define QGRAM_ROTATION_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qgram/sparse.hpp"
#include "qgram/spin_graph.hpp"

namespace qgram {

/**
 * Connected cubic graph with a rotation system, stored as two permutations
 * of the 3N edge-ends: P (N disjoint 3-cycles, the vertices) and I (3N/2
 * disjoint 2-cycles, the edges). N must be even. Self-loops and parallel
 * edges are allowed; they arise naturally from reconnection moves.
 */
class RotationGraph {
public:
    RotationGraph(std::vector<std::uint32_t> p, std::vector<std::uint32_t> i)
        : p_(std::move(p)), i_(std::move(i)) {
        const std::size_t m = p_.size();
        if (m == 0 || m != i_.size() || m % 6 != 0)
            throw std::invalid_argument("need 3N edge-ends with N even");
        for (std::size_t x = 0; x < m; ++x)
            if (p_[x] >= m || i_[x] >= m)
                throw std::invalid_argument("permutation value out of range");
        for (std::size_t x = 0; x < m; ++x) {
            if (p_[x] == x || p_[p_[x]] == x || p_[p_[p_[x]]] != x)
                throw std::invalid_argument("P must consist of 3-cycles");
            if (i_[x] == x || i_[i_[x]] != x)
                throw std::invalid_argument("I must be a fixed-point-free involution");
        }
        if (!connected())
            throw std::invalid_argument("rotation graph must be connected");
    }

    std::uint32_t n_ends() const { return static_cast<std::uint32_t>(p_.size()); }
    std::uint32_t n_vertices() const { return n_ends() / 3; }
    std::uint32_t n_edges() const { return n_ends() / 2; }
    std::uint32_t p(std::uint32_t x) const { return p_[x]; }
    std::uint32_t i(std::uint32_t x) const { return i_[x]; }
    const std::vector<std::uint32_t>& perm_p() const { return p_; }
    const std::vector<std::uint32_t>& perm_i() const { return i_; }

    // Edges as (x, I(x)) pairs with x < I(x), in increasing order of x.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
        out.reserve(n_edges());
        for (std::uint32_t x = 0; x < n_ends(); ++x)
            if (x < i_[x]) out.emplace_back(x, i_[x]);
        return out;
    }

    // Vertices as the 3-cycles of P, listed by their smallest end.
    std::vector<std::array<std::uint32_t, 3>> vertices() const {
        std::vector<std::array<std::uint32_t, 3>> out;
        std::vector<bool> seen(n_ends(), false);
        for (std::uint32_t x = 0; x < n_ends(); ++x) {
            if (seen[x]) continue;
            std::array<std::uint32_t, 3> cyc{x, p_[x], p_[p_[x]]};
            for (auto e : cyc) seen[e] = true;
            out.push_back(cyc);
        }
        return out;
    }

    // Faces are the cycles of the composite end map x -> P(I(x)).
    std::uint32_t faces() const {
        std::vector<bool> seen(n_ends(), false);
        std::uint32_t count = 0;
        for (std::uint32_t x = 0; x < n_ends(); ++x) {
            if (seen[x]) continue;
            ++count;
            std::uint32_t y = x;
            while (!seen[y]) {
                seen[y] = true;
                y = p_[i_[y]];
            }
        }
        return count;
    }

    /**
     * Isomorphism-complete encoding. A relabeling is grown by breadth-first
     * traversal from a seed end (successors P(x) then I(x)); connectivity
     * makes the relabeling unique given the seed, so the minimum over all
     * 3N seeds is a canonical form. Quadratic in the number of ends.
     */
    CanonicalKey canonical_key() const {
        CanonicalKey best = encode_from(0);
        for (std::uint32_t seed = 1; seed < n_ends(); ++seed) {
            CanonicalKey cand = encode_from(seed);
            if (cand < best) best = std::move(cand);
        }
        return best;
    }

    // Rotation-system automorphisms act freely on ends, so |Aut| is the
    // number of seeds reproducing the encoding of seed 0.
    std::size_t automorphism_count() const {
        const CanonicalKey self = encode_from(0);
        std::size_t count = 0;
        for (std::uint32_t seed = 0; seed < n_ends(); ++seed)
            if (encode_from(seed) == self) ++count;
        return count;
    }

private:
    bool connected() const {
        std::vector<bool> seen(p_.size(), false);
        std::deque<std::uint32_t> queue{0};
        seen[0] = true;
        std::size_t visited = 1;
        while (!queue.empty()) {
            std::uint32_t x = queue.front();
            queue.pop_front();
            for (std::uint32_t y : {p_[x], i_[x]}) {
                if (seen[y]) continue;
                seen[y] = true;
                ++visited;
                queue.push_back(y);
            }
        }
        return visited == p_.size();
    }

    CanonicalKey encode_from(std::uint32_t seed) const {
        const std::uint32_t m = n_ends();
        const std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
        std::vector<std::uint32_t> newid(m, none);
        std::vector<std::uint32_t> order;
        order.reserve(m);
        newid[seed] = 0;
        order.push_back(seed);
        for (std::size_t q = 0; q < order.size(); ++q) {
            std::uint32_t x = order[q];
            for (std::uint32_t y : {p_[x], i_[x]}) {
                if (newid[y] != none) continue;
                newid[y] = static_cast<std::uint32_t>(order.size());
                order.push_back(y);
            }
        }
        CanonicalKey key;
        key.reserve(1 + 2 * m);
        key.push_back(m);
        for (std::uint32_t k = 0; k < m; ++k) key.push_back(newid[p_[order[k]]]);
        for (std::uint32_t k = 0; k < m; ++k) key.push_back(newid[i_[order[k]]]);
        return key;
    }

    std::vector<std::uint32_t> p_;
    std::vector<std::uint32_t> i_;
};

/// Genus from V - E + F = 2 - 2ρ; throws if ρ would be negative or fractional.
inline std::uint32_t rotation_genus(const RotationGraph& g) {
    const std::int64_t euler = static_cast<std::int64_t>(g.n_vertices()) -
                               static_cast<std::int64_t>(g.n_edges()) +
                               static_cast<std::int64_t>(g.faces());
    const std::int64_t twice_rho = 2 - euler;
    if (twice_rho < 0 || twice_rho % 2 != 0)
        throw std::runtime_error("Euler characteristic does not give a valid genus");
    return static_cast<std::uint32_t>(twice_rho / 2);
}

/// Two triangles glued along their boundary: F=3, genus 0.
inline RotationGraph rotation_sphere() {
    return RotationGraph({1, 2, 0, 4, 5, 3}, {3, 5, 4, 0, 2, 1});
}

/// Two vertices joined by three parallel edges aligned so that F=1, genus 1.
inline RotationGraph rotation_torus() {
    return RotationGraph({1, 2, 0, 4, 5, 3}, {3, 4, 5, 0, 1, 2});
}

/// A reconnection pairs up the 12 ends freed by a move.
using Reconnection = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

/// All perfect matchings of the given ends (double factorial many),
/// enumerated deterministically.
inline std::vector<Reconnection> perfect_matchings(std::vector<std::uint32_t> ends) {
    std::sort(ends.begin(), ends.end());
    std::vector<Reconnection> out;
    Reconnection current;
    auto recurse = [&](auto&& self, std::vector<std::uint32_t>& rest) -> void {
        if (rest.empty()) {
            out.push_back(current);
            return;
        }
        std::uint32_t first = rest.front();
        for (std::size_t k = 1; k < rest.size(); ++k) {
            std::vector<std::uint32_t> next;
            next.reserve(rest.size() - 2);
            for (std::size_t t = 1; t < rest.size(); ++t)
                if (t != k) next.push_back(rest[t]);
            current.emplace_back(first, rest[k]);
            self(self, next);
            current.pop_back();
        }
    };
    recurse(recurse, ends);
    return out;
}

/**
 * Grow move: cut three distinct edges, append two fresh vertices (two new
 * 3-cycles of P), and re-pair the 12 free ends according to `pi`. Returns
 * the new graph, or nothing if `pi` has a fixed point or disconnects the
 * graph. N increases by 2.
 */
inline std::optional<RotationGraph> triangulation_move(const RotationGraph& g,
                                                       const std::array<std::size_t, 3>& edge_indices,
                                                       const Reconnection& pi) {
    const auto edges = g.edges();
    if (edge_indices[0] == edge_indices[1] || edge_indices[0] == edge_indices[2] ||
        edge_indices[1] == edge_indices[2])
        throw std::invalid_argument("the three cut edges must be distinct");
    const std::uint32_t m = g.n_ends();
    std::vector<bool> free_end(m + 6, false);
    for (std::size_t idx : edge_indices) {
        if (idx >= edges.size()) throw std::invalid_argument("edge index out of range");
        free_end[edges[idx].first] = true;
        free_end[edges[idx].second] = true;
    }
    for (std::uint32_t x = m; x < m + 6; ++x) free_end[x] = true;

    if (pi.size() != 6) throw std::invalid_argument("reconnection must pair 12 ends");
    std::vector<bool> covered(m + 6, false);
    for (const auto& [a, b] : pi) {
        if (a == b) return std::nullopt; // fixed point: rejected
        if (a >= m + 6 || b >= m + 6 || !free_end[a] || !free_end[b] || covered[a] ||
            covered[b])
            throw std::invalid_argument("reconnection must cover the 12 free ends once");
        covered[a] = covered[b] = true;
    }

    std::vector<std::uint32_t> p(g.perm_p());
    p.resize(m + 6);
    for (std::uint32_t base : {m, m + 3}) {
        p[base] = base + 1;
        p[base + 1] = base + 2;
        p[base + 2] = base;
    }
    std::vector<std::uint32_t> i(g.perm_i());
    i.resize(m + 6);
    for (const auto& [a, b] : pi) {
        i[a] = b;
        i[b] = a;
    }

    // Cheap connectivity probe before constructing (the constructor throws).
    std::vector<bool> seen(m + 6, false);
    std::deque<std::uint32_t> queue{0};
    seen[0] = true;
    std::size_t visited = 1;
    while (!queue.empty()) {
        std::uint32_t x = queue.front();
        queue.pop_front();
        for (std::uint32_t y : {p[x], i[x]}) {
            if (seen[y]) continue;
            seen[y] = true;
            ++visited;
            queue.push_back(y);
        }
    }
    if (visited != m + 6) return std::nullopt;
    return RotationGraph(std::move(p), std::move(i));
}

/// The 12 ends a move on these edges frees: 6 cut ends plus 6 fresh ones.
inline std::vector<std::uint32_t> move_free_ends(const RotationGraph& g,
                                                 const std::array<std::size_t, 3>& edge_indices) {
    const auto edges = g.edges();
    std::vector<std::uint32_t> ends;
    ends.reserve(12);
    for (std::size_t idx : edge_indices) {
        ends.push_back(edges.at(idx).first);
        ends.push_back(edges.at(idx).second);
    }
    for (std::uint32_t x = g.n_ends(); x < g.n_ends() + 6; ++x) ends.push_back(x);
    return ends;
}

/**
 * Visit every accepted move from g: all unordered triples of distinct edges
 * and, for each, all reconnections of the 12 free ends. The callback gets
 * the triple, the reconnection index within the triple, and the result.
 */
template <class Fn>
inline void for_each_accepted_move(const RotationGraph& g, Fn&& fn) {
    const std::size_t ne = g.n_edges();
    for (std::size_t a = 0; a < ne; ++a)
        for (std::size_t b = a + 1; b < ne; ++b)
            for (std::size_t c = b + 1; c < ne; ++c) {
                std::array<std::size_t, 3> triple{a, b, c};
                auto matchings = perfect_matchings(move_free_ends(g, triple));
                for (std::size_t k = 0; k < matchings.size(); ++k) {
                    auto out = triangulation_move(g, triple, matchings[k]);
                    if (out) fn(triple, k, *out);
                }
            }
}

/**
 * Shrink move used to audit adjointness: delete two vertices, cut the extra
 * edges listed, and re-pair all dangling ends per `rewire` (given in the
 * original end ids). Returns nothing if the result is disconnected.
 */
inline std::optional<RotationGraph> remove_two_vertices(const RotationGraph& g,
                                                        std::uint32_t v1_end, std::uint32_t v2_end,
                                                        const std::vector<std::size_t>& cut_edge_indices,
                                                        const Reconnection& rewire) {
    const std::uint32_t m = g.n_ends();
    if (m < 12) return std::nullopt; // would drop below the smallest graph
    std::vector<bool> removed(m, false);
    for (std::uint32_t seed : {v1_end, v2_end}) {
        if (seed >= m) throw std::invalid_argument("vertex end out of range");
        std::uint32_t x = seed;
        do {
            removed[x] = true;
            x = g.p(x);
        } while (x != seed);
    }

    const auto edges = g.edges();
    std::vector<bool> cut(m, false);
    for (std::size_t idx : cut_edge_indices) {
        cut[edges.at(idx).first] = true;
        cut[edges.at(idx).second] = true;
    }

    // Surviving ends keep their relative order.
    const std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> newid(m, none);
    std::uint32_t next = 0;
    for (std::uint32_t x = 0; x < m; ++x)
        if (!removed[x]) newid[x] = next++;
    if (next % 6 != 0) return std::nullopt;

    std::vector<std::uint32_t> p(next), i(next, none);
    for (std::uint32_t x = 0; x < m; ++x)
        if (!removed[x]) p[newid[x]] = newid[g.p(x)];
    std::vector<bool> dangling(m, false);
    for (std::uint32_t x = 0; x < m; ++x) {
        if (removed[x]) continue;
        if (removed[g.i(x)] || cut[x])
            dangling[x] = true;
        else
            i[newid[x]] = newid[g.i(x)];
    }
    for (const auto& [a, b] : rewire) {
        if (a >= m || b >= m || !dangling[a] || !dangling[b] || a == b)
            throw std::invalid_argument("rewire must pair the dangling ends");
        if (i[newid[a]] != none || i[newid[b]] != none)
            throw std::invalid_argument("rewire pairs an end twice");
        i[newid[a]] = newid[b];
        i[newid[b]] = newid[a];
    }
    for (std::uint32_t x = 0; x < next; ++x)
        if (i[x] == none) throw std::invalid_argument("rewire left a dangling end");

    // Connectivity probe, then validated construction.
    std::vector<bool> seen(next, false);
    std::deque<std::uint32_t> queue{0};
    seen[0] = true;
    std::uint32_t visited = 1;
    while (!queue.empty()) {
        std::uint32_t x = queue.front();
        queue.pop_front();
        for (std::uint32_t y : {p[x], i[x]}) {
            if (seen[y]) continue;
            seen[y] = true;
            ++visited;
            queue.push_back(y);
        }
    }
    if (visited != next) return std::nullopt;
    return RotationGraph(std::move(p), std::move(i));
}

/// Breadth-first closure of the 2-vertex sphere under accepted moves,
/// up to n_max vertices.
inline GraphBasisSpace<RotationGraph> build_rotation_basis(std::uint32_t n_max) {
    if (n_max < 2 || n_max % 2 != 0)
        throw std::invalid_argument("vertex cap must be an even number at least 2");
    std::map<CanonicalKey, RotationGraph> classes;
    std::deque<RotationGraph> queue;
    RotationGraph seed = rotation_sphere();
    classes.emplace(seed.canonical_key(), seed);
    queue.push_back(seed);
    while (!queue.empty()) {
        RotationGraph g = queue.front();
        queue.pop_front();
        if (g.n_vertices() + 2 > n_max) continue;
        for_each_accepted_move(g, [&](const std::array<std::size_t, 3>&, std::size_t,
                                      const RotationGraph& out) {
            CanonicalKey key = out.canonical_key();
            if (classes.emplace(key, out).second) queue.push_back(out);
        });
    }
    return GraphBasisSpace<RotationGraph>(std::move(classes));
}

/**
 * Triangulation dynamics on a basis of rotation-graph classes. B counts
 * accepted moves between classes with equal weights; the Hamiltonian is
 * (λ/N²)(B + B*) with N the vertex count of the move's source and B* the
 * entrywise conjugate transpose.
 */
class TriangulationModel {
public:
    explicit TriangulationModel(GraphBasisSpace<RotationGraph> basis)
        : basis_(std::move(basis)) {
        std::uint32_t max_ends = 0;
        for (std::size_t i = 0; i < basis_.dim(); ++i)
            max_ends = std::max(max_ends, basis_.graph(i).n_ends());
        std::vector<SparseMatrix::Entry> entries;
        for (std::size_t i = 0; i < basis_.dim(); ++i) {
            const RotationGraph& g = basis_.graph(i);
            if (g.n_ends() + 6 > max_ends) continue; // targets lie outside the basis
            std::map<std::size_t, std::size_t> row;
            for_each_accepted_move(g, [&](const std::array<std::size_t, 3>&, std::size_t,
                                          const RotationGraph& out) {
                auto j = basis_.index_of(out.canonical_key());
                if (j) ++row[*j];
            });
            for (const auto& [j, count] : row)
                entries.push_back({j, i, Complex{static_cast<double>(count), 0.0}});
        }
        b_ = SparseMatrix(basis_.dim(), std::move(entries));
    }

    const GraphBasisSpace<RotationGraph>& basis() const { return basis_; }

    // Raw move counts: entry (target, source) = number of accepted
    // (edge triple, reconnection) pairs taking source to target.
    const SparseMatrix& b_matrix() const { return b_; }

    SparseHermitianOperator hamiltonian(double lambda) const {
        std::vector<SparseMatrix::Entry> entries;
        for (const auto& e : b_.entries()) {
            const double n = static_cast<double>(basis_.graph(e.col).n_vertices());
            const Complex v = e.value * (lambda / (n * n));
            entries.push_back({e.row, e.col, v});
            entries.push_back({e.col, e.row, std::conj(v)});
        }
        return SparseHermitianOperator(SparseMatrix(basis_.dim(), std::move(entries)));
    }

private:
    GraphBasisSpace<RotationGraph> basis_;
    SparseMatrix b_{0};
};

/// H = (λ/N²)(B + B*) on a truncated basis of rotation-graph classes.
inline SparseHermitianOperator triangulation_hamiltonian(GraphBasisSpace<RotationGraph> basis,
                                                         double lambda) {
    return TriangulationModel(std::move(basis)).hamiltonian(lambda);
}

/**
 * Whether the move counts descend to functions of (N, genus) alone: group
 * the basis by (N, ρ) and compare, within each pair of groups, the summed
 * counts out of every source (and into every target). Constant sums mean
 * the symmetric subspace is invariant.
 */
struct ClassFunctionReport {
    struct Group {
        std::uint32_t n_vertices;
        std::uint32_t genus;
        std::vector<std::size_t> members;
    };
    struct Block {
        std::size_t source_group;
        std::size_t target_group;
        std::vector<std::size_t> forward_sums; // per source member
        std::vector<std::size_t> reverse_sums; // per target member
        bool forward_constant;
        bool reverse_constant;
    };
    std::vector<Group> groups;
    std::vector<Block> blocks;
    bool consistent;
};

inline ClassFunctionReport class_function_report(const TriangulationModel& model) {
    const auto& basis = model.basis();
    ClassFunctionReport rep;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> group_of_pair;
    std::vector<std::size_t> group_of(basis.dim());
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const RotationGraph& g = basis.graph(i);
        std::pair<std::uint32_t, std::uint32_t> tag{g.n_vertices(), rotation_genus(g)};
        auto it = group_of_pair.find(tag);
        if (it == group_of_pair.end()) {
            it = group_of_pair.emplace(tag, rep.groups.size()).first;
            rep.groups.push_back({tag.first, tag.second, {}});
        }
        group_of[i] = it->second;
        rep.groups[it->second].members.push_back(i);
    }

    std::map<std::pair<std::size_t, std::size_t>, std::map<std::size_t, std::size_t>> fwd, rev;
    for (const auto& e : model.b_matrix().entries()) {
        const auto count = static_cast<std::size_t>(e.value.real() + 0.5);
        std::pair<std::size_t, std::size_t> block{group_of[e.col], group_of[e.row]};
        fwd[block][e.col] += count;
        rev[block][e.row] += count;
    }

    rep.consistent = true;
    for (const auto& [block, sums] : fwd) {
        ClassFunctionReport::Block b;
        b.source_group = block.first;
        b.target_group = block.second;
        for (std::size_t i : rep.groups[block.first].members) {
            auto it = sums.find(i);
            b.forward_sums.push_back(it == sums.end() ? 0 : it->second);
        }
        const auto& rsums = rev[block];
        for (std::size_t j : rep.groups[block.second].members) {
            auto it = rsums.find(j);
            b.reverse_sums.push_back(it == rsums.end() ? 0 : it->second);
        }
        b.forward_constant =
            std::adjacent_find(b.forward_sums.begin(), b.forward_sums.end(),
                               std::not_equal_to<>()) == b.forward_sums.end();
        b.reverse_constant =
            std::adjacent_find(b.reverse_sums.begin(), b.reverse_sums.end(),
                               std::not_equal_to<>()) == b.reverse_sums.end();
        if (!b.forward_constant || !b.reverse_constant) rep.consistent = false;
        rep.blocks.push_back(std::move(b));
    }
    return rep;
}

} // namespace qgram

#endif
