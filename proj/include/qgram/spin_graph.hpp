#ifndef QGRAM_SPIN_GRAPH_HPP
#define QGRAM_SPIN_GRAPH_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qgram {

/// Encoding that is equal for two graphs iff they are isomorphic.
/// Starts with the vertex (or edge-end) count, so lexicographic order on
/// keys sorts a basis by size first.
using CanonicalKey = std::vector<std::uint32_t>;

/**
 * Finite undirected multigraph with an integer spin label on every vertex.
 * Vertices are 0..n-1; edges are stored as a sorted multiset of normalized
 * (min,max) pairs. Self-loops are representable; families that forbid them
 * do so at the substitution level, not here.
 */
class SpinGraph {
public:
    using Edge = std::pair<std::uint32_t, std::uint32_t>;

    SpinGraph() = default;

    SpinGraph(std::vector<std::uint32_t> spins, std::vector<Edge> edges)
        : spins_(std::move(spins)), edges_(std::move(edges)) {
        const auto n = static_cast<std::uint32_t>(spins_.size());
        for (auto& e : edges_) {
            if (e.first >= n || e.second >= n)
                throw std::invalid_argument("edge endpoint out of range");
            if (e.first > e.second) std::swap(e.first, e.second);
        }
        std::sort(edges_.begin(), edges_.end());
    }

    std::uint32_t n_vertices() const { return static_cast<std::uint32_t>(spins_.size()); }
    std::size_t n_edges() const { return edges_.size(); }
    std::uint32_t spin(std::uint32_t v) const { return spins_.at(v); }
    const std::vector<std::uint32_t>& spins() const { return spins_; }
    const std::vector<Edge>& edges() const { return edges_; }

    // Endpoint count at v; a self-loop contributes 2.
    std::uint32_t degree(std::uint32_t v) const {
        std::uint32_t d = 0;
        for (const auto& e : edges_) {
            if (e.first == v) ++d;
            if (e.second == v) ++d;
        }
        return d;
    }

    std::uint32_t edge_multiplicity(std::uint32_t u, std::uint32_t v) const {
        Edge e{std::min(u, v), std::max(u, v)};
        auto range = std::equal_range(edges_.begin(), edges_.end(), e);
        return static_cast<std::uint32_t>(range.second - range.first);
    }

    bool is_simple() const {
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            if (edges_[i].first == edges_[i].second) return false;
            if (i > 0 && edges_[i] == edges_[i - 1]) return false;
        }
        return true;
    }

    // Minimal spins-plus-edges encoding over all vertex relabelings.
    // Brute force, so the graph must stay small.
    CanonicalKey canonical_key() const {
        const std::uint32_t n = n_vertices();
        if (n > 10)
            throw std::invalid_argument("canonical form is brute force; at most 10 vertices");
        CanonicalKey best = encode_relabeled(identity_perm(n));
        std::vector<std::uint32_t> perm = identity_perm(n);
        while (std::next_permutation(perm.begin(), perm.end())) {
            CanonicalKey cand = encode_relabeled(perm);
            if (cand < best) best = std::move(cand);
        }
        return best;
    }

    // Number of relabelings that reproduce the graph exactly.
    std::size_t automorphism_count() const {
        const std::uint32_t n = n_vertices();
        if (n > 10)
            throw std::invalid_argument("automorphism scan is brute force; at most 10 vertices");
        const CanonicalKey self = encode_relabeled(identity_perm(n));
        std::size_t count = 1;
        std::vector<std::uint32_t> perm = identity_perm(n);
        while (std::next_permutation(perm.begin(), perm.end()))
            if (encode_relabeled(perm) == self) ++count;
        return count;
    }

private:
    static std::vector<std::uint32_t> identity_perm(std::uint32_t n) {
        std::vector<std::uint32_t> p(n);
        std::iota(p.begin(), p.end(), 0u);
        return p;
    }

    // perm[old] = new id. Encoding: [n, spins in new order, edge count, edges].
    CanonicalKey encode_relabeled(const std::vector<std::uint32_t>& perm) const {
        const std::uint32_t n = n_vertices();
        CanonicalKey key;
        key.reserve(1 + n + 1 + 2 * edges_.size());
        key.push_back(n);
        std::vector<std::uint32_t> spins_new(n);
        for (std::uint32_t v = 0; v < n; ++v) spins_new[perm[v]] = spins_[v];
        key.insert(key.end(), spins_new.begin(), spins_new.end());
        key.push_back(static_cast<std::uint32_t>(edges_.size()));
        std::vector<Edge> mapped(edges_.size());
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            std::uint32_t a = perm[edges_[i].first], b = perm[edges_[i].second];
            mapped[i] = {std::min(a, b), std::max(a, b)};
        }
        std::sort(mapped.begin(), mapped.end());
        for (const auto& e : mapped) {
            key.push_back(e.first);
            key.push_back(e.second);
        }
        return key;
    }

    std::vector<std::uint32_t> spins_;
    std::vector<Edge> edges_;
};

/// Canonical encoding of the isomorphism class: equal iff isomorphic.
inline CanonicalKey canonical_form(const SpinGraph& g) { return g.canonical_key(); }

/// An embedding assigns a distinct host vertex to every pattern vertex.
using GraphEmbedding = std::vector<std::uint32_t>;

/**
 * All injective vertex maps pattern -> host that preserve spins and carry
 * each pattern edge onto host edges of at least the same multiplicity
 * (subgraph embeddings, not induced). The empty pattern embeds exactly once.
 */
inline std::vector<GraphEmbedding> enumerate_embeddings(const SpinGraph& host,
                                                        const SpinGraph& pattern) {
    const std::uint32_t p = pattern.n_vertices();
    const std::uint32_t h = host.n_vertices();
    std::vector<GraphEmbedding> out;
    GraphEmbedding psi(p, 0);
    std::vector<bool> used(h, false);

    auto feasible = [&](std::uint32_t v, std::uint32_t target) {
        if (pattern.spin(v) != host.spin(target)) return false;
        // Check edges towards already-placed vertices, including loops at v.
        if (pattern.edge_multiplicity(v, v) > host.edge_multiplicity(target, target))
            return false;
        for (std::uint32_t u = 0; u < v; ++u) {
            std::uint32_t need = pattern.edge_multiplicity(u, v);
            if (need > 0 && host.edge_multiplicity(psi[u], target) < need) return false;
        }
        return true;
    };

    // Depth-first over pattern vertices in index order; host candidates in
    // increasing order, so the result list is deterministic.
    auto recurse = [&](auto&& self, std::uint32_t v) -> void {
        if (v == p) {
            out.push_back(psi);
            return;
        }
        for (std::uint32_t t = 0; t < h; ++t) {
            if (used[t] || !feasible(v, t)) continue;
            used[t] = true;
            psi[v] = t;
            self(self, v + 1);
            used[t] = false;
        }
    };
    recurse(recurse, 0);
    return out;
}

/**
 * Substitution Sub = (Γ, Γ′, V₀, φ): match Γ in a host graph, keep the
 * matched images of V₀, delete the rest of the match, glue Γ′ along φ.
 * Optional host-degree constraints restrict where Γ may be matched, which
 * is how "delete a vertex of degree one" style rules are expressed.
 */
class GraphSubstitution {
public:
    GraphSubstitution(SpinGraph gamma, SpinGraph gamma_prime,
                      std::vector<std::uint32_t> v0,
                      std::vector<std::uint32_t> phi,
                      std::vector<int> host_degree = {})
        : gamma_(std::move(gamma)), gamma_prime_(std::move(gamma_prime)),
          v0_(std::move(v0)), phi_(std::move(phi)),
          host_degree_(std::move(host_degree)) {
        if (phi_.size() != v0_.size())
            throw std::invalid_argument("phi must be defined exactly on V0");
        std::vector<bool> seen_v0(gamma_.n_vertices(), false);
        std::vector<bool> seen_img(gamma_prime_.n_vertices(), false);
        for (std::size_t i = 0; i < v0_.size(); ++i) {
            if (v0_[i] >= gamma_.n_vertices())
                throw std::invalid_argument("V0 contains an unknown vertex");
            if (phi_[i] >= gamma_prime_.n_vertices())
                throw std::invalid_argument("phi image out of range");
            if (seen_v0[v0_[i]] || seen_img[phi_[i]])
                throw std::invalid_argument("V0 and phi must be injective");
            seen_v0[v0_[i]] = true;
            seen_img[phi_[i]] = true;
            if (gamma_.spin(v0_[i]) != gamma_prime_.spin(phi_[i]))
                throw std::invalid_argument("phi must preserve spins");
        }
        if (!host_degree_.empty() && host_degree_.size() != gamma_.n_vertices())
            throw std::invalid_argument("host degree constraints must cover V(Γ)");
    }

    const SpinGraph& gamma() const { return gamma_; }
    const SpinGraph& gamma_prime() const { return gamma_prime_; }
    const std::vector<std::uint32_t>& v0() const { return v0_; }
    const std::vector<std::uint32_t>& phi() const { return phi_; }

    bool keeps(std::uint32_t gamma_vertex) const {
        return std::find(v0_.begin(), v0_.end(), gamma_vertex) != v0_.end();
    }

    // Embeddings of Γ that also satisfy the per-vertex host-degree
    // constraints (-1 or absent = unconstrained).
    std::vector<GraphEmbedding> applications(const SpinGraph& host) const {
        auto all = enumerate_embeddings(host, gamma_);
        if (host_degree_.empty()) return all;
        std::vector<GraphEmbedding> kept;
        for (const auto& psi : all) {
            bool ok = true;
            for (std::uint32_t v = 0; v < gamma_.n_vertices() && ok; ++v)
                if (host_degree_[v] >= 0 &&
                    host.degree(psi[v]) != static_cast<std::uint32_t>(host_degree_[v]))
                    ok = false;
            if (ok) kept.push_back(psi);
        }
        return kept;
    }

private:
    SpinGraph gamma_;
    SpinGraph gamma_prime_;
    std::vector<std::uint32_t> v0_;
    std::vector<std::uint32_t> phi_;
    std::vector<int> host_degree_;
};

/**
 * Apply a substitution at one embedding. Steps, in order: form the disjoint
 * union with Γ′, delete the embedded copies of Γ's edges (one host copy per
 * pattern edge), delete ψ(V(Γ)∖V₀) with all incident edges, then identify
 * ψ(v) with φ(v) for v in V₀. Surviving host vertices keep their order and
 * spins; fresh Γ′ vertices are appended in Γ′ order.
 */
inline SpinGraph apply_graph_sub(const SpinGraph& host, const GraphSubstitution& sub,
                                 const GraphEmbedding& psi) {
    const SpinGraph& g = sub.gamma();
    const SpinGraph& gp = sub.gamma_prime();
    if (psi.size() != g.n_vertices())
        throw std::invalid_argument("embedding size does not match Γ");
    std::vector<bool> used(host.n_vertices(), false);
    for (std::uint32_t v = 0; v < g.n_vertices(); ++v) {
        if (psi[v] >= host.n_vertices() || used[psi[v]])
            throw std::invalid_argument("embedding is not injective into the host");
        used[psi[v]] = true;
    }

    // Host edge multiset minus the embedded pattern edges.
    std::map<SpinGraph::Edge, std::uint32_t> mult;
    for (const auto& e : host.edges()) ++mult[e];
    for (const auto& e : g.edges()) {
        std::uint32_t a = psi[e.first], b = psi[e.second];
        SpinGraph::Edge img{std::min(a, b), std::max(a, b)};
        auto it = mult.find(img);
        if (it == mult.end() || it->second == 0)
            throw std::invalid_argument("embedding does not carry a pattern edge");
        --it->second;
    }

    // Which host vertices survive.
    std::vector<bool> deleted(host.n_vertices(), false);
    for (std::uint32_t v = 0; v < g.n_vertices(); ++v)
        if (!sub.keeps(v)) deleted[psi[v]] = true;

    const std::uint32_t none = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> new_id(host.n_vertices(), none);
    std::vector<std::uint32_t> spins;
    for (std::uint32_t v = 0; v < host.n_vertices(); ++v) {
        if (deleted[v]) continue;
        new_id[v] = static_cast<std::uint32_t>(spins.size());
        spins.push_back(host.spin(v));
    }

    std::vector<SpinGraph::Edge> edges;
    for (const auto& [e, m] : mult) {
        if (m == 0 || deleted[e.first] || deleted[e.second]) continue;
        for (std::uint32_t k = 0; k < m; ++k)
            edges.emplace_back(new_id[e.first], new_id[e.second]);
    }

    // Positions of Γ′ vertices in the result: glued ones sit at ψ(v), the
    // rest are appended.
    std::vector<std::uint32_t> gp_pos(gp.n_vertices(), none);
    const auto& v0 = sub.v0();
    const auto& phi = sub.phi();
    for (std::size_t i = 0; i < v0.size(); ++i) gp_pos[phi[i]] = new_id[psi[v0[i]]];
    for (std::uint32_t v = 0; v < gp.n_vertices(); ++v) {
        if (gp_pos[v] != none) continue;
        gp_pos[v] = static_cast<std::uint32_t>(spins.size());
        spins.push_back(gp.spin(v));
    }
    for (const auto& e : gp.edges())
        edges.emplace_back(gp_pos[e.first], gp_pos[e.second]);

    return SpinGraph(std::move(spins), std::move(edges));
}

/**
 * Ordered list of pairwise non-isomorphic graphs, sorted by vertex count
 * then canonical encoding. Lookup is by canonical key.
 */
template <class G>
class GraphBasisSpace {
public:
    explicit GraphBasisSpace(std::map<CanonicalKey, G> classes) {
        graphs_.reserve(classes.size());
        for (auto& [key, g] : classes) {
            index_.emplace(key, graphs_.size());
            graphs_.push_back(std::move(g));
        }
    }

    std::size_t dim() const { return graphs_.size(); }
    const G& graph(std::size_t i) const { return graphs_.at(i); }

    std::optional<std::size_t> index_of(const CanonicalKey& key) const {
        auto it = index_.find(key);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::vector<G> graphs_;
    std::map<CanonicalKey, std::size_t> index_;
};

} // namespace qgram

#endif
