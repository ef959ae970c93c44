#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "qgram/rotation.hpp"
#include "qgram/sparse.hpp"

using namespace qgram;

namespace {

// Conjugate both permutations by sigma: the same graph with relabeled ends.
RotationGraph conjugated(const RotationGraph& g, const std::vector<std::uint32_t>& sigma) {
    const std::uint32_t m = g.n_ends();
    std::vector<std::uint32_t> p(m), i(m);
    for (std::uint32_t x = 0; x < m; ++x) {
        p[sigma[x]] = sigma[g.p(x)];
        i[sigma[x]] = sigma[g.i(x)];
    }
    return RotationGraph(std::move(p), std::move(i));
}

std::map<std::pair<std::size_t, std::size_t>, Complex> entry_map(const SparseMatrix& m) {
    std::map<std::pair<std::size_t, std::size_t>, Complex> out;
    for (const auto& e : m.entries()) out[{e.row, e.col}] = e.value;
    return out;
}

} // namespace

TEST_CASE("rotation graph construction enforces the permutation contract",
          "[rotation]") {
    REQUIRE_THROWS_AS(RotationGraph({}, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(RotationGraph({1, 2, 0}, {1, 0, 2}), std::invalid_argument);
    // P with a fixed point, a 2-cycle, or an out-of-range value.
    REQUIRE_THROWS_AS(RotationGraph({0, 2, 1, 4, 5, 3}, {3, 5, 4, 0, 2, 1}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(RotationGraph({1, 0, 3, 2, 5, 4}, {3, 5, 4, 0, 2, 1}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(RotationGraph({1, 2, 9, 4, 5, 3}, {3, 5, 4, 0, 2, 1}),
                      std::invalid_argument);
    // I with a fixed point or not an involution.
    REQUIRE_THROWS_AS(RotationGraph({1, 2, 0, 4, 5, 3}, {0, 5, 4, 3, 2, 1}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(RotationGraph({1, 2, 0, 4, 5, 3}, {3, 5, 0, 4, 2, 1}),
                      std::invalid_argument);
    // Two disjoint theta graphs: every permutation valid, but disconnected.
    REQUIRE_THROWS_AS(RotationGraph({1, 2, 0, 4, 5, 3, 7, 8, 6, 10, 11, 9},
                                    {3, 4, 5, 0, 1, 2, 9, 10, 11, 6, 7, 8}),
                      std::invalid_argument);
}

TEST_CASE("face counting resolves the two reference surfaces", "[rotation]") {
    RotationGraph sphere = rotation_sphere();
    REQUIRE(sphere.n_vertices() == 2);
    REQUIRE(sphere.n_edges() == 3);
    REQUIRE(sphere.faces() == 3);
    REQUIRE(rotation_genus(sphere) == 0);

    RotationGraph torus = rotation_torus();
    REQUIRE(torus.n_vertices() == 2);
    REQUIRE(torus.n_edges() == 3);
    REQUIRE(torus.faces() == 1);
    REQUIRE(rotation_genus(torus) == 1);

    REQUIRE(sphere.canonical_key() != torus.canonical_key());

    // Both reference graphs are end-transitive, acting freely on 6 ends.
    REQUIRE(sphere.automorphism_count() == 6);
    REQUIRE(torus.automorphism_count() == 6);

    // Edge list pairs each end with its involution partner.
    auto edges = sphere.edges();
    REQUIRE(edges.size() == 3);
    for (const auto& [a, b] : edges) REQUIRE(sphere.i(a) == b);
}

TEST_CASE("genus and canonical data are invariant under end relabeling",
          "[rotation]") {
    std::mt19937_64 rng(77);
    for (const RotationGraph& g : {rotation_sphere(), rotation_torus()}) {
        for (int trial = 0; trial < 8; ++trial) {
            std::vector<std::uint32_t> sigma(g.n_ends());
            std::iota(sigma.begin(), sigma.end(), 0u);
            std::shuffle(sigma.begin(), sigma.end(), rng);
            RotationGraph h = conjugated(g, sigma);
            REQUIRE(rotation_genus(h) == rotation_genus(g));
            REQUIRE(h.canonical_key() == g.canonical_key());
            REQUIRE(h.automorphism_count() == g.automorphism_count());
        }
    }
}

TEST_CASE("matching enumeration is exhaustive and deterministic", "[rotation]") {
    auto three = perfect_matchings({0, 1, 2, 3});
    REQUIRE(three.size() == 3);
    REQUIRE(three[0] == Reconnection{{0, 1}, {2, 3}});
    REQUIRE(three[1] == Reconnection{{0, 2}, {1, 3}});
    REQUIRE(three[2] == Reconnection{{0, 3}, {1, 2}});

    // Twelve ends admit 11!! pairings.
    auto ends = move_free_ends(rotation_sphere(), {0, 1, 2});
    REQUIRE(ends.size() == 12);
    REQUIRE(perfect_matchings(ends).size() == 10395);
}

TEST_CASE("grow moves preserve the rotation invariants and add two vertices",
          "[rotation]") {
    RotationGraph sphere = rotation_sphere();
    std::size_t total = 0, accepted = 0;
    std::map<std::uint32_t, std::size_t> genus_histogram;
    auto matchings = perfect_matchings(move_free_ends(sphere, {0, 1, 2}));
    for (const auto& pi : matchings) {
        ++total;
        auto out = triangulation_move(sphere, {0, 1, 2}, pi);
        if (!out) continue;
        ++accepted;
        // The constructor revalidates P, I, and connectivity; check the counts.
        REQUIRE(out->n_vertices() == 4);
        REQUIRE(out->n_edges() == 6);
        ++genus_histogram[rotation_genus(*out)];
    }
    REQUIRE(total == 10395);
    REQUIRE(accepted == 9720);
    REQUIRE(genus_histogram
            == std::map<std::uint32_t, std::size_t>{{0, 5184}, {1, 4536}});
}

TEST_CASE("move guards reject malformed cut data", "[rotation]") {
    RotationGraph sphere = rotation_sphere();
    Reconnection ok{{0, 6}, {1, 7}, {2, 8}, {3, 9}, {4, 10}, {5, 11}};
    REQUIRE_THROWS_AS(triangulation_move(sphere, {0, 0, 2}, ok), std::invalid_argument);
    REQUIRE_THROWS_AS(triangulation_move(sphere, {0, 1, 9}, ok), std::invalid_argument);
    REQUIRE_THROWS_AS(triangulation_move(sphere, {0, 1, 2}, Reconnection{{0, 6}}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(
        triangulation_move(sphere, {0, 1, 2},
                           Reconnection{{0, 13}, {1, 7}, {2, 8}, {3, 9}, {4, 10}, {5, 11}}),
        std::invalid_argument);
    REQUIRE_THROWS_AS(
        triangulation_move(sphere, {0, 1, 2},
                           Reconnection{{0, 6}, {0, 7}, {2, 8}, {3, 9}, {4, 10}, {5, 11}}),
        std::invalid_argument);
    // A fixed point is a rejection, not an error.
    REQUIRE_FALSE(triangulation_move(sphere, {0, 1, 2},
                                     Reconnection{{0, 0}, {1, 7}, {2, 8}, {3, 9}, {4, 10},
                                                  {5, 11}})
                      .has_value());
}

TEST_CASE("deleting the two fresh vertices undoes every accepted move",
          "[rotation]") {
    RotationGraph sphere = rotation_sphere();
    const CanonicalKey sphere_key = sphere.canonical_key();
    std::size_t undone = 0;
    for_each_accepted_move(sphere, [&](const std::array<std::size_t, 3>&, std::size_t,
                                       const RotationGraph& grown) {
        // The fresh vertices are the appended 3-cycles seeded at ends 6 and 9.
        std::vector<std::size_t> cut;
        auto edges = grown.edges();
        for (std::size_t idx = 0; idx < edges.size(); ++idx)
            if (edges[idx].first < 6 && edges[idx].second < 6) cut.push_back(idx);
        auto restored =
            remove_two_vertices(grown, 6, 9, cut, {{0, 3}, {1, 5}, {2, 4}});
        REQUIRE(restored.has_value());
        REQUIRE(restored->canonical_key() == sphere_key);
        ++undone;
    });
    REQUIRE(undone == 9720);
}

TEST_CASE("the shrink audit move validates its rewiring data", "[rotation]") {
    RotationGraph sphere = rotation_sphere();
    // Too small: removing two vertices would leave nothing.
    REQUIRE_FALSE(remove_two_vertices(sphere, 0, 3, {}, {}).has_value());

    auto grown = triangulation_move(
        sphere, {0, 1, 2}, Reconnection{{0, 6}, {1, 7}, {2, 8}, {3, 9}, {4, 10}, {5, 11}});
    REQUIRE(grown.has_value());
    REQUIRE_THROWS_AS(remove_two_vertices(*grown, 99, 9, {}, {}), std::invalid_argument);
    // Incomplete rewiring leaves dangling ends.
    REQUIRE_THROWS_AS(remove_two_vertices(*grown, 6, 9, {}, {{0, 3}}),
                      std::invalid_argument);
    // Pairing an end that is not dangling.
    REQUIRE_THROWS_AS(
        remove_two_vertices(*grown, 6, 9, {}, {{0, 3}, {1, 5}, {2, 4}, {0, 1}}),
        std::invalid_argument);

    auto restored = remove_two_vertices(*grown, 6, 9, {}, {{0, 3}, {1, 5}, {2, 4}});
    REQUIRE(restored.has_value());
    REQUIRE(restored->canonical_key() == sphere.canonical_key());
}

TEST_CASE("the move closure up to four vertices has twelve classes", "[rotation]") {
    REQUIRE_THROWS_AS(build_rotation_basis(0), std::invalid_argument);
    REQUIRE_THROWS_AS(build_rotation_basis(3), std::invalid_argument);
    REQUIRE(build_rotation_basis(2).dim() == 1);

    GraphBasisSpace<RotationGraph> basis = build_rotation_basis(4);
    REQUIRE(basis.dim() == 12);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> census;
    std::set<CanonicalKey> keys;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
        const RotationGraph& g = basis.graph(i);
        ++census[{g.n_vertices(), rotation_genus(g)}];
        REQUIRE(keys.insert(g.canonical_key()).second);
        REQUIRE(g.faces() >= 1);
    }
    REQUIRE(census
            == std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t>{
                   {{2, 0}, 1}, {{4, 0}, 6}, {{4, 1}, 5}});
}

TEST_CASE("move counts from the sphere split by target class as frozen",
          "[rotation]") {
    TriangulationModel model(build_rotation_basis(4));
    const auto& basis = model.basis();
    auto sphere_idx = basis.index_of(rotation_sphere().canonical_key());
    REQUIRE(sphere_idx.has_value());

    // Only the sphere has in-basis targets, so B holds exactly one column.
    const SparseMatrix& b = model.b_matrix();
    REQUIRE(b.nnz() == 11);
    std::vector<std::size_t> genus0, genus1;
    std::size_t column_total = 0;
    for (const auto& e : b.entries()) {
        REQUIRE(e.col == *sphere_idx);
        REQUIRE(e.value.imag() == 0.0);
        auto count = static_cast<std::size_t>(e.value.real());
        column_total += count;
        const RotationGraph& target = basis.graph(e.row);
        REQUIRE(target.n_vertices() == 4);
        (rotation_genus(target) == 0 ? genus0 : genus1).push_back(count);

        // Orbit counting: moves into a class scale inversely with its symmetry.
        REQUIRE(count * target.automorphism_count() == 1944);
    }
    REQUIRE(column_total == 9720);
    std::sort(genus0.begin(), genus0.end());
    std::sort(genus1.begin(), genus1.end());
    REQUIRE(genus0 == std::vector<std::size_t>{162, 486, 648, 972, 972, 1944});
    REQUIRE(genus1 == std::vector<std::size_t>{486, 486, 648, 972, 1944});
}

TEST_CASE("triangulation Hamiltonian pairs the move operator with its adjoint",
          "[rotation]") {
    GraphBasisSpace<RotationGraph> basis = build_rotation_basis(4);
    TriangulationModel model(basis);
    SparseHermitianOperator h = model.hamiltonian(0.6);
    REQUIRE(h.dim() == 12);
    REQUIRE(h.matrix().is_hermitian());
    REQUIRE(h.is_real());

    // Same assembly through the convenience entry point.
    SparseHermitianOperator direct = triangulation_hamiltonian(basis, 0.6);
    REQUIRE(entry_map(direct.matrix()) == entry_map(h.matrix()));

    // Every matrix element is a move count scaled by lambda over N squared.
    SparseMatrix b_scaled(h.dim());
    {
        std::vector<SparseMatrix::Entry> entries;
        for (const auto& e : model.b_matrix().entries()) {
            double n = static_cast<double>(basis.graph(e.col).n_vertices());
            entries.push_back({e.row, e.col, e.value * (0.6 / (n * n))});
        }
        b_scaled = SparseMatrix(h.dim(), std::move(entries));
    }
    REQUIRE(entry_map(b_scaled.plus(b_scaled.adjoint())) == entry_map(h.matrix()));
}

TEST_CASE("move counts do not descend to functions of size and genus",
          "[rotation]") {
    TriangulationModel model(build_rotation_basis(4));
    ClassFunctionReport rep = class_function_report(model);

    REQUIRE(rep.groups.size() == 3);
    REQUIRE(rep.blocks.size() == 2);
    for (const auto& block : rep.blocks) {
        // One source class per block, so the outgoing sums are trivially flat.
        REQUIRE(rep.groups[block.source_group].n_vertices == 2);
        REQUIRE(block.forward_sums.size() == 1);
        REQUIRE(block.forward_constant);
        // Incoming sums differ between same-size same-genus targets.
        REQUIRE_FALSE(block.reverse_constant);
        std::size_t fwd_total = std::accumulate(block.forward_sums.begin(),
                                                block.forward_sums.end(), std::size_t{0});
        std::size_t rev_total = std::accumulate(block.reverse_sums.begin(),
                                                block.reverse_sums.end(), std::size_t{0});
        REQUIRE(fwd_total == rev_total);
        REQUIRE(fwd_total == (rep.groups[block.target_group].genus == 0 ? 5184 : 4536));
    }
    REQUIRE_FALSE(rep.consistent);
}
