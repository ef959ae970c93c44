// Surveys the triangulation dynamics: genus histogram of all accepted moves
// from the two-triangle sphere, the reachable basis, and the test of whether
// move counts descend to functions of (N, genus) alone.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <map>

#include "qgram/qgram.hpp"

using namespace qgram;

int main(int argc, char** argv) {
    const std::uint32_t n_max = argc > 1 ? static_cast<std::uint32_t>(std::atol(argv[1])) : 4;

    std::printf("moves from the N=2 sphere:\n");
    std::map<std::uint32_t, std::size_t> histogram;
    std::size_t accepted = 0;
    for_each_accepted_move(rotation_sphere(),
                           [&](const std::array<std::size_t, 3>&, std::size_t,
                               const RotationGraph& out) {
                               ++histogram[rotation_genus(out)];
                               ++accepted;
                           });
    for (const auto& [genus, count] : histogram)
        std::printf("  genus %u: %zu moves\n", genus, count);
    std::printf("  accepted total: %zu\n\n", accepted);

    std::printf("building the reachable basis up to N = %u ...\n", n_max);
    TriangulationModel model(build_rotation_basis(n_max));
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> classes;
    for (std::size_t i = 0; i < model.basis().dim(); ++i) {
        const auto& g = model.basis().graph(i);
        ++classes[{g.n_vertices(), rotation_genus(g)}];
    }
    std::printf("%zu classes:\n", model.basis().dim());
    for (const auto& [tag, count] : classes)
        std::printf("  N=%u genus=%u: %zu\n", tag.first, tag.second, count);

    const auto rep = class_function_report(model);
    std::printf("\n(N, genus) class-function test: %s\n",
                rep.consistent ? "row sums constant within every class"
                               : "row sums differ inside some class");
    for (const auto& b : rep.blocks) {
        const auto& gs = rep.groups[b.source_group];
        const auto& gt = rep.groups[b.target_group];
        std::printf("  (N=%u,g=%u) -> (N=%u,g=%u): forward", gs.n_vertices, gs.genus,
                    gt.n_vertices, gt.genus);
        for (auto s : b.forward_sums) std::printf(" %zu", s);
        std::printf("%s, reverse", b.forward_constant ? " (constant)" : " (VARIES)");
        for (auto s : b.reverse_sums) std::printf(" %zu", s);
        std::printf("%s\n", b.reverse_constant ? " (constant)" : " (VARIES)");
    }

    const auto h = model.hamiltonian(1.0);
    std::printf("\nHamiltonian on %zu classes: hermitian %s, %zu nonzeros\n",
                model.basis().dim(), h.matrix().is_hermitian() ? "yes" : "no",
                h.matrix().nnz());
    return 0;
}
