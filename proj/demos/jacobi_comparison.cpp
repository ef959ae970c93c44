// Compares the one-particle tridiagonal matrix read off the single-symbol
// grammar directly against the printed closed form, and shows that the two
// agree once the row index is shifted by one.

#include <cstdio>
#include <cstdlib>

#include "qgram/qgram.hpp"

int main(int argc, char** argv) {
    const double lambda = argc > 1 ? std::atof(argv[1]) : 1.0;
    const std::size_t size = argc > 2 ? static_cast<std::size_t>(std::atol(argv[2])) : 8;

    const auto cmp = qgram::one_particle_compare(lambda, size);

    std::printf("one-particle sector, lambda = %g, %zu levels\n\n", lambda, size);
    std::printf("%4s  %14s  %14s\n", "n", "direct", "printed");
    for (std::size_t n = 0; n < cmp.direct_couplings.size(); ++n)
        std::printf("%4zu  %14.10f  %14.10f\n", n + 1, cmp.direct_couplings[n],
                    n + 1 < cmp.printed_couplings.size() ? cmp.printed_couplings[n + 1] : 0.0);

    std::printf("\nsymmetric: %s, zero diagonal: %s, coupling = lambda*multiplicity: %s\n",
                cmp.symmetric ? "yes" : "no", cmp.diagonals_zero ? "yes" : "no",
                cmp.multiplicity_law ? "yes" : "no");
    std::printf("equal as printed: %s, equal after one-step shift: %s\n",
                cmp.equal_as_printed ? "yes" : "no", cmp.equal_after_shift ? "yes" : "no");
    std::printf("\n%s\n", cmp.note.c_str());

    std::printf("\nlow spectrum (direct | printed):\n");
    const std::size_t show = std::min<std::size_t>(6, cmp.spectrum_direct.size());
    for (std::size_t k = 0; k < show; ++k)
        std::printf("  %14.10f | %14.10f\n", cmp.spectrum_direct[k],
                    k < cmp.spectrum_printed.size() ? cmp.spectrum_printed[k] : 0.0);
    return 0;
}
