// Scans the length-weight coefficient mu for the free length Hamiltonian over
// a two-letter alphabet at beta = 1 and brackets the growth transition, which
// sits at mu = ln 2 where the geometric factor 2 e^{-mu} crosses one.

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "qgram/qgram.hpp"

using namespace qgram;

int main(int argc, char** argv) {
    const double mu_min = argc > 1 ? std::atof(argv[1]) : 0.40;
    const double mu_max = argc > 2 ? std::atof(argv[2]) : 1.00;
    const double mu_step = argc > 3 ? std::atof(argv[3]) : 0.05;

    Alphabet alphabet({"1", "2"});
    // Hermitian-closed pair with amplitude zero: only the length term is
    // left, so Z has a closed form per cutoff and large cutoffs are cheap.
    RuleSet rules(alphabet, {
        {alphabet.parse("1"), alphabet.parse("11"), Complex{0.0, 0.0}},
        {alphabet.parse("11"), alphabet.parse("1"), Complex{0.0, 0.0}},
    });

    const auto scan = critical_mu_scan(alphabet, rules, 64, 2000, 1.0, mu_min, mu_max, mu_step);
    std::printf("mu scan, beta = 1, two letters, lambda = 0:\n");
    for (std::size_t i = 0; i < scan.mus.size(); ++i)
        std::printf("  mu = %.4f  %s\n", scan.mus[i], to_string(scan.verdicts[i]));
    if (scan.bracketed)
        std::printf("transition bracketed in [%.4f, %.4f]; exact value ln 2 = %.6f\n",
                    scan.mu_lo, scan.mu_hi, std::log(2.0));
    else
        std::printf("no transition found in [%.4f, %.4f]\n", mu_min, mu_max);
    return 0;
}
