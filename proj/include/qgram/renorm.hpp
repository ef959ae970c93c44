#ifndef QGRAM_RENORM_HPP
#define QGRAM_RENORM_HPP

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgram/hamiltonian.hpp"
#include "qgram/thermal.hpp"

namespace qgram {

/**
 * A local spin observable on a centered chain: sites are labeled by integers
 * with 0 in the middle, and the matrix acts on `span` consecutive sites
 * starting at first_site, tensor-indexed with the leftmost site most
 * significant. Site s of a length-(2n+1) word is word position s+n.
 */
struct SpinObservable {
    int first_site = 0;
    std::size_t span = 1;
    Eigen::MatrixXcd mat;
};

/// Identity-padded dense matrix of the observable on (C^r)^{2n+1}, whose
/// tensor index equals the in-sector rank of the length-(2n+1) word.
inline Eigen::MatrixXcd sector_observable(const Alphabet& alphabet, std::size_t n,
                                          const SpinObservable& obs) {
    const std::size_t r = alphabet.size();
    const std::size_t chain = 2 * n + 1;
    const int left = obs.first_site + static_cast<int>(n);
    if (left < 0 || static_cast<std::size_t>(left) + obs.span > chain)
        throw std::invalid_argument("observable does not fit the centered chain");
    std::size_t codes = 1;
    for (std::size_t i = 0; i < obs.span; ++i) codes *= r;
    if (static_cast<std::size_t>(obs.mat.rows()) != codes
        || static_cast<std::size_t>(obs.mat.cols()) != codes)
        throw std::invalid_argument("observable matrix must be r^span square");

    std::size_t dim = 1;
    for (std::size_t i = 0; i < chain; ++i) dim *= r;
    std::size_t right_codes = 1; // sites to the right of the window
    for (std::size_t i = static_cast<std::size_t>(left) + obs.span; i < chain; ++i)
        right_codes *= r;

    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim),
                                                  static_cast<Eigen::Index>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        const std::size_t rest = col % right_codes;
        const std::size_t mid = (col / right_codes) % codes;
        const std::size_t head = col / (right_codes * codes);
        for (std::size_t mid2 = 0; mid2 < codes; ++mid2) {
            const Complex v = obs.mat(static_cast<Eigen::Index>(mid2),
                                      static_cast<Eigen::Index>(mid));
            if (v == Complex{}) continue;
            const std::size_t row = (head * codes + mid2) * right_codes + rest;
            out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v;
        }
    }
    return out;
}

/**
 * The bijection between the length-(2n+1) sector of a cut-off word space and
 * tensor multi-indices over (C^r)^{2n+1}, leftmost site most significant.
 */
struct SectorIdentification {
    std::size_t offset = 0;              // space index of the first sector word
    std::vector<std::size_t> to_tensor;  // sector-local rank -> tensor index
    std::vector<std::size_t> to_sector;  // tensor index -> sector-local rank
};

inline SectorIdentification sector_identify(std::size_t n, const TruncatedWordSpace& space) {
    const std::size_t chain = 2 * n + 1;
    const auto [lo, hi] = space.sector_range(chain);
    const std::size_t r = space.alphabet().size();
    SectorIdentification id;
    id.offset = lo;
    id.to_tensor.resize(hi - lo);
    id.to_sector.resize(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) {
        const Word w = space.word_at(i);
        std::size_t tensor = 0;
        for (auto s : w) tensor = tensor * r + s;
        id.to_tensor[i - lo] = tensor;
        id.to_sector[tensor] = i - lo;
    }
    return id;
}

/// The observable lifted to the whole cut-off space: it acts as the
/// identity-padded matrix on the length-(2n+1) sector and as zero elsewhere.
inline SparseMatrix embed_spin_observable(const SpinObservable& obs, std::size_t n,
                                          const TruncatedWordSpace& space) {
    const Eigen::MatrixXcd block = sector_observable(space.alphabet(), n, obs);
    const SectorIdentification id = sector_identify(n, space);
    std::vector<SparseMatrix::Entry> entries;
    for (Eigen::Index c = 0; c < block.cols(); ++c)
        for (Eigen::Index rr = 0; rr < block.rows(); ++rr) {
            const Complex v = block(rr, c);
            if (v == Complex{}) continue;
            entries.push_back({id.offset + id.to_sector[static_cast<std::size_t>(rr)],
                               id.offset + id.to_sector[static_cast<std::size_t>(c)], v});
        }
    return SparseMatrix(space.dim(), std::move(entries));
}

/** One renormalized-state evaluation with its trace bookkeeping. */
struct RenormalizedValue {
    double value = 0.0;
    double numerator = 0.0;   // Tr_sector(A e^{-beta H})
    double denominator = 0.0; // Tr_sector(e^{-beta H})
    std::size_t chain = 0;    // 2n+1
    std::size_t outer_cutoff = 0;
    std::string method;
};

/**
 * The state induced on the middle length-(2n+1) sector by the Gibbs weight
 * of the full cut-off Hamiltonian at a larger cutoff:
 * value = Tr_sec(A e^{-beta H}) / Tr_sec(e^{-beta H}). Only sector columns
 * of the Gibbs kernel are needed: dense spectra supply them directly, and a
 * per-column Krylov propagator takes over on large spaces.
 */
inline RenormalizedValue renormalized_state(const RuleSet& rules, double beta,
                                            std::size_t n, const SpinObservable& obs,
                                            std::size_t outer_cutoff,
                                            const ThermalOptions& opt = {}) {
    const std::size_t chain = 2 * n + 1;
    if (outer_cutoff < chain)
        throw std::invalid_argument("outer cutoff smaller than the chain sector");
    TruncatedWordSpace space(rules.alphabet(), outer_cutoff);
    const SparseHermitianOperator h = build_hamiltonian(space, rules);
    const auto [lo, hi] = space.sector_range(chain);
    const std::size_t sec = hi - lo;
    const Eigen::MatrixXcd a = sector_observable(rules.alphabet(), n, obs);

    RenormalizedValue out;
    out.chain = chain;
    out.outer_cutoff = outer_cutoff;

    Eigen::MatrixXcd gibbs_sec(static_cast<Eigen::Index>(sec),
                               static_cast<Eigen::Index>(sec));
    if (space.dim() <= opt.dense_cutoff) {
        // Half-weighted sector rows of the eigenbasis give the sector block
        // of e^{-beta H} as B B^H.
        const EighResult es = eigh(h.matrix());
        Eigen::MatrixXcd b = es.vectors.block(static_cast<Eigen::Index>(lo), 0,
                                              static_cast<Eigen::Index>(sec),
                                              static_cast<Eigen::Index>(space.dim()));
        for (Eigen::Index k = 0; k < b.cols(); ++k)
            b.col(k) *= std::exp(-0.5 * beta * es.values(k));
        gibbs_sec = b * b.adjoint();
        out.method = "dense";
    } else {
        for (std::size_t j = 0; j < sec; ++j) {
            std::vector<Complex> v(space.dim(), Complex{});
            v[lo + j] = Complex{1.0, 0.0};
            const std::vector<Complex> g =
                apply_exponential(h, v, Complex{-beta, 0.0}, opt.tol, opt.dense_cutoff);
            for (std::size_t i = 0; i < sec; ++i)
                gibbs_sec(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    g[lo + i];
        }
        out.method = "krylov-columns";
    }

    out.numerator = (a * gibbs_sec).trace().real();
    out.denominator = gibbs_sec.trace().real();
    if (out.denominator <= 0.0)
        throw std::runtime_error("sector Gibbs trace is not positive");
    out.value = out.numerator / out.denominator;
    return out;
}

/**
 * Independent small-space route: restrict H to the length-(2n+1) sector
 * alone, exponentiate densely, and take the sector Gibbs average. For
 * length-conserving rule sets the sector is exactly invariant, so this must
 * agree with renormalized_state at any outer cutoff.
 */
inline RenormalizedValue sector_gibbs_expectation(const RuleSet& rules, double beta,
                                                  std::size_t n, const SpinObservable& obs) {
    const std::size_t chain = 2 * n + 1;
    TruncatedWordSpace space(rules.alphabet(), chain);
    const SparseHermitianOperator h = build_hamiltonian(space, rules);
    const auto [lo, hi] = space.sector_range(chain);
    const std::size_t sec = hi - lo;

    Eigen::MatrixXcd hsec = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(sec),
                                                   static_cast<Eigen::Index>(sec));
    for (const auto& e : h.matrix().entries())
        if (e.row >= lo && e.row < hi && e.col >= lo && e.col < hi)
            hsec(static_cast<Eigen::Index>(e.row - lo),
                 static_cast<Eigen::Index>(e.col - lo)) = e.value;

    Eigen::VectorXd evals;
    Eigen::MatrixXcd evecs;
    eigh_complex(hsec, evals, evecs);
    Eigen::VectorXd w(evals.size());
    for (Eigen::Index k = 0; k < evals.size(); ++k) w(k) = std::exp(-beta * evals(k));
    const Eigen::MatrixXcd gibbs = evecs * w.asDiagonal() * evecs.adjoint();

    RenormalizedValue out;
    out.chain = chain;
    out.outer_cutoff = chain;
    out.method = "sector-dense";
    const Eigen::MatrixXcd a = sector_observable(rules.alphabet(), n, obs);
    out.numerator = (a * gibbs).trace().real();
    out.denominator = gibbs.trace().real();
    out.value = out.numerator / out.denominator;
    return out;
}

/** Renormalized values over growing half-width n, with successive gaps. */
struct RenormSequence {
    std::vector<std::size_t> ns;
    std::vector<std::size_t> outer_cutoffs;
    std::vector<double> values;
    std::vector<double> gaps; // |v_{n+1} - v_n|
};

inline RenormSequence renorm_convergence(const RuleSet& rules, double beta,
                                         const SpinObservable& obs, std::size_t n_min,
                                         std::size_t n_max, std::size_t pad_steps = 4,
                                         const ThermalOptions& opt = {}) {
    RenormSequence seq;
    for (std::size_t n = n_min; n <= n_max; ++n) {
        const std::size_t outer = 2 * n + 1 + rules.growth_bound() * pad_steps;
        const RenormalizedValue v = renormalized_state(rules, beta, n, obs, outer, opt);
        seq.ns.push_back(n);
        seq.outer_cutoffs.push_back(outer);
        seq.values.push_back(v.value);
    }
    for (std::size_t i = 0; i + 1 < seq.values.size(); ++i)
        seq.gaps.push_back(std::abs(seq.values[i + 1] - seq.values[i]));
    return seq;
}

} // namespace qgram

#endif
