#ifndef QGRAM_EVOLUTION_HPP
#define QGRAM_EVOLUTION_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qgram/hamiltonian.hpp"
#include "qgram/linalg.hpp"
#include "qgram/sparse.hpp"

namespace qgram {

/**
 * Radius of guaranteed convergence for the power series of e^{itH} applied
 * to a basis word: t0 = 1 / (k * C1 * lambda_max) with k the number of rules
 * and C1 the (clamped) growth bound. Infinite when all amplitudes vanish.
 */
inline double analytic_radius(const RuleSet& rules) {
    const double lam = rules.lambda_max();
    if (lam == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (static_cast<double>(rules.size())
                  * static_cast<double>(rules.growth_bound()) * lam);
}

/**
 * Upper bound on the number of nonzero terms in H^n applied to a word of the
 * given length: k^n * prod_{j=1..n} (len + C1 * j). Saturates at 1e300 so
 * callers can compare against budgets without overflow.
 */
inline double term_count_bound(std::size_t word_length, const RuleSet& rules,
                               std::size_t order) {
    const double k = static_cast<double>(rules.size());
    const double c1 = static_cast<double>(rules.growth_bound());
    double bound = 1.0;
    for (std::size_t j = 1; j <= order; ++j) {
        bound *= k * (static_cast<double>(word_length) + c1 * static_cast<double>(j));
        if (bound > 1e300) return 1e300;
    }
    return bound;
}

/** Exhaustive term count of H^n e_alpha next to its analytic bound. */
struct TermCountCheck {
    std::size_t actual = 0; // application sequences with nonzero amplitude
    double bound = 0.0;     // k^n * prod_{j<=n} (|alpha| + C1 j)
};

namespace detail {

inline void count_sequences(const Word& w, const RuleSet& rules, std::size_t depth,
                            std::size_t& count, std::size_t guard) {
    if (depth == 0) {
        if (++count > guard)
            throw std::runtime_error("term count enumeration exceeds the sequence guard");
        return;
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
        const auto& rule = rules.rule(i);
        if (rule.amplitude == Complex{}) continue;
        for (std::size_t j = 1; j + rule.lhs.size() - 1 <= w.size(); ++j) {
            auto next = apply_rule(w, rule, j);
            if (next) count_sequences(*next, rules, depth - 1, count, guard);
        }
    }
}

} // namespace detail

/// Counts the nonzero sequences V_{a_n}...V_{a_1} e_alpha by exhaustive
/// expansion and pairs the count with its bound. Aborts above the guard.
inline TermCountCheck term_count_check(const RuleSet& rules, const Word& alpha,
                                       std::size_t n,
                                       std::size_t guard = 10000000) {
    TermCountCheck out;
    out.bound = term_count_bound(alpha.size(), rules, n);
    detail::count_sequences(alpha, rules, n, out.actual, guard);
    return out;
}

namespace detail {

/// One Krylov step: w = V exp(c T) e_1 * |v|, with an a posteriori error term.
struct KrylovResult {
    std::vector<Complex> w;
    double error = 0.0;
    bool breakdown = false; // invariant subspace found, result exact
};

inline KrylovResult krylov_exp(const SparseMatrix& h, const std::vector<Complex>& v,
                               Complex c, std::size_t m_max) {
    const std::size_t d = h.dim();
    KrylovResult out;
    const double vnorm = vec_norm(v);
    if (vnorm == 0.0) {
        out.w.assign(d, Complex{});
        out.breakdown = true;
        return out;
    }

    std::vector<std::vector<Complex>> basis;
    std::vector<double> alpha, beta; // T is real symmetric for Hermitian h
    basis.emplace_back(v);
    for (auto& x : basis[0]) x /= vnorm;

    const std::size_t m_cap = std::min<std::size_t>(m_max, d);
    double beta_last = 0.0;
    for (std::size_t j = 0; j < m_cap; ++j) {
        std::vector<Complex> w = h.apply(basis[j]);
        const double a = vec_dot(basis[j], w).real();
        alpha.push_back(a);
        for (std::size_t i = 0; i < basis[j].size(); ++i) w[i] -= a * basis[j][i];
        if (j > 0)
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= beta[j - 1] * basis[j - 1][i];
        // Full reorthogonalization keeps the basis numerically orthonormal.
        for (const auto& q : basis) {
            const Complex overlap = vec_dot(q, w);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= overlap * q[i];
        }
        const double b = vec_norm(w);
        if (b < 1e-14 * vnorm || j + 1 == m_cap) {
            beta_last = b;
            if (b < 1e-14 * vnorm) out.breakdown = true;
            break;
        }
        beta.push_back(b);
        for (auto& x : w) x /= b;
        basis.push_back(std::move(w));
    }

    const std::size_t m = alpha.size();
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                              static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = alpha[i];
        if (i + 1 < m) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = beta[i];
            t(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = beta[i];
        }
    }
    Eigen::VectorXd evals;
    Eigen::MatrixXd evecs;
    eigh_real(t, evals, evecs);

    // exp(c T) e_1 through the spectral decomposition of T.
    Eigen::VectorXcd coeff(static_cast<Eigen::Index>(m));
    for (std::size_t k = 0; k < m; ++k)
        coeff(static_cast<Eigen::Index>(k)) =
            std::exp(c * evals(static_cast<Eigen::Index>(k)))
            * evecs(0, static_cast<Eigen::Index>(k));
    Eigen::VectorXcd small = evecs.cast<Complex>() * coeff;

    out.w.assign(d, Complex{});
    for (std::size_t j = 0; j < m; ++j) {
        const Complex cj = small(static_cast<Eigen::Index>(j)) * vnorm;
        for (std::size_t i = 0; i < d; ++i) out.w[i] += cj * basis[j][i];
    }
    out.error = out.breakdown
                    ? 0.0
                    : beta_last * std::abs(small(static_cast<Eigen::Index>(m - 1))) * vnorm;
    return out;
}

} // namespace detail

/**
 * Apply exp(c H) to a vector for Hermitian H and complex scalar c. Uses the
 * dense eigendecomposition up to moderate dimensions and a Lanczos
 * propagator with adaptive substeps above; `tol` bounds the accumulated
 * a posteriori substep error relative to the input norm.
 */
inline std::vector<Complex> apply_exponential(const SparseHermitianOperator& h,
                                              const std::vector<Complex>& v, Complex c,
                                              double tol = 1e-10,
                                              std::size_t dense_cutoff = 2000) {
    const std::size_t d = h.dim();
    if (v.size() != d) throw std::invalid_argument("vector length does not match operator");

    if (d <= dense_cutoff) {
        const EighResult es = eigh(h.matrix());
        Eigen::VectorXcd x(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) x(static_cast<Eigen::Index>(i)) = v[i];
        Eigen::VectorXcd y = es.vectors.adjoint() * x;
        for (std::size_t k = 0; k < d; ++k)
            y(static_cast<Eigen::Index>(k)) *=
                std::exp(c * es.values(static_cast<Eigen::Index>(k)));
        Eigen::VectorXcd z = es.vectors * y;
        std::vector<Complex> out(d);
        for (std::size_t i = 0; i < d; ++i) out[i] = z(static_cast<Eigen::Index>(i));
        return out;
    }

    const double vnorm = vec_norm(v);
    if (vnorm == 0.0) return std::vector<Complex>(d, Complex{});
    std::vector<Complex> cur = v;
    std::size_t steps = 1;
    const std::size_t m = 40;
    double done = 0.0; // fraction of c already applied
    while (done < 1.0) {
        const double frac = std::min(1.0 / static_cast<double>(steps), 1.0 - done);
        detail::KrylovResult kr = detail::krylov_exp(h.matrix(), cur, c * frac, m);
        if (!kr.breakdown && kr.error > tol * vnorm * frac) {
            steps *= 2;
            if (steps > (1u << 20)) throw std::runtime_error("propagator failed to converge");
            continue;
        }
        cur = std::move(kr.w);
        done += frac;
    }
    return cur;
}

/// Schroedinger evolution e^{-itH} v.
inline std::vector<Complex> evolve_state(const SparseHermitianOperator& h,
                                         const std::vector<Complex>& v, double t,
                                         double tol = 1e-10) {
    return apply_exponential(h, v, Complex{0.0, -t}, tol);
}

/// Unnormalized Gibbs action e^{-beta H} v.
inline std::vector<Complex> gibbs_apply(const SparseHermitianOperator& h,
                                        const std::vector<Complex>& v, double beta,
                                        double tol = 1e-10) {
    return apply_exponential(h, v, Complex{-beta, 0.0}, tol);
}

/**
 * Heisenberg-picture series A_t = A + sum_n (it)^n/n! ad_H^n(A) on a cutoff
 * enlarged so every commutator up to max_order is exact: footprints grow by
 * at most C1 per order plus one rule replacement at the edge.
 */
struct HeisenbergReport {
    std::size_t enlarged_cutoff = 0;
    std::vector<double> term_norms; // scalar-weighted upper bounds per order
    std::vector<double> ratios;     // successive term ratios, order >= 2
    double tail_bound = 0.0;        // geometric tail after the last order
    bool converged = false;         // ratio < 1 so the tail bound is valid
    SparseMatrix series;            // accumulated A_t on the enlarged space
    HeisenbergReport() : series(0) {}
};

inline HeisenbergReport heisenberg_series(
    const RuleSet& rules, std::size_t observable_span,
    const std::function<SparseMatrix(const TruncatedWordSpace&)>& observable, double t,
    std::size_t max_order, double mu = 0.0) {
    if (max_order == 0) throw std::invalid_argument("series needs at least one order");

    HeisenbergReport rep;
    rep.enlarged_cutoff = observable_span + rules.growth_bound() * max_order
                          + rules.max_rhs_length();
    TruncatedWordSpace big(rules.alphabet(), rep.enlarged_cutoff);
    const SparseHermitianOperator h = build_hamiltonian(big, rules, mu);

    SparseMatrix a = observable(big);
    if (a.dim() != big.dim())
        throw std::invalid_argument("observable was not built on the enlarged space");
    rep.series = a;

    SparseMatrix commutator = a;
    Complex coeff{1.0, 0.0}; // (it)^n / n!
    for (std::size_t n = 1; n <= max_order; ++n) {
        // States evolve as e^{-itH}ψ, so observables pick up ad_H = [H, ·].
        commutator = h.matrix().commutator_with(commutator);
        coeff *= Complex{0.0, t} / static_cast<double>(n);
        rep.series = rep.series.plus(commutator.scaled(coeff));
        rep.term_norms.push_back(std::abs(coeff) * commutator.norm_2_upper());
        if (n >= 2 && rep.term_norms[n - 2] > 0.0)
            rep.ratios.push_back(rep.term_norms[n - 1] / rep.term_norms[n - 2]);
    }

    // Geometric tail: bound later terms by the last ratio if it settled < 1.
    double rho = 0.0;
    const std::size_t look = std::min<std::size_t>(3, rep.ratios.size());
    for (std::size_t i = rep.ratios.size() - look; i < rep.ratios.size(); ++i)
        rho = std::max(rho, rep.ratios[i]);
    if (!rep.ratios.empty() && rho < 1.0) {
        rep.converged = true;
        rep.tail_bound = rep.term_norms.back() * rho / (1.0 - rho);
    }
    return rep;
}

} // namespace qgram

#endif
