#ifndef QGRAM_THERMAL_HPP
#define QGRAM_THERMAL_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgram/evolution.hpp"
#include "qgram/hamiltonian.hpp"
#include "qgram/linalg.hpp"

namespace qgram {

/**
 * Controls for trace evaluation. "auto" picks the cheapest exact route
 * (beta = 0 counting, diagonal sum, dense eigenvalues up to dense_cutoff)
 * and falls back to stochastic Lanczos quadrature above. Explicit methods
 * force one route: exact, dense, stochastic, series.
 */
struct ThermalOptions {
    std::string method = "auto";
    std::size_t dense_cutoff = 4000;
    std::size_t probes = 24;
    std::size_t lanczos_steps = 80;
    std::size_t series_max_order = 300;
    std::uint64_t seed = 1;
    double tol = 1e-10;
};

struct PartitionResult {
    double value = 0.0;
    double std_error = 0.0; // zero for deterministic routes
    std::string method;     // route actually taken
};

namespace detail {

inline double trace_exp_diagonal(const SparseMatrix& h, double beta) {
    // entry() returns 0 for absent diagonal slots, contributing e^0.
    double z = 0.0;
    for (std::size_t i = 0; i < h.dim(); ++i)
        z += std::exp(-beta * h.entry(i, i).real());
    return z;
}

inline double trace_exp_dense(const SparseMatrix& h, double beta) {
    const Eigen::VectorXd evals = eigh_values(h);
    double z = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) z += std::exp(-beta * evals(i));
    return z;
}

/// Stochastic Lanczos quadrature with Rademacher probes; returns mean and SE.
inline std::pair<double, double> trace_exp_stochastic(const SparseMatrix& h, double beta,
                                                      const ThermalOptions& opt) {
    const std::size_t d = h.dim();
    std::mt19937_64 rng(opt.seed);
    std::vector<double> samples;
    samples.reserve(opt.probes);
    for (std::size_t p = 0; p < opt.probes; ++p) {
        std::vector<Complex> z(d);
        for (auto& x : z)
            x = Complex{(rng() & 1u) ? 1.0 : -1.0, 0.0};
        // Lanczos on the normalized probe; quadrature weights from e_1.
        std::vector<std::vector<Complex>> basis;
        std::vector<double> alpha, betas;
        const double znorm = std::sqrt(static_cast<double>(d));
        basis.emplace_back(z);
        for (auto& x : basis[0]) x /= znorm;
        const std::size_t m_cap = std::min(opt.lanczos_steps, d);
        for (std::size_t j = 0; j < m_cap; ++j) {
            std::vector<Complex> w = h.apply(basis[j]);
            const double a = vec_dot(basis[j], w).real();
            alpha.push_back(a);
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= a * basis[j][i];
            if (j > 0)
                for (std::size_t i = 0; i < w.size(); ++i)
                    w[i] -= betas[j - 1] * basis[j - 1][i];
            for (const auto& q : basis) {
                const Complex ov = vec_dot(q, w);
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= ov * q[i];
            }
            const double b = vec_norm(w);
            if (b < 1e-12 || j + 1 == m_cap) break;
            betas.push_back(b);
            for (auto& x : w) x /= b;
            basis.push_back(std::move(w));
        }
        const std::size_t m = alpha.size();
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                                  static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) {
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = alpha[i];
            if (i + 1 < m) {
                t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = betas[i];
                t(static_cast<Eigen::Index>(i + 1), static_cast<Eigen::Index>(i)) = betas[i];
            }
        }
        Eigen::VectorXd evals;
        Eigen::MatrixXd evecs;
        eigh_real(t, evals, evecs);
        double est = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            est += evecs(0, static_cast<Eigen::Index>(k))
                   * evecs(0, static_cast<Eigen::Index>(k))
                   * std::exp(-beta * evals(static_cast<Eigen::Index>(k)));
        samples.push_back(static_cast<double>(d) * est);
    }
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= static_cast<double>(samples.size());
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var = samples.size() > 1 ? var / static_cast<double>(samples.size() - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(samples.size()))};
}

/// Taylor series in beta with dense powers; cross-check route for small dims.
inline double trace_exp_series(const SparseMatrix& h, double beta,
                               const ThermalOptions& opt) {
    if (h.dim() > 1024)
        throw std::invalid_argument("series trace is a small-dimension cross-check route");
    const Eigen::MatrixXcd b = to_dense(h);
    const double hnorm = h.norm_2_upper();
    const double d = static_cast<double>(h.dim());
    Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(b.rows(), b.cols());
    double z = d; // order 0
    double scalar = 1.0;
    double sign = 1.0;
    for (std::size_t n = 1; n <= opt.series_max_order; ++n) {
        power = power * b;
        scalar *= beta / static_cast<double>(n);
        sign = -sign;
        z += sign * scalar * power.trace().real();
        const double ratio = beta * hnorm / static_cast<double>(n + 1);
        if (ratio < 1.0 && d * scalar * std::pow(hnorm, static_cast<double>(n))
                               * ratio / (1.0 - ratio) < opt.tol)
            return z;
    }
    throw std::runtime_error("series trace did not reach tolerance");
}

} // namespace detail

/// Z = Tr exp(-beta H) over the operator's full cut-off space.
inline PartitionResult partition_function(const SparseHermitianOperator& h, double beta,
                                          const ThermalOptions& opt = {}) {
    PartitionResult out;
    const std::string& m = opt.method;
    if (m != "auto" && m != "exact" && m != "dense" && m != "stochastic" && m != "series")
        throw std::invalid_argument("unknown trace method: " + m);

    if (m == "auto" || m == "exact") {
        if (beta == 0.0) {
            out.value = static_cast<double>(h.dim());
            out.method = "exact-dim";
            return out;
        }
        if (h.is_diagonal()) {
            out.value = detail::trace_exp_diagonal(h.matrix(), beta);
            out.method = "exact-diagonal";
            return out;
        }
        if (m == "exact")
            throw std::invalid_argument("no exact route: operator is not diagonal");
    }
    if (m == "dense" || (m == "auto" && h.dim() <= opt.dense_cutoff)) {
        out.value = detail::trace_exp_dense(h.matrix(), beta);
        out.method = "dense";
        return out;
    }
    if (m == "series") {
        out.value = detail::trace_exp_series(h.matrix(), beta, opt);
        out.method = "series";
        return out;
    }
    auto [mean, se] = detail::trace_exp_stochastic(h.matrix(), beta, opt);
    out.value = mean;
    out.std_error = se;
    out.method = "stochastic";
    return out;
}

/**
 * Z_N for the rules at cutoff N. When beta = 0 or every amplitude vanishes
 * the trace is a closed-form geometric sum over sector sizes, evaluated
 * without building the space, so very large cutoffs stay cheap.
 */
inline PartitionResult partition_function(const Alphabet& alphabet, const RuleSet& rules,
                                          std::size_t cutoff, double beta, double mu = 0.0,
                                          const ThermalOptions& opt = {}) {
    if ((beta == 0.0 || rules.lambda_max() == 0.0)
        && (opt.method == "auto" || opt.method == "exact")) {
        PartitionResult out;
        const double r = static_cast<double>(alphabet.size());
        const double log_r = std::log(r);
        double z = 0.0;
        double count = 1.0;
        for (std::size_t n = 0; n <= cutoff; ++n) {
            // Sector term r^n e^{-beta mu n}; the weighted case goes through
            // log space so huge counts against tiny weights cannot hit
            // inf * 0 before the product itself leaves the double range.
            const double term =
                beta * mu == 0.0
                    ? count
                    : std::exp(static_cast<double>(n) * (log_r - beta * mu));
            z += term;
            count *= r;
            if (!std::isfinite(z)) break;
        }
        out.value = z;
        out.method = beta == 0.0 ? "exact-dim" : "exact-diagonal";
        return out;
    }
    TruncatedWordSpace space(alphabet, cutoff);
    return partition_function(build_hamiltonian(space, rules, mu), beta, opt);
}

/** Normalized and unnormalized thermal averages of one observable. */
struct ExpectationResult {
    double value = 0.0;        // Tr(A e^{-beta H}) / Z
    double unnormalized = 0.0; // Tr(A e^{-beta H})
    double z = 0.0;            // Tr e^{-beta H}
    double std_error = 0.0;
    std::string method;
};

/**
 * <A> = Tr(A e^{-beta H}) / Tr(e^{-beta H}). The dense route contracts A
 * against each eigenvector; the stochastic route applies the symmetric
 * splitting e^{-beta H/2} A e^{-beta H/2} to Rademacher probes.
 */
inline ExpectationResult thermal_expectation(const SparseHermitianOperator& h,
                                             const SparseMatrix& a, double beta,
                                             const ThermalOptions& opt = {}) {
    if (a.dim() != h.dim()) throw std::invalid_argument("observable dimension mismatch");
    ExpectationResult out;
    if (opt.method == "stochastic" || (opt.method == "auto" && h.dim() > opt.dense_cutoff)) {
        std::mt19937_64 rng(opt.seed);
        std::vector<double> num_samples, den_samples;
        const std::size_t d = h.dim();
        for (std::size_t p = 0; p < opt.probes; ++p) {
            std::vector<Complex> z(d);
            for (auto& x : z) x = Complex{(rng() & 1u) ? 1.0 : -1.0, 0.0};
            std::vector<Complex> half = apply_exponential(h, z, Complex{-beta / 2.0, 0.0},
                                                          opt.tol, opt.dense_cutoff);
            num_samples.push_back(vec_dot(half, a.apply(half)).real());
            den_samples.push_back(vec_dot(half, half).real());
        }
        double num = 0.0, den = 0.0;
        for (double s : num_samples) num += s;
        for (double s : den_samples) den += s;
        out.value = num / den;
        const double scale = static_cast<double>(num_samples.size());
        out.unnormalized = num / scale;
        out.z = den / scale;
        out.method = "stochastic";
        double var = 0.0;
        for (std::size_t i = 0; i < num_samples.size(); ++i) {
            const double dev = num_samples[i] - out.value * den_samples[i];
            var += dev * dev;
        }
        const double den_mean = den / scale;
        var /= scale * den_mean * den_mean;
        out.std_error = std::sqrt(var / scale);
        return out;
    }
    const EighResult es = eigh(h.matrix());
    double num = 0.0, den = 0.0;
    const std::size_t d = h.dim();
    std::vector<Complex> u(d);
    for (std::size_t k = 0; k < d; ++k) {
        const double w = std::exp(-beta * es.values(static_cast<Eigen::Index>(k)));
        for (std::size_t i = 0; i < d; ++i)
            u[i] = es.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        num += w * vec_dot(u, a.apply(u)).real();
        den += w;
    }
    out.value = num / den;
    out.unnormalized = num;
    out.z = den;
    out.method = "dense";
    if (out.z <= 0.0 || !std::isfinite(out.z))
        throw std::runtime_error("partition function underflow in thermal average");
    return out;
}

/// Unnormalized diagonal Gibbs weights <w|e^{-beta H}|w> for every basis word.
inline std::vector<double> diagonal_gibbs_weights(const SparseHermitianOperator& h,
                                                  double beta) {
    const EighResult es = eigh(h.matrix());
    const std::size_t d = h.dim();
    std::vector<double> p(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        const double w = std::exp(-beta * es.values(static_cast<Eigen::Index>(k)));
        for (std::size_t i = 0; i < d; ++i)
            p[i] += w * std::norm(es.vectors(static_cast<Eigen::Index>(i),
                                             static_cast<Eigen::Index>(k)));
    }
    return p;
}

/**
 * Probability over word lengths 0..N induced by the diagonal of
 * e^{-beta H} / Z, the restriction of the Gibbs state to the commutative
 * multiplication algebra summed per sector.
 */
struct LengthMeasure {
    std::vector<double> probability; // index = word length
    double mean_length = 0.0;
};

inline LengthMeasure diagonal_measure(const TruncatedWordSpace& space,
                                      const SparseHermitianOperator& h, double beta) {
    if (h.dim() != space.dim()) throw std::invalid_argument("operator/space mismatch");
    LengthMeasure out;
    out.probability.assign(space.max_length() + 1, 0.0);
    if (beta == 0.0) {
        for (std::size_t n = 0; n <= space.max_length(); ++n) {
            const auto [lo, hi] = space.sector_range(n);
            out.probability[n] = static_cast<double>(hi - lo);
        }
    } else {
        const std::vector<double> w = diagonal_gibbs_weights(h, beta);
        for (std::size_t i = 0; i < w.size(); ++i)
            out.probability[space.length_at(i)] += w[i];
    }
    double total = 0.0;
    for (double x : out.probability) total += x;
    for (auto& x : out.probability) x /= total;
    for (std::size_t n = 0; n < out.probability.size(); ++n)
        out.mean_length += static_cast<double>(n) * out.probability[n];
    return out;
}

/// Mean word length under the Gibbs measure at inverse temperature beta.
inline double mean_word_length(const TruncatedWordSpace& space,
                               const SparseHermitianOperator& h, double beta) {
    return diagonal_measure(space, h, beta).mean_length;
}

/// Least-squares line fit, for free-energy slopes over the cutoff.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

inline LineFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit needs matching samples, at least two");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    LineFit fit;
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ymean = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double pred = fit.slope * xs[i] + fit.intercept;
        ss_res += (ys[i] - pred) * (ys[i] - pred);
        ss_tot += (ys[i] - ymean) * (ys[i] - ymean);
    }
    fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

enum class GrowthVerdict { converges, diverges_linearly, inconclusive };

inline const char* to_string(GrowthVerdict v) {
    switch (v) {
    case GrowthVerdict::converges: return "converges";
    case GrowthVerdict::diverges_linearly: return "diverges-linearly";
    default: return "inconclusive";
    }
}

/**
 * Convergence study of Z_N as the cutoff grows.
 *
 * Verdict cascade, most definite first:
 *   1. Cauchy: |Z_{N+1} - Z_N| < tol (1 + |Z_N|) on two consecutive steps
 *      means converges, limit = last value.
 *   2. Stable geometric increments: ratio q settled below one sums the tail
 *      into an extrapolated limit; settled above one diverges (log Z is
 *      asymptotically linear).
 *   3. Linear fit of log Z_N on the trailing half: positive slope with
 *      a near-perfect fit diverges-linearly.
 *   4. Otherwise inconclusive; a good log Z vs log N fit earns a sub-linear
 *      growth note.
 */
struct GrowthReport {
    std::vector<std::size_t> cutoffs;
    std::vector<double> values;
    std::vector<std::string> methods;
    double slope = 0.0;      // log Z_N vs N over the trailing half
    double fit_r2 = 0.0;
    GrowthVerdict verdict = GrowthVerdict::inconclusive;
    double limit = 0.0;      // meaningful only for converges
    std::string note;
};

inline GrowthReport growth_rate(const Alphabet& alphabet, const RuleSet& rules,
                                std::size_t cutoff_min, std::size_t cutoff_max, double beta,
                                double mu = 0.0, const ThermalOptions& opt = {},
                                double cauchy_tol = 1e-8) {
    if (cutoff_max < cutoff_min + 2)
        throw std::invalid_argument("growth study needs at least three cutoffs");
    GrowthReport rep;
    bool overflowed = false;
    for (std::size_t n = cutoff_min; n <= cutoff_max; ++n) {
        const PartitionResult z = partition_function(alphabet, rules, n, beta, mu, opt);
        if (!std::isfinite(z.value) || z.value > 1e280) {
            overflowed = true;
            break;
        }
        rep.cutoffs.push_back(n);
        rep.values.push_back(z.value);
        rep.methods.push_back(z.method);
    }
    const std::size_t count = rep.values.size();
    if (count < 3) {
        rep.verdict = GrowthVerdict::diverges_linearly;
        rep.note = "partition sum left the floating-point range almost immediately";
        return rep;
    }

    // Trailing-half fit of log Z_N against N.
    {
        std::vector<double> xs, ys;
        for (std::size_t i = count / 2; i < count; ++i) {
            if (rep.values[i] <= 0.0) continue;
            xs.push_back(static_cast<double>(rep.cutoffs[i]));
            ys.push_back(std::log(rep.values[i]));
        }
        if (xs.size() >= 3) {
            const LineFit fit = linear_fit(xs, ys);
            rep.slope = fit.slope;
            rep.fit_r2 = fit.r_squared;
        }
    }

    std::vector<double> inc(count - 1);
    for (std::size_t i = 0; i + 1 < count; ++i) inc[i] = rep.values[i + 1] - rep.values[i];

    if (!overflowed
        && std::abs(inc[count - 2]) < cauchy_tol * (1.0 + std::abs(rep.values[count - 2]))
        && std::abs(inc[count - 3]) < cauchy_tol * (1.0 + std::abs(rep.values[count - 3]))) {
        rep.verdict = GrowthVerdict::converges;
        rep.limit = rep.values.back();
        rep.note = "increments below the Cauchy tolerance on consecutive cutoffs";
        return rep;
    }

    if (!overflowed && count >= 4) {
        const double d0 = inc[count - 4], d1 = inc[count - 3], d2 = inc[count - 2];
        if (d0 > 0.0 && d1 > 0.0 && d2 > 0.0) {
            const double q1 = d1 / d0, q2 = d2 / d1;
            if (std::abs(q1 - q2) < 0.02 * std::max(q1, q2)) {
                if (q2 < 1.0 - 1e-3) {
                    rep.verdict = GrowthVerdict::converges;
                    rep.limit = rep.values.back() + d2 * q2 / (1.0 - q2);
                    rep.note =
                        "geometric increments with ratio below one; limit extrapolated";
                    return rep;
                }
                if (q2 > 1.0 + 1e-3) {
                    rep.verdict = GrowthVerdict::diverges_linearly;
                    rep.note = "geometric increments with ratio above one";
                    return rep;
                }
                rep.verdict = GrowthVerdict::inconclusive;
                rep.note = "increment ratio indistinguishable from one "
                           "(at most polynomial growth)";
                return rep;
            }
        }
    }

    if (overflowed || (rep.slope > 1e-3 && rep.fit_r2 > 0.999)) {
        rep.verdict = GrowthVerdict::diverges_linearly;
        rep.note = overflowed ? "partition sum overflowed the floating-point range"
                              : "log Z_N grows linearly in the cutoff";
        return rep;
    }

    rep.verdict = GrowthVerdict::inconclusive;
    {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < count; ++i) {
            if (rep.values[i] <= 0.0 || rep.cutoffs[i] == 0) continue;
            xs.push_back(std::log(static_cast<double>(rep.cutoffs[i])));
            ys.push_back(std::log(rep.values[i]));
        }
        if (xs.size() >= 3 && linear_fit(xs, ys).r_squared > 0.999) {
            rep.note = "sub-linear: log Z_N tracks log N, not N";
            return rep;
        }
    }
    rep.note = "no Cauchy convergence and no stable growth pattern";
    return rep;
}

/**
 * Scan the length fugacity mu over a grid and report where the growth verdict
 * flips from diverging to converging; the flip brackets the critical value.
 */
struct MuScanResult {
    std::vector<double> mus;
    std::vector<GrowthVerdict> verdicts;
    bool bracketed = false;
    double mu_lo = 0.0; // last diverging mu
    double mu_hi = 0.0; // first converging mu after it
};

inline MuScanResult critical_mu_scan(const Alphabet& alphabet, const RuleSet& rules,
                                     std::size_t cutoff_min, std::size_t cutoff_max,
                                     double beta, double mu_min, double mu_max,
                                     double mu_step, const ThermalOptions& opt = {}) {
    if (mu_step <= 0.0) throw std::invalid_argument("mu step must be positive");
    MuScanResult out;
    for (double mu = mu_min; mu <= mu_max + 0.5 * mu_step; mu += mu_step) {
        const GrowthReport rep =
            growth_rate(alphabet, rules, cutoff_min, cutoff_max, beta, mu, opt);
        out.mus.push_back(mu);
        out.verdicts.push_back(rep.verdict);
    }
    for (std::size_t i = 0; i + 1 < out.verdicts.size(); ++i) {
        if (out.verdicts[i] == GrowthVerdict::diverges_linearly
            && out.verdicts[i + 1] == GrowthVerdict::converges) {
            out.bracketed = true;
            out.mu_lo = out.mus[i];
            out.mu_hi = out.mus[i + 1];
            break;
        }
    }
    return out;
}

} // namespace qgram

#endif
