// Configuration-driven experiment runner. Every library module is exposed
// as a subcommand; runs write comma-separated tables plus a manifest into
// the output directory. Identical config and seed give identical reports.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qgram/qgram.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qgram;

namespace {

// Raised by compute stages so the exit code can distinguish numerical
// trouble (3) from configuration mistakes (2).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Context {
    ConfigFile cfg;
    std::string config_path;
    fs::path out_dir;
    std::uint64_t seed = 1;
    bool seed_given = false;
    double tol = 0.0;
    bool tol_given = false;
    bool setup_done = false; // true once inputs are loaded; later errors are numerical
    std::vector<std::string> outputs;
    json summary = json::object();

    fs::path resolve(const std::string& name) const {
        fs::path p(name);
        if (p.is_absolute()) return p;
        return fs::path(config_path).parent_path() / p;
    }

    void write_table(const std::string& name, const CsvTable& table) {
        table.write((out_dir / name).string());
        outputs.push_back(name);
    }

    ThermalOptions thermal_options() const {
        ThermalOptions opt;
        opt.method = cfg.get_or("options", "method", "auto");
        opt.dense_cutoff =
            static_cast<std::size_t>(cfg.get_integer_or("options", "dense_cutoff", 4000));
        opt.probes = static_cast<std::size_t>(cfg.get_integer_or("options", "probes", 24));
        opt.lanczos_steps =
            static_cast<std::size_t>(cfg.get_integer_or("options", "lanczos_steps", 80));
        opt.series_max_order =
            static_cast<std::size_t>(cfg.get_integer_or("options", "series_max_order", 300));
        opt.seed = seed_given ? seed
                              : static_cast<std::uint64_t>(
                                    cfg.get_integer_or("options", "seed", 1));
        opt.tol = tol_given ? tol : cfg.get_number_or("options", "tol", 1e-10);
        return opt;
    }

    double tolerance(double fallback) const {
        return tol_given ? tol : cfg.get_number_or("options", "tol", fallback);
    }
};

RuleSet load_model_rules(Context& ctx) {
    auto file = load_rule_file(ctx.resolve(ctx.cfg.get("model", "rules")).string());
    ctx.summary["rule_verdict"] = file.verdict;
    return file.rules;
}

std::size_t model_cutoff(const Context& ctx) {
    long n = ctx.cfg.get_integer("model", "cutoff");
    if (n < 0) throw std::runtime_error("cutoff must be nonnegative");
    return static_cast<std::size_t>(n);
}

double model_mu(const Context& ctx) { return ctx.cfg.get_number_or("model", "mu", 0.0); }

std::string word_text(const Alphabet& a, const Word& w) { return a.format(w); }

// ---------------------------------------------------------------- evolve --

void run_evolve(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const std::size_t cutoff = model_cutoff(ctx);
    const Word start = rules.alphabet().parse(ctx.cfg.get("evolve", "start"));
    const std::vector<double> times = ctx.cfg.get_grid("evolve", "times");
    const double tol = ctx.tolerance(1e-10);
    ctx.setup_done = true;

    TruncatedWordSpace space(rules.alphabet(), cutoff);
    const auto h = build_hamiltonian(space, rules, model_mu(ctx));
    std::vector<Complex> psi0(space.dim(), Complex{0.0, 0.0});
    psi0[space.index_of(start)] = 1.0;

    CsvTable table{{"t", "word", "re", "im", "prob"}, {}};
    for (double t : times) {
        const auto psi = evolve_state(h, psi0, t, tol);
        for (std::size_t i = 0; i < psi.size(); ++i)
            table.add_row({fmt_g17(t), word_text(rules.alphabet(), space.word_at(i)),
                           fmt_g17(psi[i].real()), fmt_g17(psi[i].imag()),
                           fmt_g17(std::norm(psi[i]))});
        const double norm = vec_norm(psi);
        if (!std::isfinite(norm)) throw NumericalError("state norm is not finite");
        ctx.summary["norm_t_" + fmt_g17(t)] = fmt_g17(norm);
    }
    ctx.write_table("evolve.csv", table);
}

// ------------------------------------------------------------ heisenberg --

void run_heisenberg(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const double t = ctx.cfg.get_number("heisenberg", "t");
    const auto max_order =
        static_cast<std::size_t>(ctx.cfg.get_integer("heisenberg", "max_order"));
    const Word start = rules.alphabet().parse(ctx.cfg.get("heisenberg", "start"));

    std::size_t span = 0;
    std::function<SparseMatrix(const TruncatedWordSpace&)> builder;
    if (ctx.cfg.has("heisenberg", "observable")) {
        auto file =
            load_observable_file(ctx.resolve(ctx.cfg.get("heisenberg", "observable")).string());
        if (file.first < 1)
            throw std::runtime_error("heisenberg observables start at site 1");
        LocalObservable obs{static_cast<std::size_t>(file.first),
                            static_cast<std::size_t>(file.last), file.mat};
        span = obs.last;
        builder = [obs](const TruncatedWordSpace& s) { return embed_observable(s, obs); };
    } else {
        const Word w = rules.alphabet().parse(ctx.cfg.get("heisenberg", "word"));
        span = w.size();
        builder = [w](const TruncatedWordSpace& s) { return word_projector(s, w, w); };
    }
    const double mu = model_mu(ctx);
    ctx.setup_done = true;

    const auto rep = heisenberg_series(rules, span, builder, t, max_order, mu);

    CsvTable orders{{"order", "term_norm", "ratio"}, {}};
    for (std::size_t n = 0; n < rep.term_norms.size(); ++n)
        orders.add_row({std::to_string(n + 1), fmt_g17(rep.term_norms[n]),
                        n >= 1 ? fmt_g17(rep.ratios[n - 1]) : std::string("")});
    ctx.write_table("heisenberg_orders.csv", orders);

    // Duality check on the enlarged space: <psi(t), A psi(t)> vs <psi, A_t psi>.
    TruncatedWordSpace big(rules.alphabet(), rep.enlarged_cutoff);
    const auto h = build_hamiltonian(big, rules, mu);
    std::vector<Complex> psi(big.dim(), Complex{0.0, 0.0});
    psi[big.index_of(start)] = 1.0;
    const auto psi_t = evolve_state(h, psi, t);
    const SparseMatrix a = builder(big);
    const Complex lhs = vec_dot(psi_t, a.apply(psi_t));
    const Complex rhs = vec_dot(psi, rep.series.apply(psi));

    CsvTable summary{{"enlarged_cutoff", "tail_bound", "converged", "schrodinger_re",
                      "schrodinger_im", "heisenberg_re", "heisenberg_im", "abs_diff"},
                     {}};
    summary.add_row({std::to_string(rep.enlarged_cutoff), fmt_g17(rep.tail_bound),
                     rep.converged ? "1" : "0", fmt_g17(lhs.real()), fmt_g17(lhs.imag()),
                     fmt_g17(rhs.real()), fmt_g17(rhs.imag()), fmt_g17(std::abs(lhs - rhs))});
    ctx.write_table("heisenberg_summary.csv", summary);
    if (rep.converged && std::abs(lhs - rhs) > rep.tail_bound)
        throw NumericalError("duality gap exceeds the reported tail bound");
}

// --------------------------------------------------------------- thermal --

void run_thermal(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const auto n_min = static_cast<std::size_t>(ctx.cfg.get_integer("thermal", "cutoff_min"));
    const auto n_max = static_cast<std::size_t>(ctx.cfg.get_integer("thermal", "cutoff_max"));
    if (n_max < n_min) throw std::runtime_error("cutoff range is reversed");
    const std::vector<double> betas = ctx.cfg.get_grid("thermal", "betas");
    const double mu = model_mu(ctx);
    const ThermalOptions opt = ctx.thermal_options();
    ctx.setup_done = true;

    CsvTable table{{"beta", "cutoff", "z", "log_z", "method", "std_error"}, {}};
    for (double beta : betas)
        for (std::size_t n = n_min; n <= n_max; ++n) {
            const auto z = partition_function(rules.alphabet(), rules, n, beta, mu, opt);
            table.add_row({fmt_g17(beta), std::to_string(n), fmt_g17(z.value),
                           fmt_g17(z.value > 0 ? std::log(z.value)
                                               : -std::numeric_limits<double>::infinity()),
                           z.method, fmt_g17(z.std_error)});
        }
    ctx.write_table("thermal_z.csv", table);

    if (n_max >= n_min + 2) {
        CsvTable growth{{"beta", "slope", "r_squared", "verdict", "limit", "note"}, {}};
        for (double beta : betas) {
            const auto rep = growth_rate(rules.alphabet(), rules, n_min, n_max, beta, mu, opt);
            growth.add_row({fmt_g17(beta), fmt_g17(rep.slope), fmt_g17(rep.fit_r2),
                            to_string(rep.verdict), fmt_g17(rep.limit), rep.note});
        }
        ctx.write_table("thermal_growth.csv", growth);
    }
}

// --------------------------------------------------------------- cluster --

void run_cluster(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const auto m_max = static_cast<std::size_t>(ctx.cfg.get_integer("cluster", "m_max"));
    ClusterOptions copt;
    copt.k_max = static_cast<std::size_t>(ctx.cfg.get_integer_or("cluster", "k_max", 8));
    const std::vector<double> betas = ctx.cfg.get_grid("cluster", "betas");
    const auto factor_cutoff =
        static_cast<std::size_t>(ctx.cfg.get_integer_or("cluster", "factor_cutoff", 0));
    ctx.setup_done = true;

    CsvTable raw{{"m", "k", "s_re", "s_im"}, {}};
    CsvTable values{{"m", "beta", "c"}, {}};
    for (std::size_t m = 1; m <= m_max; ++m) {
        const auto w = cluster_weight(m, rules, copt);
        for (std::size_t k = 0; k < w.series.raw.size(); ++k)
            raw.add_row({std::to_string(m), std::to_string(k), fmt_g17(w.series.raw[k].real()),
                         fmt_g17(w.series.raw[k].imag())});
        for (double beta : betas)
            values.add_row({std::to_string(m), fmt_g17(beta), fmt_g17(w.series.value(beta))});
    }
    ctx.write_table("cluster_cm.csv", raw);
    ctx.write_table("cluster_values.csv", values);

    if (factor_cutoff > 0) {
        const double beta = ctx.cfg.get_number_or("cluster", "factor_beta", betas.front());
        const auto rep = factorization_check(factor_cutoff, rules, beta, copt);
        CsvTable fact{{"order", "residual", "connected_residual"}, {}};
        for (std::size_t k = 0; k < rep.residual_per_order.size(); ++k)
            fact.add_row({std::to_string(k), fmt_g17(rep.residual_per_order[k]),
                          fmt_g17(rep.connected_residual_per_order[k])});
        ctx.write_table("cluster_factorization.csv", fact);
        ctx.summary["factorization_max_residual"] = fmt_g17(rep.max_residual);
        ctx.summary["factorization_max_connected_residual"] =
            fmt_g17(rep.max_connected_residual);
        if (!(rep.max_residual < 1e-9))
            throw NumericalError("cluster factorization residual is too large");
    }
}

// --------------------------------------------------------------- mu scan --

void run_mu_scan(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const auto n_min = static_cast<std::size_t>(ctx.cfg.get_integer("mu_scan", "cutoff_min"));
    const auto n_max = static_cast<std::size_t>(ctx.cfg.get_integer("mu_scan", "cutoff_max"));
    const double beta = ctx.cfg.get_number("mu_scan", "beta");
    const double mu_min = ctx.cfg.get_number("mu_scan", "mu_min");
    const double mu_max = ctx.cfg.get_number("mu_scan", "mu_max");
    const double mu_step = ctx.cfg.get_number("mu_scan", "mu_step");
    const ThermalOptions opt = ctx.thermal_options();
    ctx.setup_done = true;

    const auto scan =
        critical_mu_scan(rules.alphabet(), rules, n_min, n_max, beta, mu_min, mu_max, mu_step, opt);
    CsvTable table{{"mu", "verdict"}, {}};
    for (std::size_t i = 0; i < scan.mus.size(); ++i)
        table.add_row({fmt_g17(scan.mus[i]), to_string(scan.verdicts[i])});
    ctx.write_table("mu_scan.csv", table);
    ctx.summary["bracketed"] = scan.bracketed;
    if (scan.bracketed) {
        ctx.summary["mu_lo"] = fmt_g17(scan.mu_lo);
        ctx.summary["mu_hi"] = fmt_g17(scan.mu_hi);
    }
}

// --------------------------------------------------------------- measure --

void run_measure(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const std::size_t cutoff = model_cutoff(ctx);
    const double beta = ctx.cfg.get_number("measure", "beta");
    ctx.setup_done = true;

    TruncatedWordSpace space(rules.alphabet(), cutoff);
    const auto h = build_hamiltonian(space, rules, model_mu(ctx));
    const auto measure = diagonal_measure(space, h, beta);
    CsvTable table{{"length", "probability"}, {}};
    for (std::size_t n = 0; n < measure.probability.size(); ++n)
        table.add_row({std::to_string(n), fmt_g17(measure.probability[n])});
    ctx.write_table("measure.csv", table);
    ctx.summary["mean_length"] = fmt_g17(measure.mean_length);
}

// ---------------------------------------------------------------- renorm --

void run_renorm(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const double beta = ctx.cfg.get_number("renorm", "beta");
    const auto n_min = static_cast<std::size_t>(ctx.cfg.get_integer("renorm", "n_min"));
    const auto n_max = static_cast<std::size_t>(ctx.cfg.get_integer("renorm", "n_max"));
    const auto pad = static_cast<std::size_t>(ctx.cfg.get_integer_or("renorm", "pad", 4));
    auto file = load_observable_file(ctx.resolve(ctx.cfg.get("renorm", "observable")).string());
    SpinObservable obs{static_cast<int>(file.first),
                       static_cast<std::size_t>(file.last - file.first + 1), file.mat};
    const ThermalOptions opt = ctx.thermal_options();
    ctx.setup_done = true;

    const auto seq = renorm_convergence(rules, beta, obs, n_min, n_max, pad, opt);
    CsvTable table{{"n", "outer_cutoff", "value", "gap"}, {}};
    for (std::size_t i = 0; i < seq.ns.size(); ++i)
        table.add_row({std::to_string(seq.ns[i]), std::to_string(seq.outer_cutoffs[i]),
                       fmt_g17(seq.values[i]),
                       i > 0 ? fmt_g17(seq.gaps[i - 1]) : std::string("")});
    ctx.write_table("renorm.csv", table);
}

// --------------------------------------------------------------- sectors --

void run_sectors(Context& ctx) {
    RuleSet rules = load_model_rules(ctx);
    const std::size_t cutoff = model_cutoff(ctx);
    ctx.setup_done = true;

    TruncatedWordSpace space(rules.alphabet(), cutoff);
    const auto dec = reachability_sectors(space, rules);
    CsvTable classes{{"label", "representative", "size"}, {}};
    for (const auto& c : dec.classes)
        classes.add_row({std::to_string(c.label),
                         word_text(rules.alphabet(), c.representative),
                         std::to_string(c.size)});
    ctx.write_table("sectors_classes.csv", classes);

    const auto counts = class_counts_by_length(dec, space.max_length());
    CsvTable table{{"representative_length", "classes"}, {}};
    for (std::size_t n = 0; n < counts.size(); ++n)
        table.add_row({std::to_string(n), std::to_string(counts[n])});
    ctx.write_table("sectors_counts.csv", table);

    const auto h = build_hamiltonian(space, rules, model_mu(ctx));
    ctx.summary["blocks_invariant"] = sectors_are_invariant(h, dec);
}

// ---------------------------------------------------------------- jacobi --

void run_jacobi(Context& ctx) {
    const double lambda = ctx.cfg.get_number_or("jacobi", "lambda", 1.0);
    const auto size = static_cast<std::size_t>(ctx.cfg.get_integer_or("jacobi", "size", 8));
    ctx.setup_done = true;

    const auto cmp = one_particle_compare(lambda, size);
    CsvTable couplings{{"n", "direct", "printed"}, {}};
    for (std::size_t n = 0; n < cmp.direct_couplings.size(); ++n)
        couplings.add_row({std::to_string(n + 1), fmt_g17(cmp.direct_couplings[n]),
                           n + 1 < cmp.printed_couplings.size()
                               ? fmt_g17(cmp.printed_couplings[n + 1])
                               : std::string("")});
    ctx.write_table("jacobi_couplings.csv", couplings);

    CsvTable spectra{{"k", "direct", "printed"}, {}};
    for (std::size_t k = 0; k < cmp.spectrum_direct.size(); ++k)
        spectra.add_row({std::to_string(k), fmt_g17(cmp.spectrum_direct[k]),
                         k < cmp.spectrum_printed.size() ? fmt_g17(cmp.spectrum_printed[k])
                                                         : std::string("")});
    ctx.write_table("jacobi_spectra.csv", spectra);

    ctx.summary["symmetric"] = cmp.symmetric;
    ctx.summary["diagonals_zero"] = cmp.diagonals_zero;
    ctx.summary["multiplicity_law"] = cmp.multiplicity_law;
    ctx.summary["equal_as_printed"] = cmp.equal_as_printed;
    ctx.summary["equal_after_shift"] = cmp.equal_after_shift;
    ctx.summary["note"] = cmp.note;
}

// ---------------------------------------------------------------- derive --

void run_derive(Context& ctx) {
    auto grammar = load_grammar_file(ctx.resolve(ctx.cfg.get("model", "grammar")).string());
    const std::size_t cutoff = model_cutoff(ctx);
    const Word start = grammar.alphabet().parse(ctx.cfg.get("derive", "start"));
    const std::vector<double> times = ctx.cfg.get_grid("derive", "times");
    const double tol = ctx.tolerance(1e-13);
    ctx.setup_done = true;

    TruncatedWordSpace space(grammar.alphabet(), cutoff);
    CsvTable table{{"t", "word", "re", "im", "prob"}, {}};
    for (double t : times) {
        const auto psi = derivation_evolve(space, grammar, start, t, tol);
        for (std::size_t i = 0; i < psi.size(); ++i) {
            if (!grammar.all_terminal(space.word_at(i))) continue;
            table.add_row({fmt_g17(t), word_text(grammar.alphabet(), space.word_at(i)),
                           fmt_g17(psi[i].real()), fmt_g17(psi[i].imag()),
                           fmt_g17(std::norm(psi[i]))});
        }
    }
    ctx.write_table("derive.csv", table);
}

// ----------------------------------------------------------------- graph --

void run_graph(Context& ctx) {
    const std::string family = ctx.cfg.get("graph", "family");
    if (family == "meanfield") {
        const auto n_max = static_cast<std::uint32_t>(ctx.cfg.get_integer("graph", "n_max"));
        const double l1 = ctx.cfg.get_number_or("graph", "lambda1", 1.0);
        const double l2 = ctx.cfg.get_number_or("graph", "lambda2", 1.0);
        ctx.setup_done = true;

        MeanFieldModel model(build_meanfield_basis(n_max));
        CsvTable sizes{{"n_vertices", "classes"}, {}};
        std::map<std::uint32_t, std::size_t> per_n;
        for (std::size_t i = 0; i < model.basis().dim(); ++i)
            ++per_n[model.basis().graph(i).n_vertices()];
        for (const auto& [n, c] : per_n)
            sizes.add_row({std::to_string(n), std::to_string(c)});
        ctx.write_table("graph_basis.csv", sizes);

        const auto h = model.hamiltonian(l1, l2);
        const auto b = model.b_matrix(l1, l2);
        const double norm = spectral_norm_estimate(b);
        const double bound = (l1 + l2) * static_cast<double>(n_max);
        ctx.summary["hermitian"] = h.matrix().is_hermitian();
        ctx.summary["b_norm_estimate"] = fmt_g17(norm);
        ctx.summary["b_norm_bound"] = fmt_g17(bound);
        if (norm > bound * (1.0 + 1e-9))
            throw NumericalError("mean-field norm estimate exceeds the proved bound");
    } else if (family == "triangulation") {
        const auto n_max = static_cast<std::uint32_t>(ctx.cfg.get_integer("graph", "n_max"));
        const double lambda = ctx.cfg.get_number_or("graph", "lambda", 1.0);
        ctx.setup_done = true;

        TriangulationModel model(build_rotation_basis(n_max));
        CsvTable classes{{"index", "n_vertices", "genus"}, {}};
        for (std::size_t i = 0; i < model.basis().dim(); ++i) {
            const auto& g = model.basis().graph(i);
            classes.add_row({std::to_string(i), std::to_string(g.n_vertices()),
                             std::to_string(rotation_genus(g))});
        }
        ctx.write_table("graph_classes.csv", classes);

        // Genus histogram over all accepted moves from the sphere seed.
        std::map<std::uint32_t, std::size_t> histogram;
        for_each_accepted_move(rotation_sphere(),
                               [&](const std::array<std::size_t, 3>&, std::size_t,
                                   const RotationGraph& out) { ++histogram[rotation_genus(out)]; });
        CsvTable hist{{"genus", "moves"}, {}};
        for (const auto& [g, c] : histogram)
            hist.add_row({std::to_string(g), std::to_string(c)});
        ctx.write_table("graph_genus_histogram.csv", hist);

        const auto h = model.hamiltonian(lambda);
        ctx.summary["hermitian"] = h.matrix().is_hermitian();
        const auto rep = class_function_report(model);
        ctx.summary["class_function_consistent"] = rep.consistent;
        CsvTable blocks{{"source_n", "source_genus", "target_n", "target_genus", "direction",
                         "member", "sum"},
                        {}};
        for (const auto& b : rep.blocks) {
            const auto& gs = rep.groups[b.source_group];
            const auto& gt = rep.groups[b.target_group];
            for (std::size_t k = 0; k < b.forward_sums.size(); ++k)
                blocks.add_row({std::to_string(gs.n_vertices), std::to_string(gs.genus),
                                std::to_string(gt.n_vertices), std::to_string(gt.genus),
                                "forward", std::to_string(gs.members[k]),
                                std::to_string(b.forward_sums[k])});
            for (std::size_t k = 0; k < b.reverse_sums.size(); ++k)
                blocks.add_row({std::to_string(gs.n_vertices), std::to_string(gs.genus),
                                std::to_string(gt.n_vertices), std::to_string(gt.genus),
                                "reverse", std::to_string(gt.members[k]),
                                std::to_string(b.reverse_sums[k])});
        }
        ctx.write_table("graph_class_functions.csv", blocks);
    } else {
        throw std::runtime_error("graph family must be meanfield or triangulation");
    }
}

// ------------------------------------------------------------- selfcheck --

void run_selfcheck(Context& ctx) {
    ctx.setup_done = true;
    std::vector<std::pair<std::string, std::string>> verdicts;
    auto check = [&](const std::string& name, auto&& fn) {
        try {
            fn();
            verdicts.emplace_back(name, "pass");
        } catch (const std::exception& e) {
            verdicts.emplace_back(name, std::string("FAIL: ") + e.what());
        }
    };

    Alphabet a({"a"});
    RuleSet r1(a, {{a.parse("a"), a.parse("aa"), {1.0, 0.0}},
                   {a.parse("aa"), a.parse("a"), {1.0, 0.0}}});

    check("word_core", [&] {
        TruncatedWordSpace s(a, 6);
        if (s.dim() != 7) throw std::runtime_error("dimension formula");
        if (a.format(a.parse("\xce\xb5")) != "\xce\xb5")
            throw std::runtime_error("empty word round trip");
    });
    check("operator_forge", [&] {
        TruncatedWordSpace s(a, 6);
        const auto h = build_hamiltonian(s, r1);
        if (!h.matrix().is_hermitian()) throw std::runtime_error("hermiticity");
        std::vector<Complex> e0(s.dim(), Complex{0.0, 0.0});
        e0[s.index_of({})] = 1.0;
        for (const auto& v : h.matrix().apply(e0))
            if (v != Complex{0.0, 0.0}) throw std::runtime_error("vacuum must be fixed");
    });
    check("evolution", [&] {
        TruncatedWordSpace s(a, 8);
        const auto h = build_hamiltonian(s, r1);
        std::vector<Complex> psi(s.dim(), Complex{0.0, 0.0});
        psi[s.index_of(a.parse("a"))] = 1.0;
        if (std::abs(vec_norm(evolve_state(h, psi, 1.0)) - 1.0) > 1e-10)
            throw std::runtime_error("unitarity");
    });
    check("thermal_cluster", [&] {
        const auto z = partition_function(a, r1, 6, 0.0);
        if (std::abs(z.value - 7.0) > 1e-12) throw std::runtime_error("counting at beta=0");
        ClusterOptions copt;
        copt.k_max = 4;
        const auto rep = factorization_check(3, r1, 0.1, copt);
        if (!(rep.max_residual < 1e-12)) throw std::runtime_error("factorization");
    });
    check("renorm_spin", [&] {
        // Length-conserving rules keep the sector invariant, so the outer
        // route and the sector-only route must agree exactly.
        Alphabet two({"1", "2"});
        RuleSet sc(two, {{two.parse("12"), two.parse("21"), {1.0, 0.0}},
                         {two.parse("21"), two.parse("12"), {1.0, 0.0}}});
        Eigen::MatrixXcd proj = Eigen::MatrixXcd::Zero(4, 4);
        proj(0, 0) = 1.0; // projector onto "11" on two adjacent sites
        SpinObservable obs{-1, 2, proj};
        const auto v = renormalized_state(sc, 0.3, 1, obs, 7);
        const auto w = sector_gibbs_expectation(sc, 0.3, 1, obs);
        if (std::abs(v.value - w.value) > 1e-10) throw std::runtime_error("two-route mismatch");
    });
    check("sectors_and_derivations", [&] {
        Alphabet two({"1", "2"});
        RuleSet f2(two, {{two.parse("1"), two.parse("11"), {1.0, 0.0}},
                         {two.parse("11"), two.parse("1"), {1.0, 0.0}},
                         {two.parse("2"), two.parse("22"), {1.0, 0.0}},
                         {two.parse("22"), two.parse("2"), {1.0, 0.0}}});
        TruncatedWordSpace s(two, 4);
        const auto dec = reachability_sectors(s, f2);
        const auto h = build_hamiltonian(s, f2);
        if (!sectors_are_invariant(h, dec)) throw std::runtime_error("block invariance");
        if (!one_particle_compare(1.0, 6).equal_after_shift)
            throw std::runtime_error("index-shift agreement");
    });
    check("graph_rewrite", [&] {
        if (rotation_genus(rotation_sphere()) != 0 || rotation_genus(rotation_torus()) != 1)
            throw std::runtime_error("genus oracles");
        MeanFieldModel model(build_meanfield_basis(4));
        if (!model.hamiltonian(1.0, 1.0).matrix().is_hermitian())
            throw std::runtime_error("mean-field hermiticity");
    });
    check("cli_harness", [&] {
        ConfigFile cfg = ConfigFile::parse("[x]\nkey = 1\n");
        if (cfg.get_integer("x", "key") != 1) throw std::runtime_error("config parse");
        std::istringstream bad("alphabet a\nrule a aa 1\n");
        try {
            load_rules(bad);
            throw std::runtime_error("corrupt rule file accepted");
        } catch (const std::runtime_error& e) {
            if (std::string(e.what()).find("rule lines take") == std::string::npos) throw;
        }
    });

    CsvTable table{{"module", "verdict"}, {}};
    bool all_pass = true;
    for (const auto& [name, verdict] : verdicts) {
        std::cout << name << ": " << verdict << "\n";
        table.add_row({name, verdict});
        if (verdict != "pass") all_pass = false;
    }
    ctx.write_table("selfcheck.csv", table);
    if (!all_pass) throw NumericalError("selfcheck found failures");
}

void write_manifest(Context& ctx, const std::string& subcommand, double wall_seconds) {
    json manifest;
    manifest["tool"] = "qgram";
    manifest["version"] = version_string;
    manifest["subcommand"] = subcommand;
    manifest["config_path"] = ctx.config_path;
    manifest["config_hash"] = hex64(ctx.cfg.hash());
    json cfg = json::object();
    for (const auto& [section, entries] : ctx.cfg.sections()) {
        json s = json::object();
        for (const auto& [k, v] : entries) s[k] = v;
        cfg[section.empty() ? "(top)" : section] = s;
    }
    manifest["config"] = cfg;
    manifest["seed"] = ctx.seed;
    manifest["outputs"] = ctx.outputs;
    manifest["summary"] = ctx.summary;
    manifest["wall_seconds"] = wall_seconds; // the one field that may differ between runs
    std::ofstream out(ctx.out_dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantum grammar laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    long threads = 1;
    Context ctx;
    app.add_option("--config", config_path, "experiment configuration file");
    app.add_option("--out", out_dir, "output directory (created if missing)");
    app.add_option("--threads", threads, "BLAS worker cap");
    auto* seed_opt = app.add_option("--seed", ctx.seed, "override the stochastic seed");
    auto* tol_opt = app.add_option("--tol", ctx.tol, "override the tolerance");

    const std::vector<std::pair<std::string, void (*)(Context&)>> subcommands = {
        {"evolve", run_evolve},       {"heisenberg", run_heisenberg},
        {"thermal", run_thermal},     {"cluster", run_cluster},
        {"mu-scan", run_mu_scan},     {"measure", run_measure},
        {"renorm", run_renorm},       {"sectors", run_sectors},
        {"jacobi", run_jacobi},       {"derive", run_derive},
        {"graph", run_graph},         {"selfcheck", run_selfcheck},
    };
    // Options may follow the subcommand name; they all live on the parent.
    for (const auto& [name, fn] : subcommands) app.add_subcommand(name)->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (threads < 1) threads = 1;
    setenv("OPENBLAS_NUM_THREADS", std::to_string(threads).c_str(), 1);
    setenv("OMP_NUM_THREADS", std::to_string(threads).c_str(), 1);

    const std::string name = app.get_subcommands().front()->get_name();
    void (*run)(Context&) = nullptr;
    for (const auto& [n, fn] : subcommands)
        if (n == name) run = fn;

    const auto start = std::chrono::steady_clock::now();
    try {
        if (name != "selfcheck" && name != "jacobi") {
            if (config_path.empty())
                throw std::runtime_error("this subcommand needs --config");
            ctx.cfg = ConfigFile::load(config_path);
        } else if (!config_path.empty()) {
            ctx.cfg = ConfigFile::load(config_path);
        }
        ctx.config_path = config_path;
        ctx.seed_given = seed_opt->count() > 0;
        ctx.tol_given = tol_opt->count() > 0;
        ctx.out_dir = out_dir;
        fs::create_directories(ctx.out_dir);
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    try {
        run(ctx);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        if (ctx.setup_done) {
            std::cerr << "numerical failure: " << e.what() << "\n";
            return 3;
        }
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(ctx, name, wall);
    return 0;
}
