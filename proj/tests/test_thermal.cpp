#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qgram/qgram.hpp"

using namespace qgram;

namespace {

RuleSet fock_rules() {
    Alphabet a({"a"});
    return RuleSet(a, {{a.parse("a"), a.parse("aa"), {1.0, 0.0}},
                       {a.parse("aa"), a.parse("a"), {1.0, 0.0}}});
}

RuleSet flip_rules() {
    Alphabet ab({"1", "2"});
    return RuleSet(ab, {{ab.parse("1"), ab.parse("11"), {1.0, 0.0}},
                        {ab.parse("11"), ab.parse("1"), {1.0, 0.0}},
                        {ab.parse("2"), ab.parse("22"), {1.0, 0.0}},
                        {ab.parse("22"), ab.parse("2"), {1.0, 0.0}}});
}

RuleSet free_rules(std::size_t r) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < r; ++i) names.push_back(std::to_string(i + 1));
    Alphabet a(names);
    return RuleSet(a, {{a.parse("1"), a.parse("11"), {0.0, 0.0}},
                       {a.parse("11"), a.parse("1"), {0.0, 0.0}}});
}

} // namespace

TEST_CASE("infinite-temperature trace counts the basis", "[thermal]") {
    // Z_N(0) = dim = (r^{N+1} - 1)/(r - 1), or N + 1 for one letter.
    auto fock = fock_rules();
    auto z1 = partition_function(fock.alphabet(), fock, 10, 0.0);
    REQUIRE(z1.method == "exact-dim");
    REQUIRE(z1.value == 11.0);

    auto flip = flip_rules();
    auto z2 = partition_function(flip.alphabet(), flip, 8, 0.0);
    REQUIRE(z2.value == 511.0);

    auto free3 = free_rules(3);
    auto z3 = partition_function(free3.alphabet(), free3, 10, 0.0);
    REQUIRE(z3.value == 88573.0);

    // The operator overload agrees on a built space.
    TruncatedWordSpace space(fock.alphabet(), 6);
    auto h = build_hamiltonian(space, fock);
    auto z = partition_function(h, 0.0);
    REQUIRE(z.method == "exact-dim");
    REQUIRE(z.value == 7.0);
}

TEST_CASE("partition values match the frozen references", "[thermal]") {
    auto rules = fock_rules();
    auto z = partition_function(rules.alphabet(), rules, 6, 0.2);
    REQUIRE(z.method == "dense");
    REQUIRE(z.value == Catch::Approx(9.5036409000435569).epsilon(1e-12));

    auto zmu = partition_function(rules.alphabet(), rules, 6, 0.2, 0.3);
    REQUIRE(zmu.value == Catch::Approx(7.7908011404760948).epsilon(1e-12));
}

TEST_CASE("vanishing amplitudes reduce the trace to a geometric sum", "[thermal]") {
    auto rules = free_rules(2);
    const double beta = 1.0, mu = 0.75;
    const double q = 2.0 * std::exp(-beta * mu);

    auto z = partition_function(rules.alphabet(), rules, 30, beta, mu);
    REQUIRE(z.method == "exact-diagonal");
    double expected = 0.0;
    for (int n = 0; n <= 30; ++n) expected += std::pow(q, n);
    REQUIRE(z.value == Catch::Approx(expected).epsilon(1e-12));

    // The closed form never builds the space, so huge cutoffs stay cheap.
    auto big = partition_function(rules.alphabet(), rules, 2000, beta, mu);
    REQUIRE(big.value == Catch::Approx((1.0 - std::pow(q, 2001)) / (1.0 - q)).epsilon(1e-12));

    // Route agreement against the built diagonal operator.
    TruncatedWordSpace space(rules.alphabet(), 8);
    auto h = build_hamiltonian(space, rules, mu);
    REQUIRE(h.is_diagonal());
    auto zd = partition_function(h, beta);
    REQUIRE(zd.method == "exact-diagonal");
    auto z8 = partition_function(rules.alphabet(), rules, 8, beta, mu);
    REQUIRE(zd.value == Catch::Approx(z8.value).epsilon(1e-13));
}

TEST_CASE("trace routes agree and announce themselves", "[thermal]") {
    auto rules = flip_rules();
    TruncatedWordSpace space(rules.alphabet(), 5); // dim 63
    auto h = build_hamiltonian(space, rules);
    const double beta = 0.3;

    ThermalOptions dense_opt;
    dense_opt.method = "dense";
    auto dense = partition_function(h, beta, dense_opt);
    REQUIRE(dense.method == "dense");
    REQUIRE(dense.std_error == 0.0);

    ThermalOptions series_opt;
    series_opt.method = "series";
    auto series = partition_function(h, beta, series_opt);
    REQUIRE(series.method == "series");
    REQUIRE(series.value == Catch::Approx(dense.value).epsilon(1e-8));

    ThermalOptions sto_opt;
    sto_opt.method = "stochastic";
    sto_opt.probes = 32;
    auto sto = partition_function(h, beta, sto_opt);
    REQUIRE(sto.method == "stochastic");
    REQUIRE(sto.std_error > 0.0);
    REQUIRE(std::abs(sto.value - dense.value)
            < std::max(6.0 * sto.std_error, 0.05 * dense.value));

    // Same seed reproduces the estimate bit for bit; a new seed moves it.
    auto sto_again = partition_function(h, beta, sto_opt);
    REQUIRE(sto_again.value == sto.value);
    sto_opt.seed = 99;
    auto sto_other = partition_function(h, beta, sto_opt);
    REQUIRE(sto_other.value != sto.value);

    // Auto picks dense at this dimension.
    auto self = partition_function(h, beta);
    REQUIRE(self.method == "dense");

    ThermalOptions bogus;
    bogus.method = "bogus";
    REQUIRE_THROWS_AS(partition_function(h, beta, bogus), std::invalid_argument);
    ThermalOptions exact_only;
    exact_only.method = "exact";
    REQUIRE_THROWS_AS(partition_function(h, beta, exact_only), std::invalid_argument);
}

TEST_CASE("series trace refuses large dimensions", "[thermal]") {
    Alphabet abc({"1", "2", "3"});
    RuleSet rules(abc, {{abc.parse("12"), abc.parse("21"), {1.0, 0.0}},
                        {abc.parse("21"), abc.parse("12"), {1.0, 0.0}}});
    TruncatedWordSpace space(abc, 6); // dim 1093 > 1024
    auto h = build_hamiltonian(space, rules);
    ThermalOptions opt;
    opt.method = "series";
    REQUIRE_THROWS_AS(partition_function(h, 0.1, opt), std::invalid_argument);
}

TEST_CASE("the trace grows with the cutoff", "[thermal]") {
    // Compression eigenvalues interlace, so each enlargement can only add
    // Gibbs weight.
    auto rules = fock_rules();
    double prev = 0.0;
    for (std::size_t n = 3; n <= 8; ++n) {
        auto z = partition_function(rules.alphabet(), rules, n, 0.2);
        REQUIRE(z.value > prev);
        prev = z.value;
    }
}

TEST_CASE("thermal averages normalize the identity", "[thermal]") {
    auto rules = flip_rules();
    TruncatedWordSpace space(rules.alphabet(), 4);
    auto h = build_hamiltonian(space, rules);
    auto one = SparseMatrix::identity(space.dim());
    auto r = thermal_expectation(h, one, 0.4);
    REQUIRE(r.method == "dense");
    REQUIRE(r.value == Catch::Approx(1.0).margin(1e-13));
    REQUIRE(r.z == Catch::Approx(partition_function(h, 0.4).value).epsilon(1e-10));

    auto small = SparseMatrix::identity(space.dim() - 1);
    REQUIRE_THROWS_AS(thermal_expectation(h, small, 0.4), std::invalid_argument);

    // The stochastic route also normalizes the identity exactly: numerator
    // and denominator use the same probe vectors.
    ThermalOptions sto;
    sto.method = "stochastic";
    sto.probes = 8;
    auto rs = thermal_expectation(h, one, 0.4, sto);
    REQUIRE(rs.method == "stochastic");
    REQUIRE(rs.value == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("length distribution from the Gibbs diagonal", "[thermal]") {
    auto rules = flip_rules();
    TruncatedWordSpace space(rules.alphabet(), 3);
    auto h = build_hamiltonian(space, rules);

    // At infinite temperature the measure is proportional to sector sizes.
    auto uniform = diagonal_measure(space, h, 0.0);
    REQUIRE(uniform.probability.size() == 4);
    double total = 0.0;
    for (double p : uniform.probability) total += p;
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(uniform.probability[3] == Catch::Approx(8.0 / 15.0).epsilon(1e-12));
    REQUIRE(uniform.mean_length == Catch::Approx(34.0 / 15.0).epsilon(1e-12));

    auto warm = diagonal_measure(space, h, 0.1);
    total = 0.0;
    for (double p : warm.probability) total += p;
    REQUIRE(total == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(warm.mean_length == mean_word_length(space, h, 0.1));

    TruncatedWordSpace other(rules.alphabet(), 4);
    REQUIRE_THROWS_AS(diagonal_measure(other, h, 0.1), std::invalid_argument);
}

TEST_CASE("weak interaction keeps the length measure near its ceiling", "[thermal]") {
    // Small beta: the counting measure dominates and the mean length stays
    // above 0.7 N.
    auto rules = flip_rules();
    TruncatedWordSpace space(rules.alphabet(), 8);
    auto h = build_hamiltonian(space, rules);
    auto m = diagonal_measure(space, h, 0.02);
    REQUIRE(m.mean_length > 0.7 * 8.0);
}

TEST_CASE("line fit recovers exact lines", "[thermal]") {
    std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
    std::vector<double> ys{3.0, 5.0, 7.0, 9.0};
    auto fit = linear_fit(xs, ys);
    REQUIRE(fit.slope == Catch::Approx(2.0).epsilon(1e-14));
    REQUIRE(fit.intercept == Catch::Approx(1.0).epsilon(1e-14));
    REQUIRE(fit.r_squared == Catch::Approx(1.0).margin(1e-14));

    REQUIRE_THROWS_AS(linear_fit({1.0}, {2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(linear_fit({1.0, 2.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("growth study separates converging and diverging weights", "[thermal]") {
    auto rules = free_rules(2);
    const double beta = 1.0;

    // q = 2 e^{-mu} < 1: the trace converges to the geometric limit.
    auto conv = growth_rate(rules.alphabet(), rules, 64, 128, beta, 0.75);
    REQUIRE(conv.verdict == GrowthVerdict::converges);
    const double q = 2.0 * std::exp(-0.75);
    REQUIRE(conv.limit == Catch::Approx(1.0 / (1.0 - q)).epsilon(1e-6));
    REQUIRE(std::string(to_string(conv.verdict)) == "converges");

    // q > 1: log Z grows linearly in the cutoff.
    auto div = growth_rate(rules.alphabet(), rules, 64, 128, beta, 0.6);
    REQUIRE(div.verdict == GrowthVerdict::diverges_linearly);
    REQUIRE(std::string(to_string(div.verdict)) == "diverges-linearly");

    REQUIRE_THROWS_AS(growth_rate(rules.alphabet(), rules, 5, 6, beta, 0.0),
                      std::invalid_argument);
}

TEST_CASE("interacting free energy grows linearly in the cutoff", "[thermal]") {
    auto rules = flip_rules();
    // Six cutoffs so the trailing-half fit has three points to work with.
    auto rep = growth_rate(rules.alphabet(), rules, 5, 10, 0.1);
    REQUIRE(rep.verdict == GrowthVerdict::diverges_linearly);
    REQUIRE(rep.slope > 0.6);
    REQUIRE(rep.slope < 0.8);
    REQUIRE(rep.values.size() == 6);
    REQUIRE(rep.methods.front() == "dense");
}

TEST_CASE("fugacity scan brackets the critical point", "[thermal]") {
    // Free weights: Z converges iff mu > ln 2, so the flip brackets ln 2.
    auto rules = free_rules(2);
    auto scan = critical_mu_scan(rules.alphabet(), rules, 64, 2000, 1.0, 0.4, 1.0, 0.05);
    REQUIRE(scan.bracketed);
    REQUIRE(scan.mu_lo == Catch::Approx(0.65).margin(1e-9));
    REQUIRE(scan.mu_hi == Catch::Approx(0.70).margin(1e-9));
    REQUIRE(scan.mu_lo < std::log(2.0));
    REQUIRE(scan.mu_hi > std::log(2.0));
    REQUIRE(scan.mus.size() == scan.verdicts.size());

    REQUIRE_THROWS_AS(
        critical_mu_scan(rules.alphabet(), rules, 64, 128, 1.0, 0.4, 1.0, 0.0),
        std::invalid_argument);
}
