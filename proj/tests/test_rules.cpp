#include <catch2/catch_amalgamated.hpp>

#include <optional>
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

RuleSet exchange_rules() {
    Alphabet ab({"1", "2"});
    return RuleSet(ab, {{ab.parse("12"), ab.parse("21"), {1.0, 0.0}},
                        {ab.parse("21"), ab.parse("12"), {1.0, 0.0}}});
}

RuleSet complex_rules() {
    Alphabet ab({"a", "b"});
    return RuleSet(ab, {{ab.parse("a"), ab.parse("ab"), {0.2, 0.5}},
                        {ab.parse("ab"), ab.parse("a"), {0.2, -0.5}},
                        {ab.parse("ba"), ab.parse("ab"), {0.0, 0.75}},
                        {ab.parse("ab"), ab.parse("ba"), {0.0, -0.75}}});
}

} // namespace

TEST_CASE("rule set construction validates its inputs", "[rules]") {
    Alphabet a({"a"});
    REQUIRE_THROWS_AS(RuleSet(a, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(RuleSet(a, {{Word{}, a.parse("a"), {1.0, 0.0}}}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(RuleSet(a, {{Word{1}, a.parse("a"), {1.0, 0.0}}}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(RuleSet(a, {{a.parse("a"), Word{1}, {1.0, 0.0}}}),
                      std::invalid_argument);
    // An erasing rule (empty rhs) is legal, but its adjoint would need an
    // empty lhs, so closure is impossible for it.
    RuleSet erase(a, {{a.parse("a"), Word{}, {1.0, 0.0}}});
    REQUIRE(erase.size() == 1);
    REQUIRE(!erase.is_hermitian_closed());
    REQUIRE_THROWS_AS(erase.hermitian_closure(), std::invalid_argument);
}

TEST_CASE("growth, shrink and amplitude bounds", "[rules]") {
    auto fock = fock_rules();
    REQUIRE(fock.growth_bound() == 1);
    REQUIRE(fock.shrink_bound() == 1);
    REQUIRE(fock.lambda_max() == 1.0);
    REQUIRE(fock.max_rhs_length() == 2);

    // Length-preserving rules still report growth 1: the clamp keeps the
    // convergence-radius formulas finite.
    auto exch = exchange_rules();
    REQUIRE(exch.growth_bound() == 1);
    REQUIRE(exch.shrink_bound() == 0);

    auto cplx = complex_rules();
    REQUIRE(cplx.lambda_max() == Catch::Approx(0.75));
}

TEST_CASE("Hermitian closure is a multiset condition", "[rules]") {
    Alphabet a({"a"});
    RuleSet open(a, {{a.parse("a"), a.parse("aa"), {0.5, 0.25}}});
    REQUIRE(!open.is_hermitian_closed());
    REQUIRE(open.closure_defect() == std::vector<std::size_t>{0});

    auto closed = open.hermitian_closure();
    REQUIRE(closed.size() == 2);
    REQUIRE(closed.is_hermitian_closed());
    REQUIRE(closed.rule(1).lhs == a.parse("aa"));
    REQUIRE(closed.rule(1).rhs == a.parse("a"));
    REQUIRE(closed.rule(1).amplitude == Complex{0.5, -0.25});

    // Two copies of a rule need two adjoints, not one.
    RuleSet doubled(a, {{a.parse("a"), a.parse("aa"), {1.0, 0.0}},
                        {a.parse("a"), a.parse("aa"), {1.0, 0.0}},
                        {a.parse("aa"), a.parse("a"), {1.0, 0.0}}});
    REQUIRE(doubled.closure_defect().size() == 1);
    REQUIRE(doubled.hermitian_closure().is_hermitian_closed());

    // A self-adjoint rule (palindromic with real amplitude) closes alone.
    Alphabet ab({"1", "2"});
    RuleSet swap(ab, {{ab.parse("12"), ab.parse("12"), {2.0, 0.0}}});
    REQUIRE(swap.is_hermitian_closed());

    REQUIRE(fock_rules().is_hermitian_closed());
    REQUIRE(complex_rules().is_hermitian_closed());
}

TEST_CASE("rule application uses 1-based positions", "[rules]") {
    Alphabet a({"a", "b"});
    SubstitutionRule rule{a.parse("ab"), a.parse("b"), {1.0, 0.0}};
    Word w = a.parse("aab");

    REQUIRE(!apply_rule(w, rule, 0).has_value());
    REQUIRE(!apply_rule(w, rule, 1).has_value()); // "aa" != "ab"
    REQUIRE(apply_rule(w, rule, 2).value() == a.parse("ab"));
    REQUIRE(!apply_rule(w, rule, 3).has_value()); // lhs runs past the end

    auto apps = enumerate_applications(a.parse("abab"), RuleSet(a, {rule}));
    REQUIRE(apps.size() == 2);
    REQUIRE(apps[0].rule == 0);
    REQUIRE(apps[0].position == 1);
    REQUIRE(apps[1].position == 3);
}

TEST_CASE("cut-off Hamiltonian is exactly Hermitian", "[rules][hamiltonian]") {
    for (const RuleSet& rules :
         {fock_rules(), flip_rules(), exchange_rules(), complex_rules()}) {
        TruncatedWordSpace space(rules.alphabet(), 5);
        auto h = build_hamiltonian(space, rules);
        REQUIRE(h.matrix().is_hermitian()); // entry-for-entry, no tolerance
        // Hermiticity means exact conjugate pairing of the stored entries.
        for (const auto& e : h.matrix().entries())
            REQUIRE(h.entry(e.col, e.row) == std::conj(e.value));
    }
    // Construction refuses a rule set that is not Hermitian-closed.
    Alphabet a({"a"});
    RuleSet open(a, {{a.parse("a"), a.parse("aa"), {1.0, 0.0}}});
    TruncatedWordSpace space(a, 4);
    REQUIRE_THROWS_AS(build_hamiltonian(space, open), std::invalid_argument);
}

TEST_CASE("the empty word is annihilated by every Hamiltonian", "[rules][hamiltonian]") {
    for (const RuleSet& rules :
         {fock_rules(), flip_rules(), exchange_rules(), complex_rules()}) {
        TruncatedWordSpace space(rules.alphabet(), 4);
        for (double mu : {0.0, 0.7}) {
            auto h = build_hamiltonian(space, rules, mu);
            std::vector<Complex> e0(space.dim(), Complex{});
            e0[0] = 1.0;
            auto he0 = h.apply(e0);
            for (const auto& v : he0) REQUIRE(v == Complex{}); // exact zero
        }
    }
}

TEST_CASE("length-weighted diagonal term", "[rules][hamiltonian]") {
    // With all substitution amplitudes zero only mu * length survives.
    Alphabet a({"1", "2"});
    RuleSet free_rules(a, {{a.parse("1"), a.parse("11"), {0.0, 0.0}},
                           {a.parse("11"), a.parse("1"), {0.0, 0.0}}});
    TruncatedWordSpace space(a, 4);
    const double mu = 0.3;
    auto h = build_hamiltonian(space, free_rules, mu);
    REQUIRE(h.is_diagonal());
    for (std::size_t i = 0; i < space.dim(); ++i)
        REQUIRE(h.entry(i, i)
                == Complex{mu * static_cast<double>(space.length_at(i)), 0.0});

    // The same diagonal is what the number operator scales to.
    auto n = number_operator(space);
    REQUIRE(n.is_diagonal());
    for (std::size_t i = 0; i < space.dim(); ++i)
        REQUIRE(n.entry(i, i) == Complex{static_cast<double>(space.length_at(i)), 0.0});
}

TEST_CASE("cut-off Hamiltonians nest exactly", "[rules][hamiltonian]") {
    // H_N is the top-left block of H_{N+2}: the cutoff only removes entries
    // touching words longer than N, never changes surviving ones.
    for (const RuleSet& rules : {fock_rules(), flip_rules(), complex_rules()}) {
        TruncatedWordSpace small(rules.alphabet(), 4);
        TruncatedWordSpace large(rules.alphabet(), 6);
        auto h_small = build_hamiltonian(small, rules, 0.2);
        auto h_large = build_hamiltonian(large, rules, 0.2);
        for (std::size_t ii = 0; ii < small.dim(); ++ii)
            for (std::size_t j = 0; j < small.dim(); ++j)
                REQUIRE(h_small.entry(ii, j) == h_large.entry(ii, j));
    }
}

TEST_CASE("rule operators assemble the Hamiltonian", "[rules][hamiltonian]") {
    auto rules = complex_rules();
    TruncatedWordSpace space(rules.alphabet(), 4);
    SparseMatrix sum(space.dim());
    for (std::size_t i = 0; i < rules.size(); ++i)
        sum = sum.plus(rule_operator(space, rules.rule(i)));
    auto h = build_hamiltonian(space, rules);
    for (std::size_t ii = 0; ii < space.dim(); ++ii)
        for (std::size_t j = 0; j < space.dim(); ++j)
            REQUIRE(std::abs(sum.entry(ii, j) - h.entry(ii, j)) < 1e-15);
    // A single rule operator is generally not Hermitian.
    REQUIRE(!rule_operator(space, rules.rule(0)).is_hermitian());
}

TEST_CASE("single-entry observables map one basis vector to another", "[rules][hamiltonian]") {
    Alphabet a({"a"});
    TruncatedWordSpace space(a, 4);
    auto obs = matrix_observable(space, a.parse("aa"), a.parse("aaa"));
    std::vector<Complex> v(space.dim(), Complex{});
    v[space.index_of(a.parse("aa"))] = {2.0, 1.0};
    auto out = obs.apply(v);
    REQUIRE(out[space.index_of(a.parse("aaa"))] == Complex{2.0, 1.0});
    std::size_t nonzero = 0;
    for (const auto& x : out) nonzero += (x != Complex{});
    REQUIRE(nonzero == 1);
    REQUIRE(obs.nnz() == 1);
    // A + A* is Hermitian by construction.
    REQUIRE(obs.plus(obs.adjoint()).is_hermitian());
}

TEST_CASE("interval observables embed with identity padding", "[rules][hamiltonian]") {
    Alphabet ab({"1", "2"});
    TruncatedWordSpace space(ab, 3);

    LocalObservable sz;
    sz.first = 1;
    sz.last = 1;
    sz.mat = Eigen::MatrixXcd::Zero(2, 2);
    sz.mat(0, 0) = 1.0;
    sz.mat(1, 1) = -1.0;

    auto m = embed_observable(space, sz);
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const Word w = space.word_at(i);
        const Complex expected = w.empty() ? Complex{}
                                           : (w[0] == 0 ? Complex{1.0, 0.0}
                                                        : Complex{-1.0, 0.0});
        REQUIRE(m.entry(i, i) == expected);
    }
    REQUIRE(m.is_diagonal());

    LocalObservable bad = sz;
    bad.mat = Eigen::MatrixXcd::Zero(3, 3);
    REQUIRE_THROWS_AS(embed_observable(space, bad), std::invalid_argument);

    LocalObservable inverted;
    inverted.first = 2;
    inverted.last = 1;
    inverted.mat = Eigen::MatrixXcd::Identity(2, 2);
    REQUIRE_THROWS_AS(embed_observable(space, inverted), std::invalid_argument);
}
