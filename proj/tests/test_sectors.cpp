#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "qgram/qgram.hpp"

using namespace qgram;

namespace {

// i -> ii and ii -> i for every letter of an r-symbol alphabet.
RuleSet flip_rules(std::size_t r) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < r; ++i) names.push_back(std::to_string(i + 1));
    Alphabet a(names);
    std::vector<SubstitutionRule> rules;
    for (std::uint32_t i = 0; i < r; ++i) {
        rules.push_back({{i}, {i, i}, {1.0, 0.0}});
        rules.push_back({{i, i}, {i}, {1.0, 0.0}});
    }
    return RuleSet(a, std::move(rules));
}

RuleSet wall_rules() {
    Alphabet aw({"a", "w"});
    return RuleSet(aw, {{aw.parse("a"), aw.parse("aa"), {1.0, 0.0}},
                        {aw.parse("aa"), aw.parse("a"), {1.0, 0.0}},
                        {aw.parse("aw"), aw.parse("wa"), {1.0, 0.0}},
                        {aw.parse("wa"), aw.parse("aw"), {1.0, 0.0}}});
}

std::size_t count_letter(const Word& w, std::uint32_t s) {
    std::size_t c = 0;
    for (auto x : w) c += (x == s);
    return c;
}

} // namespace

TEST_CASE("block patterns compress constant runs", "[sectors]") {
    Alphabet ab({"1", "2"});
    REQUIRE(block_pattern(ab.parse("1122")) == ab.parse("12"));
    REQUIRE(block_pattern(ab.parse("111")) == ab.parse("1"));
    REQUIRE(block_pattern(ab.parse("1212")) == ab.parse("1212"));
    REQUIRE(block_pattern(Word{}).empty());
}

TEST_CASE("reachability classes count block patterns", "[sectors]") {
    // For the per-letter grow/shrink rules two words connect exactly when
    // their block patterns agree, so the number of classes with a length-n
    // representative is the pattern count r (r-1)^{n-1}.
    for (std::size_t r : {2u, 3u}) {
        auto rules = flip_rules(r);
        std::vector<std::size_t> expected{1}; // the isolated empty word
        std::size_t patterns = r;
        for (std::size_t n = 1; n <= 4; ++n) {
            expected.push_back(patterns);
            patterns *= r - 1;
        }
        std::vector<std::size_t> at5, at6;
        {
            TruncatedWordSpace space(rules.alphabet(), 5);
            at5 = class_counts_by_length(reachability_sectors(space, rules), 4);
        }
        {
            TruncatedWordSpace space(rules.alphabet(), 6);
            at6 = class_counts_by_length(reachability_sectors(space, rules), 4);
        }
        REQUIRE(at5 == expected);
        REQUIRE(at6 == expected); // stabilized: one more row of room changes nothing
    }

    // Representatives are the patterns themselves (shortest members).
    auto rules = flip_rules(2);
    TruncatedWordSpace space(rules.alphabet(), 5);
    auto dec = reachability_sectors(space, rules);
    for (const auto& c : dec.classes)
        REQUIRE(block_pattern(c.representative) == c.representative);

    // Every member of a class shares the representative's pattern.
    for (std::size_t i = 0; i < space.dim(); ++i)
        REQUIRE(block_pattern(space.word_at(i))
                == block_pattern(space.word_at(dec.label[i])));
}

TEST_CASE("classes are invariant blocks of the Hamiltonian", "[sectors]") {
    auto check = [](const RuleSet& rules, std::size_t cutoff) {
        TruncatedWordSpace space(rules.alphabet(), cutoff);
        auto dec = reachability_sectors(space, rules);
        auto h = build_hamiltonian(space, rules, 0.4);
        REQUIRE(sectors_are_invariant(h, dec));
    };
    check(flip_rules(2), 5);
    check(flip_rules(3), 4);
    check(wall_rules(), 5);

    Alphabet ab({"a", "b"});
    check(RuleSet(ab, {{ab.parse("a"), ab.parse("ab"), {0.2, 0.5}},
                       {ab.parse("ab"), ab.parse("a"), {0.2, -0.5}},
                       {ab.parse("ba"), ab.parse("ab"), {0.0, 0.75}},
                       {ab.parse("ab"), ab.parse("ba"), {0.0, -0.75}}}),
          5);

    // A scrambled decomposition is rejected by the invariance check.
    auto rules = flip_rules(2);
    TruncatedWordSpace space(rules.alphabet(), 4);
    auto dec = reachability_sectors(space, rules);
    auto h = build_hamiltonian(space, rules);
    auto broken = dec;
    broken.label[space.index_of(rules.alphabet().parse("11"))] = 0;
    REQUIRE(!sectors_are_invariant(h, broken));
}

TEST_CASE("marker letters are conserved and isolated when alone", "[sectors]") {
    // In the wall grammar every rule preserves the number of w letters.
    auto rules = wall_rules();
    TruncatedWordSpace space(rules.alphabet(), 4);
    const std::uint32_t w = rules.alphabet().index("w");

    auto h = build_hamiltonian(space, rules);
    for (const auto& e : h.matrix().entries())
        REQUIRE(count_letter(space.word_at(e.row), w)
                == count_letter(space.word_at(e.col), w));

    auto dec = reachability_sectors(space, rules);

    // All one-w words of length >= 2 form a single class: the wall commutes
    // through a letters while the a blocks grow and shrink.
    const std::size_t label = dec.label[space.index_of(rules.alphabet().parse("aw"))];
    std::size_t one_w_long = 0;
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const Word word = space.word_at(i);
        if (count_letter(word, w) == 1 && word.size() >= 2) {
            REQUIRE(dec.label[i] == label);
            ++one_w_long;
        }
    }
    REQUIRE(one_w_long == 2 + 3 + 4);

    // The bare wall has no application site at all, so it sits alone even
    // though longer one-w words interconnect.
    const std::size_t bare = space.index_of(rules.alphabet().parse("w"));
    REQUIRE(dec.label[bare] == bare);
    for (const auto& c : dec.classes)
        if (c.label == bare) REQUIRE(c.size == 1);
}

TEST_CASE("class restriction extracts the coupling ladder", "[sectors]") {
    // The all-1 class of the grow/shrink rules restricts to a tridiagonal
    // ladder whose coupling between lengths m and m+1 is the application
    // multiplicity m.
    auto rules = flip_rules(2);
    TruncatedWordSpace space(rules.alphabet(), 4);
    auto dec = reachability_sectors(space, rules);
    auto h = build_hamiltonian(space, rules);

    const std::size_t label = dec.label[space.index_of(rules.alphabet().parse("1"))];
    const Eigen::MatrixXcd sub = class_submatrix(h, dec, label);
    REQUIRE(sub.rows() == 4); // words 1, 11, 111, 1111
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) {
            const Complex expected = (j == i + 1 || i == j + 1)
                                         ? Complex{static_cast<double>(std::min(i, j) + 1), 0.0}
                                         : Complex{};
            REQUIRE(sub(i, j) == expected);
        }
}

TEST_CASE("printed ladder formula", "[sectors][jacobi]") {
    const auto j = jacobi_matrix(0.7, 6);
    REQUIRE(j.rows() == 6);
    for (Eigen::Index n = 0; n < 6; ++n) REQUIRE(j(n, n) == 0.0);
    for (Eigen::Index n = 0; n + 1 < 6; ++n) {
        REQUIRE(j(n, n + 1) == 0.7 * static_cast<double>(n));
        REQUIRE(j(n + 1, n) == j(n, n + 1));
    }
    REQUIRE_THROWS_AS(jacobi_matrix(1.0, 1), std::invalid_argument);
}

TEST_CASE("one-particle comparison reports the index discrepancy", "[sectors][jacobi]") {
    const double lambda = 1.0;
    const auto rep = one_particle_compare(lambda, 8);

    REQUIRE(rep.symmetric);
    REQUIRE(rep.diagonals_zero);
    REQUIRE(rep.multiplicity_law);

    // Brute application count behind the multiplicity law: a -> aa has m
    // sites on a^m.
    Alphabet a({"a"});
    RuleSet grow(a, {{a.parse("a"), a.parse("aa"), {lambda, 0.0}}});
    for (std::size_t m = 1; m <= 5; ++m)
        REQUIRE(enumerate_applications(Word(m, 0), grow).size() == m);

    // The printed coupling at row n is lambda n, so its first coupling is 0
    // and everything sits one step behind the direct assembly.
    REQUIRE(rep.direct_couplings.front() == lambda);
    REQUIRE(rep.printed_couplings.front() == 0.0);
    REQUIRE(!rep.equal_as_printed);
    REQUIRE(rep.equal_after_shift);
    REQUIRE(!rep.note.empty());

    // Same-size spectra differ accordingly: the printed matrix has the
    // decoupled zero mode, the direct one is the honest ladder.
    REQUIRE(rep.spectrum_direct.size() == 8);
    REQUIRE(rep.spectrum_printed.size() == 8);
    double diff = 0.0;
    for (std::size_t i = 0; i < 8; ++i)
        diff = std::max(diff, std::abs(rep.spectrum_direct[i] - rep.spectrum_printed[i]));
    REQUIRE(diff > 0.1);

    REQUIRE_THROWS_AS(one_particle_compare(1.0, 1), std::invalid_argument);
}
