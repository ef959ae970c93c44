#include <catch2/catch_amalgamated.hpp>

#include "qgram/qgram.hpp"

using namespace qgram;

TEST_CASE("alphabet parses and formats words losslessly", "[word]") {
    Alphabet two({"1", "2"});
    REQUIRE(two.size() == 2);
    REQUIRE(two.format(two.parse("1212")) == "1212");
    REQUIRE(two.parse("\xce\xb5").empty());
    REQUIRE(two.format(Word{}) == "\xce\xb5");

    Alphabet multi({"ab", "cd"});
    REQUIRE(multi.format(multi.parse("abcdab")) == "abcdab");

    REQUIRE_THROWS_AS(two.parse("13"), std::invalid_argument);
    REQUIRE_THROWS_AS(Alphabet({"a", "a"}), std::invalid_argument);
    REQUIRE_THROWS_AS(Alphabet({"a", "\xce\xb5"}), std::invalid_argument);
}

TEST_CASE("cut-off space dimension follows the geometric sum", "[word]") {
    // dim = N + 1 for one letter, (r^{N+1} - 1)/(r - 1) otherwise.
    Alphabet one({"a"});
    REQUIRE(TruncatedWordSpace(one, 6).dim() == 7);
    REQUIRE(TruncatedWordSpace(one, 0).dim() == 1);

    Alphabet two({"1", "2"});
    REQUIRE(TruncatedWordSpace(two, 8).dim() == 511);

    Alphabet three({"1", "2", "3"});
    REQUIRE(TruncatedWordSpace(three, 10).dim() == 88573);
}

TEST_CASE("basis indexing round-trips and orders sectors lexicographically", "[word]") {
    Alphabet two({"1", "2"});
    TruncatedWordSpace space(two, 5);

    for (std::size_t i = 0; i < space.dim(); ++i) {
        const Word w = space.word_at(i);
        REQUIRE(space.index_of(w) == i);
        REQUIRE(space.length_at(i) == w.size());
    }

    // Sectors tile the index range in length order.
    std::size_t expected_lo = 0;
    for (std::size_t n = 0; n <= space.max_length(); ++n) {
        const auto [lo, hi] = space.sector_range(n);
        REQUIRE(lo == expected_lo);
        std::size_t count = 1;
        for (std::size_t j = 0; j < n; ++j) count *= two.size();
        REQUIRE(hi - lo == count);
        expected_lo = hi;
    }
    REQUIRE(expected_lo == space.dim());

    // Within a sector the enumeration is lexicographic in the letters.
    const auto [lo, hi] = space.sector_range(3);
    for (std::size_t i = lo + 1; i < hi; ++i)
        REQUIRE(space.word_at(i - 1) < space.word_at(i));

    REQUIRE_THROWS_AS(space.index_of(two.parse("111111")), std::out_of_range);
    REQUIRE_THROWS_AS(space.word_at(space.dim()), std::out_of_range);
    REQUIRE_THROWS_AS(space.sector_range(6), std::out_of_range);
}
