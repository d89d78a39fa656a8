#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "censim/rational.hpp"

using censim::Rat;

TEST_CASE("rational arithmetic normalizes") {
    CHECK(Rat{2, 4} == Rat{1, 2});
    CHECK(Rat{-2, 4} == Rat{-1, 2});
    CHECK(Rat{2, -4} == Rat{-1, 2});
    CHECK((Rat{1, 3} + Rat{1, 6}) == Rat{1, 2});
    CHECK((Rat{7, 30} - Rat{7, 30}) == Rat{0});
    CHECK((Rat{2, 5} / Rat{3, 4}) == Rat{8, 15});
    CHECK((Rat{2, 5} * Rat{5, 2}) == Rat{1});
    CHECK(-Rat{1, 2} == Rat{-1, 2});
}

TEST_CASE("rational comparisons are exact") {
    CHECK(Rat{1, 3} < Rat{34, 100});
    CHECK(Rat{2, 3} > Rat{66, 100});
    CHECK(Rat{1, 2} <= Rat{1, 2});
    CHECK(Rat{112, 195} > Rat{2, 5}); // launcher prefers attacking in the n=3 case
}

TEST_CASE("rational edge cases") {
    CHECK_THROWS_AS((Rat{1, 0}), std::domain_error);
    CHECK_THROWS_AS(Rat{1} / Rat{0}, std::domain_error);
    const std::int64_t big = std::numeric_limits<std::int64_t>::max() / 2;
    auto square_big = [&] { return Rat(big, 1) * Rat(big, 1); };
    CHECK_THROWS_AS(square_big(), std::overflow_error);
}

TEST_CASE("rational parsing") {
    CHECK(Rat::parse("2/3") == Rat{2, 3});
    CHECK(Rat::parse("0.65") == Rat{13, 20});
    CHECK(Rat::parse("0.05") == Rat{1, 20});
    CHECK(Rat::parse("-3") == Rat{-3});
    CHECK(Rat::parse("100") == Rat{100});
    CHECK_THROWS_AS(Rat::parse("abc"), std::invalid_argument);
    CHECK_THROWS_AS(Rat::parse(""), std::invalid_argument);
}

TEST_CASE("rational arithmetic agrees with double arithmetic on random inputs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        auto draw = [&] {
            return Rat{static_cast<std::int64_t>(rng() % 201) - 100,
                       static_cast<std::int64_t>(rng() % 40) + 1};
        };
        const Rat a = draw(), b = draw();
        CHECK_THAT((a + b).to_double(),
                   Catch::Matchers::WithinAbs(a.to_double() + b.to_double(), 1e-9));
        CHECK_THAT((a * b).to_double(),
                   Catch::Matchers::WithinAbs(a.to_double() * b.to_double(), 1e-9));
        if ((a < b) != (a.to_double() < b.to_double() - 1e-12) && a != b) {
            // ordering must match whenever doubles are not borderline
            CHECK_THAT(a.to_double(), Catch::Matchers::WithinAbs(b.to_double(), 1e-9));
        }
    }
}

TEST_CASE("rational string round trip") {
    CHECK(Rat{7, 30}.str() == "7/30");
    CHECK(Rat{3}.str() == "3");
    CHECK(Rat::parse(Rat{112, 195}.str()) == Rat{112, 195});
}
