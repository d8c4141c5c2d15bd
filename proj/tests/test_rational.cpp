#include <catch2/catch_amalgamated.hpp>

#include "ncg/rational.hpp"

using ncg::Rational;

TEST_CASE("rationals reduce to lowest terms with positive denominator") {
  REQUIRE(Rational{2, 4} == Rational{1, 2});
  REQUIRE(Rational{1, -2} == Rational{-1, 2});
  REQUIRE(Rational{-6, -4} == Rational{3, 2});
  REQUIRE(Rational{0, 7}.den() == 1);
  REQUIRE(Rational{0, 7}.is_zero());
}

TEST_CASE("rational arithmetic is exact") {
  REQUIRE(Rational{1, 3} + Rational{1, 6} == Rational{1, 2});
  REQUIRE(Rational{1, 2} - Rational{1, 3} == Rational{1, 6});
  REQUIRE(Rational{3, 7} * Rational{7, 3} == Rational{1});
  REQUIRE(Rational{5} / Rational{10} == Rational{1, 2});
  REQUIRE(-Rational{3, 4} == Rational{-3, 4});

  Rational acc{0};
  for (int k = 1; k <= 10; ++k) acc += Rational{1, k};
  REQUIRE(acc == Rational{7381, 2520});
}

TEST_CASE("rational ordering compares cross products") {
  REQUIRE(Rational{1, 3} < Rational{1, 2});
  REQUIRE(Rational{-1, 2} < Rational{1, 3});
  REQUIRE(Rational{2, 4} <= Rational{1, 2});
}

TEST_CASE("zero denominators and division by zero throw") {
  REQUIRE_THROWS_AS(Rational(1, 0), std::domain_error);
  REQUIRE_THROWS_AS(Rational{1} / Rational{0}, std::domain_error);
}

TEST_CASE("overflow throws instead of wrapping") {
  Rational big{INT64_MAX / 2, 1};
  REQUIRE_THROWS_AS(big * Rational{3}, std::overflow_error);
  // 20! fits in 64 bits, 21! does not
  REQUIRE(ncg::rational_factorial(20) == Rational{2432902008176640000});
  REQUIRE_THROWS_AS(ncg::rational_factorial(21), std::overflow_error);
}

TEST_CASE("factorials and rendering") {
  REQUIRE(ncg::rational_factorial(0) == Rational{1});
  REQUIRE(ncg::rational_factorial(5) == Rational{120});
  REQUIRE(Rational{-3, 6}.str() == "-1/2");
  REQUIRE(Rational{4}.str() == "4");
  REQUIRE(Rational{1, 3}.to_double() == Catch::Approx(1.0 / 3.0));
}
