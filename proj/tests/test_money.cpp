#include "clawtrace/money.hpp"

#include "doctest.h"

#include "clawtrace/errors.hpp"

using namespace clawtrace;

TEST_CASE("money parses and renders exact decimals") {
  CHECK(Money::parse("2.00").pico() == 2'000'000'000'000LL);
  CHECK(Money::parse("0.057985").pico() == 57'985'000'000LL);
  CHECK(Money::parse("0.5").to_string() == "0.5");
  CHECK(Money::parse("0.068").to_string() == "0.068");
  CHECK(Money::parse("0").to_string() == "0.0");
  CHECK(Money::parse("-0.25").to_string() == "-0.25");
  CHECK(Money::parse("0.057985").to_fixed6() == "0.057985");
  CHECK(Money::parse("3").to_fixed6() == "3.000000");
}

TEST_CASE("money parse rejects junk") {
  CHECK_THROWS_AS(Money::parse(""), ConfigError);
  CHECK_THROWS_AS(Money::parse("abc"), ConfigError);
  CHECK_THROWS_AS(Money::parse("1."), ConfigError);
  CHECK_THROWS_AS(Money::parse("1.0000000000001"), ConfigError);  // 13 digits
  CHECK_THROWS_AS(Money::parse("1.0x"), ConfigError);
}

TEST_CASE("per-token rate conversion is exact") {
  CHECK(Money::parse("2.00").pico_per_token_from_per_million() == 2'000'000);
  CHECK(Money::parse("0.50").pico_per_token_from_per_million() == 500'000);
  CHECK(Money::parse("8.00").pico_per_token_from_per_million() == 8'000'000);
  CHECK_THROWS_AS(Money::parse("0.0000000001").pico_per_token_from_per_million(),
                  ConfigError);
}

TEST_CASE("token_cost multiplies exactly") {
  CHECK(token_cost(2'000'000, 1'000'000).to_string() == "2.0");
  CHECK(token_cost(500'000, 3).pico() == 1'500'000);  // $1.5e-6
  CHECK(token_cost(500'000, 0).pico() == 0);
}

TEST_CASE("money round trips its own rendering") {
  for (const char* text : {"0.0", "0.068", "2.0", "0.057985", "123.456789",
                           "0.000001", "0.000000000001"}) {
    CHECK(Money::parse(text).to_string() == text);
  }
}
