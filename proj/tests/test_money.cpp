#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "weir/errors.hpp"
#include "weir/money.hpp"

using namespace weir;

TEST_CASE("money parses and renders fixed-point decimals") {
  CHECK(Money::parse("0.13").micros() == 130000);
  CHECK(Money::parse("0").micros() == 0);
  CHECK(Money::parse("2").micros() == 2'000'000);
  CHECK(Money::parse("-0.000001").micros() == -1);
  CHECK(Money::parse("0.5").to_string() == "0.5000");
  CHECK(Money::from_micros(130000).to_string() == "0.1300");
  CHECK(Money::from_micros(130000).to_string(6) == "0.130000");
  CHECK(Money::from_micros(1).to_string(6) == "0.000001");
  // rendering at 4 digits rounds half-up
  CHECK(Money::from_micros(50).to_string() == "0.0001");
  CHECK(Money::from_micros(49).to_string() == "0.0000");
  CHECK_THROWS_AS(Money::parse("abc"), Error);
  CHECK_THROWS_AS(Money::parse("0.0000001"), Error);  // finer than 6 digits
}

TEST_CASE("money arithmetic is exact and divide rounds half-up") {
  Money a = Money::from_micros(100000);
  Money b = Money::from_micros(30000);
  CHECK((a + b).micros() == 130000);
  CHECK((a - b).micros() == 70000);

  CHECK(Money::divide(Money::from_micros(10), 4).micros() == 3);   // 2.5 -> 3
  CHECK(Money::divide(Money::from_micros(9), 4).micros() == 2);    // 2.25 -> 2
  CHECK(Money::divide(Money::from_micros(8), 8).micros() == 1);
  CHECK(Money::divide(Money::from_micros(-10), 4).micros() == -3);
  CHECK_THROWS_AS(Money::divide(a, 0), Error);
}

TEST_CASE("token prices hold 12 fractional digits exactly") {
  CHECK(TokenPrice::parse("0.0000005").picos() == 500000);    // $0.50 per 1M tokens
  CHECK(TokenPrice::parse("0.00001").picos() == 10'000'000);  // $10 per 1M tokens
  CHECK(TokenPrice::parse("0").picos() == 0);
  CHECK(TokenPrice::parse("0.0000005").to_string() == "0.0000005");
  CHECK(TokenPrice::parse("0").to_string() == "0");
  CHECK_THROWS_AS(TokenPrice::parse("-0.01"), Error);
  CHECK_THROWS_AS(TokenPrice::parse("0.0000000000001"), Error);  // 13 digits
}

TEST_CASE("decimal parses common score shapes") {
  auto d = Decimal::parse("0.55");
  REQUIRE(d.has_value());
  CHECK(d->mantissa == 55);
  CHECK(d->exponent == -2);

  CHECK(Decimal::parse("1e3")->mantissa == 1);
  CHECK(Decimal::parse("1e3")->exponent == 3);
  CHECK(Decimal::parse("0.500")->mantissa == 5);   // normalized
  CHECK(Decimal::parse("0.500")->exponent == -1);
  CHECK(Decimal::parse("  42 ")->mantissa == 42);
  CHECK(Decimal::parse("-3.25")->mantissa == -325);
  CHECK_FALSE(Decimal::parse("abc").has_value());
  CHECK_FALSE(Decimal::parse("").has_value());
  CHECK_FALSE(Decimal::parse("1e").has_value());
}

TEST_CASE("decimal comparison is exact where doubles are not") {
  // 10*(0.55-0.50) == 0.5 exactly; with IEEE doubles the same expression
  // compares strictly greater
  const Decimal a = *Decimal::parse("0.55");
  const Decimal b = *Decimal::parse("0.5");
  CHECK(compare(a, b) == 1);
  CHECK(compare(b, a) == -1);
  CHECK(compare(a, a) == 0);
  CHECK(compare(*Decimal::parse("0.50"), *Decimal::parse("0.5")) == 0);
  CHECK(compare(*Decimal::parse("1e20"), *Decimal::parse("99")) == 1);
  CHECK(compare(*Decimal::parse("-1e20"), *Decimal::parse("-99")) == -1);
  CHECK(compare(*Decimal::parse("0"), *Decimal::parse("-0")) == 0);
}

TEST_CASE("decimal to_string renders plain decimals") {
  CHECK(Decimal::parse("0.9")->to_string() == "0.9");
  CHECK(Decimal::parse("85.3")->to_string() == "85.3");
  CHECK(Decimal::parse("-0.125")->to_string() == "-0.125");
  CHECK(Decimal::parse("120")->to_string() == "120");
  CHECK(Decimal::from_double(0.55).to_string() == "0.55");
}
