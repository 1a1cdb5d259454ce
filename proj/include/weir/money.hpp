#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace weir {

// Fixed-point money: 6 fractional digits (micro-dollars), exact integer
// arithmetic throughout. Rendered to 4 digits by default.
class Money {
 public:
  static constexpr int kFracDigits = 6;
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  static Money parse(std::string_view text);  // plain decimal, e.g. "0.13"

  constexpr std::int64_t micros() const { return micros_; }
  constexpr bool is_zero() const { return micros_ == 0; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }

  // "0.1300" with the requested number of fractional digits (half-up when
  // digits < 6).
  std::string to_string(int digits = 4) const;

  // Half-up division, used for per-run averages.
  static Money divide(Money total, std::int64_t divisor);

  constexpr Money& operator+=(Money other) {
    micros_ += other.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return Money(a.micros_ + b.micros_); }
  friend constexpr Money operator-(Money a, Money b) { return Money(a.micros_ - b.micros_); }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  explicit constexpr Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

// Exact per-token price: 12 fractional digits (picodollars per token), so
// sub-micro prices like $0.50 per million tokens stay representable.
class TokenPrice {
 public:
  static constexpr int kFracDigits = 12;
  static constexpr std::int64_t kScale = 1'000'000'000'000;

  constexpr TokenPrice() = default;

  static constexpr TokenPrice from_picos(std::int64_t picos) { return TokenPrice(picos); }
  // Exact decimal parse; rejects negative values and more than 12 fractional
  // digits.
  static TokenPrice parse(std::string_view text);

  constexpr std::int64_t picos() const { return picos_; }
  constexpr bool is_zero() const { return picos_ == 0; }
  std::string to_string() const;  // trimmed decimal, e.g. "0.0000005"

  friend constexpr auto operator<=>(TokenPrice, TokenPrice) = default;

 private:
  explicit constexpr TokenPrice(std::int64_t picos) : picos_(picos) {}
  std::int64_t picos_ = 0;
};

// Exact decimal value for evaluator scores and baselines. Success/failure at
// the 10% boundary must not depend on binary floating point.
struct Decimal {
  std::int64_t mantissa = 0;
  int exponent = 0;  // value == mantissa * 10^exponent

  static std::optional<Decimal> parse(std::string_view text);
  static Decimal from_double(double value);

  double to_double() const;
  bool is_zero() const { return mantissa == 0; }
  std::string to_string() const;

  friend bool operator==(const Decimal& a, const Decimal& b);
};

// -1, 0 or 1 comparing a against b, exactly.
int compare(const Decimal& a, const Decimal& b);

}  // namespace weir
