#include "weir/money.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "weir/errors.hpp"

namespace weir {

namespace {

// Parses an optionally signed decimal into (mantissa, exponent) with mantissa
// capped at 18 significant digits; surplus fractional digits are dropped.
std::optional<Decimal> parse_decimal(std::string_view text) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n && (text[i] == ' ' || text[i] == '\t')) ++i;
  std::size_t end = n;
  while (end > i && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
  if (i >= end) return std::nullopt;

  bool negative = false;
  if (text[i] == '+' || text[i] == '-') {
    negative = text[i] == '-';
    ++i;
  }

  constexpr std::int64_t kMantissaCap = 999'999'999'999'999'999LL;
  std::int64_t mantissa = 0;
  int exponent = 0;
  bool any_digit = false;
  bool seen_point = false;

  for (; i < end; ++i) {
    const char c = text[i];
    if (c >= '0' && c <= '9') {
      any_digit = true;
      if (mantissa <= (kMantissaCap - 9) / 10) {
        mantissa = mantissa * 10 + (c - '0');
        if (seen_point) --exponent;
      } else if (!seen_point) {
        ++exponent;  // digit beyond capacity before the point: keep magnitude
      }
      // fractional digits beyond capacity are truncated
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else if ((c == 'e' || c == 'E') && any_digit) {
      int exp10 = 0;
      auto [p, ec] = std::from_chars(text.data() + i + 1, text.data() + end, exp10);
      if (ec != std::errc() || p != text.data() + end) return std::nullopt;
      exponent += exp10;
      i = end;
      break;
    } else {
      return std::nullopt;
    }
  }
  if (!any_digit) return std::nullopt;

  while (mantissa != 0 && mantissa % 10 == 0) {
    mantissa /= 10;
    ++exponent;
  }
  if (mantissa == 0) exponent = 0;
  return Decimal{negative ? -mantissa : mantissa, exponent};
}

// Rescales a parsed decimal to a fixed number of fractional digits; fails if
// that would lose precision or overflow.
std::optional<std::int64_t> to_fixed(const Decimal& d, int frac_digits) {
  __int128 v = d.mantissa;
  int shift = d.exponent + frac_digits;
  if (shift < 0) return std::nullopt;  // more precision than representable
  for (; shift > 0; --shift) {
    v *= 10;
    if (v > INT64_MAX || v < INT64_MIN) return std::nullopt;
  }
  return static_cast<std::int64_t>(v);
}

std::string render_fixed(std::int64_t units, int scale_digits, int out_digits) {
  assert(out_digits >= 0 && out_digits <= scale_digits);
  bool negative = units < 0;
  unsigned long long mag = negative ? 0ULL - static_cast<unsigned long long>(units)
                                    : static_cast<unsigned long long>(units);
  // drop (scale_digits - out_digits) trailing digits in one half-up division
  unsigned long long divisor = 1;
  for (int i = scale_digits; i > out_digits; --i) divisor *= 10;
  mag = (mag + divisor / 2) / divisor;
  unsigned long long scale = 1;
  for (int i = 0; i < out_digits; ++i) scale *= 10;
  std::string whole = std::to_string(mag / scale);
  std::string out = negative && mag != 0 ? "-" + whole : whole;
  if (out_digits > 0) {
    std::string frac = std::to_string(mag % scale);
    out += "." + std::string(out_digits - frac.size(), '0') + frac;
  }
  return out;
}

}  // namespace

Money Money::parse(std::string_view text) {
  auto d = parse_decimal(text);
  if (!d) throw Error("not a decimal amount: '" + std::string(text) + "'");
  auto fixed = to_fixed(*d, kFracDigits);
  if (!fixed) throw Error("amount not representable at 6 fractional digits: '" + std::string(text) + "'");
  return Money(*fixed);
}

std::string Money::to_string(int digits) const { return render_fixed(micros_, kFracDigits, digits); }

Money Money::divide(Money total, std::int64_t divisor) {
  if (divisor == 0) throw Error("division of money by zero");
  std::int64_t q = total.micros_ / divisor;
  std::int64_t r = total.micros_ % divisor;
  if (r != 0) {
    // half-up on the magnitude
    std::int64_t r2 = r < 0 ? -r : r;
    std::int64_t d2 = divisor < 0 ? -divisor : divisor;
    if (2 * r2 >= d2) q += (total.micros_ < 0) == (divisor < 0) ? 1 : -1;
  }
  return Money(q);
}

TokenPrice TokenPrice::parse(std::string_view text) {
  auto d = parse_decimal(text);
  if (!d) throw Error("not a decimal price: '" + std::string(text) + "'");
  if (d->mantissa < 0) throw Error("negative price: '" + std::string(text) + "'");
  auto fixed = to_fixed(*d, kFracDigits);
  if (!fixed) throw Error("price not representable at 12 fractional digits: '" + std::string(text) + "'");
  return TokenPrice(*fixed);
}

std::string TokenPrice::to_string() const {
  std::string full = render_fixed(picos_, kFracDigits, kFracDigits);
  auto dot = full.find('.');
  auto last = full.find_last_not_of('0');
  if (last == dot) last = dot - 1;  // strip "." too when all zeros
  return full.substr(0, last + 1);
}

std::optional<Decimal> Decimal::parse(std::string_view text) { return parse_decimal(text); }

Decimal Decimal::from_double(double value) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return Decimal{0, 0};
  auto d = parse_decimal(std::string_view(buf, p - buf));
  return d ? *d : Decimal{0, 0};
}

double Decimal::to_double() const { return static_cast<double>(mantissa) * std::pow(10.0, exponent); }

std::string Decimal::to_string() const {
  std::string digits = std::to_string(mantissa < 0 ? -mantissa : mantissa);
  const std::string sign = mantissa < 0 ? "-" : "";
  if (exponent >= 0) {
    if (exponent <= 18) return sign + digits + std::string(exponent, '0');
    return sign + digits + "e" + std::to_string(exponent);
  }
  const int frac = -exponent;
  if (frac <= 18) {
    if (digits.size() <= static_cast<std::size_t>(frac)) {
      return sign + "0." + std::string(frac - digits.size(), '0') + digits;
    }
    return sign + digits.substr(0, digits.size() - frac) + "." +
           digits.substr(digits.size() - frac);
  }
  return sign + digits + "e" + std::to_string(exponent);
}

bool operator==(const Decimal& a, const Decimal& b) { return compare(a, b) == 0; }

int compare(const Decimal& a, const Decimal& b) {
  const int sa = a.mantissa < 0 ? -1 : a.mantissa > 0 ? 1 : 0;
  const int sb = b.mantissa < 0 ? -1 : b.mantissa > 0 ? 1 : 0;
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;

  // Align to the smaller exponent; if scaling overflows 128 bits the scaled
  // side dominates in magnitude.
  __int128 ma = a.mantissa;
  __int128 mb = b.mantissa;
  int ea = a.exponent;
  int eb = b.exponent;
  constexpr __int128 kLimit = __int128(1) << 120;
  while (ea > eb) {
    if (ma > kLimit / 10 || ma < -(kLimit / 10)) return sa;  // |a| overwhelms |b|
    ma *= 10;
    --ea;
  }
  while (eb > ea) {
    if (mb > kLimit / 10 || mb < -(kLimit / 10)) return -sb;
    mb *= 10;
    --eb;
  }
  if (ma == mb) return 0;
  return ma < mb ? -1 : 1;
}

}  // namespace weir
