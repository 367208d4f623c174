#include "spatialkit/fraction.hpp"

#include <charconv>
#include <cctype>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace spatialkit {

namespace {

constexpr std::int64_t kMaxDen = 1'000'000'000'000LL;

[[noreturn]] void bad(std::string_view text) {
  throw std::invalid_argument("not a decimal ratio: '" + std::string(text) + "'");
}

}  // namespace

Fraction::Fraction(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den <= 0) throw std::invalid_argument("fraction denominator must be positive");
  if (num < 0) throw std::invalid_argument("fraction must be non-negative");
  const auto g = std::gcd(num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

Fraction Fraction::parse(std::string_view text) {
  std::size_t i = 0;
  const auto n = text.size();
  while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i < n && text[i] == '+') ++i;

  std::int64_t num = 0;
  std::int64_t den = 1;
  bool any_digit = false;
  auto push_digit = [&](char c) {
    if (num > (std::numeric_limits<std::int64_t>::max() - 9) / 10) bad(text);
    num = num * 10 + (c - '0');
    any_digit = true;
  };
  for (; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) push_digit(text[i]);
  if (i < n && text[i] == '.') {
    for (++i; i < n && std::isdigit(static_cast<unsigned char>(text[i])); ++i) {
      push_digit(text[i]);
      den *= 10;
      if (den > kMaxDen) bad(text);
    }
  }
  if (!any_digit) bad(text);

  if (i < n && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    int exp = 0;
    auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + n, exp);
    if (ec != std::errc{}) bad(text);
    i = static_cast<std::size_t>(ptr - text.data());
    for (; exp > 0; --exp) {
      if (num > std::numeric_limits<std::int64_t>::max() / 10) bad(text);
      num *= 10;
    }
    for (; exp < 0; ++exp) {
      den *= 10;
      if (den > kMaxDen) bad(text);
    }
  }
  while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  if (i != n) bad(text);
  return Fraction(num, den);
}

Fraction Fraction::from_double(double value) {
  if (!(value >= 0.0) || value > 1e12) {
    throw std::invalid_argument("threshold out of range: " + std::to_string(value));
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::invalid_argument("cannot format threshold");
  return parse(std::string_view(buf, static_cast<std::size_t>(ptr - buf)));
}

std::string Fraction::to_string() const {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value());
  return std::string(buf, ptr);
}

}  // namespace spatialkit
