#include "mcprioq/rational.hpp"

#include <charconv>
#include <limits>
#include <numeric>

#include "mcprioq/errors.hpp"

namespace mcprioq {
namespace {

std::uint64_t parse_digits(std::string_view digits, std::string_view whole) {
  std::uint64_t value = 0;
  const auto* end = digits.data() + digits.size();
  auto [ptr, ec] = std::from_chars(digits.data(), end, value);
  if (digits.empty() || ec != std::errc{} || ptr != end) {
    throw InputError("invalid rational '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Rational::Rational(std::uint64_t numerator, std::uint64_t denominator) {
  if (denominator == 0) throw InputError("rational with zero denominator");
  const std::uint64_t g = std::gcd(numerator, denominator);
  num_ = g == 0 ? 0 : numerator / g;
  den_ = g == 0 ? 1 : denominator / g;
}

Rational Rational::parse(std::string_view text) {
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return Rational(parse_digits(text.substr(0, slash), text),
                    parse_digits(text.substr(slash + 1), text));
  }
  const auto dot = text.find('.');
  if (dot == std::string_view::npos) return Rational(parse_digits(text, text), 1);

  const std::string_view int_part = text.substr(0, dot);
  std::string_view frac_part = text.substr(dot + 1);
  if (int_part.empty() && frac_part.empty()) {
    throw InputError("invalid rational '" + std::string(text) + "'");
  }
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.remove_suffix(1);
  // 10^18 is the largest power of ten below 2^64.
  if (frac_part.size() > 18) {
    throw InputError("too many decimal digits in '" + std::string(text) + "'");
  }
  std::uint64_t den = 1;
  for (std::size_t i = 0; i < frac_part.size(); ++i) den *= 10;
  const std::uint64_t whole = int_part.empty() ? 0 : parse_digits(int_part, text);
  const std::uint64_t frac = frac_part.empty() ? 0 : parse_digits(frac_part, text);
  if (whole > (std::numeric_limits<std::uint64_t>::max() - frac) / den) {
    throw InputError("rational out of range '" + std::string(text) + "'");
  }
  return Rational(whole * den + frac, den);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

}  // namespace mcprioq
