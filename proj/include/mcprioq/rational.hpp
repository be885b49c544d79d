#ifndef MCPRIOQ_RATIONAL_HPP_
#define MCPRIOQ_RATIONAL_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace mcprioq {

/// Exact non-negative fraction used for decay factors, so that scaling an
/// integer count never depends on binary floating-point rounding.
class Rational {
 public:
  constexpr Rational() = default;
  /// Throws InputError on a zero denominator. The value is kept reduced.
  Rational(std::uint64_t numerator, std::uint64_t denominator);

  /// Accepts "N", "N/D" and plain decimals such as "0.5" or ".25".
  static Rational parse(std::string_view text);

  std::uint64_t numerator() const noexcept { return num_; }
  std::uint64_t denominator() const noexcept { return den_; }
  double to_double() const noexcept {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  /// True for values in (0, 1].
  bool is_decay_factor() const noexcept { return num_ > 0 && num_ <= den_; }

  /// floor(count * this); exact for every 64-bit count when the value is <= 1.
  std::uint64_t scale_floor(std::uint64_t count) const noexcept {
    const auto wide = static_cast<unsigned __int128>(count) * num_ / den_;
    return static_cast<std::uint64_t>(wide);
  }

  std::string to_string() const;

  friend bool operator==(const Rational&, const Rational&) = default;

 private:
  std::uint64_t num_ = 1;
  std::uint64_t den_ = 1;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_RATIONAL_HPP_
