#ifndef MCPRIOQ_ZIPF_HPP_
#define MCPRIOQ_ZIPF_HPP_

#include <cstdint>
#include <vector>

namespace mcprioq {

/// Maps 64 random bits to a double uniform in [0, 1) (53-bit resolution).
inline double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Zipf law over ranks 1..n: P(k) = k^-s / H(n, s). Sampling inverts a
/// precomputed cumulative table, so a draw is one binary search.
class ZipfDistribution {
 public:
  /// Throws InputError unless n >= 1 and s >= 0.
  ZipfDistribution(std::uint64_t n, double s);

  template <typename Engine>
  std::uint64_t operator()(Engine& engine) const {
    return rank_for(unit_interval(static_cast<std::uint64_t>(engine())));
  }

  /// Rank whose cumulative interval contains u, for u in [0, 1).
  std::uint64_t rank_for(double u) const;

  double probability(std::uint64_t rank) const;
  /// Generalized harmonic number H(n, s).
  double normalization() const noexcept { return normalization_; }
  /// Smallest k whose top-k mass reaches t.
  std::uint64_t quantile(double t) const;

  std::uint64_t size() const noexcept { return cdf_.size(); }
  double exponent() const noexcept { return s_; }

 private:
  double s_;
  double normalization_ = 0.0;
  std::vector<double> cdf_;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_ZIPF_HPP_
