#ifndef MCPRIOQ_HISTOGRAM_HPP_
#define MCPRIOQ_HISTOGRAM_HPP_

#include <cstdint>
#include <vector>

namespace mcprioq {

/// Latency histogram with two significant decimal digits per bucket
/// (0..99 exact, then 100, 110, ..., 990, 1000, 1100, ...).
class LatencyHistogram {
 public:
  LatencyHistogram();

  void record(std::uint64_t value) noexcept;
  void merge(const LatencyHistogram& other);

  std::uint64_t count() const noexcept { return count_; }
  /// Lower edge of the bucket holding the q-quantile, q in [0, 1]. Zero when
  /// empty.
  std::uint64_t percentile(double q) const;

  static std::size_t bucket_of(std::uint64_t value) noexcept;
  static std::uint64_t bucket_floor(std::size_t bucket) noexcept;

 private:
  std::vector<std::uint64_t> buckets_;
  std::uint64_t count_ = 0;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_HISTOGRAM_HPP_
