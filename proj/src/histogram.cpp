#include "mcprioq/histogram.hpp"

#include <algorithm>
#include <cmath>

namespace mcprioq {
namespace {

// 2^64 has 20 decimal digits: exponents 1..18 above the exact range.
constexpr std::size_t kBucketCount = 100 + 18 * 90;

}  // namespace

LatencyHistogram::LatencyHistogram() : buckets_(kBucketCount, 0) {}

std::size_t LatencyHistogram::bucket_of(std::uint64_t value) noexcept {
  if (value < 100) return static_cast<std::size_t>(value);
  std::size_t exponent = 0;
  while (value >= 100) {
    value /= 10;
    ++exponent;
  }
  return 100 + (exponent - 1) * 90 + static_cast<std::size_t>(value - 10);
}

std::uint64_t LatencyHistogram::bucket_floor(std::size_t bucket) noexcept {
  if (bucket < 100) return bucket;
  const std::size_t exponent = (bucket - 100) / 90 + 1;
  std::uint64_t value = (bucket - 100) % 90 + 10;
  for (std::size_t i = 0; i < exponent; ++i) value *= 10;
  return value;
}

void LatencyHistogram::record(std::uint64_t value) noexcept {
  ++buckets_[bucket_of(value)];
  ++count_;
}

void LatencyHistogram::merge(const LatencyHistogram& other) {
  for (std::size_t i = 0; i < buckets_.size(); ++i) buckets_[i] += other.buckets_[i];
  count_ += other.count_;
}

std::uint64_t LatencyHistogram::percentile(double q) const {
  if (count_ == 0) return 0;
  q = std::clamp(q, 0.0, 1.0);
  const auto rank = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(q * static_cast<double>(count_))));
  std::uint64_t seen = 0;
  for (std::size_t i = 0; i < buckets_.size(); ++i) {
    seen += buckets_[i];
    if (seen >= rank) return bucket_floor(i);
  }
  return bucket_floor(buckets_.size() - 1);
}

}  // namespace mcprioq
