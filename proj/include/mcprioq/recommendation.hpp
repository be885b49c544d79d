#ifndef MCPRIOQ_RECOMMENDATION_HPP_
#define MCPRIOQ_RECOMMENDATION_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace mcprioq {

struct RecommendedItem {
  std::string dst;
  double probability = 0.0;

  friend bool operator==(const RecommendedItem&,
                         const RecommendedItem&) = default;
};

/// Destinations in descending-probability order. `found` is false when the
/// source has never recorded an outgoing transition.
struct Recommendation {
  bool found = false;
  std::vector<RecommendedItem> items;
  double cumulative = 0.0;

  friend bool operator==(const Recommendation&, const Recommendation&) = default;
};

struct DecayResult {
  std::uint64_t edges_removed = 0;
  std::uint64_t sources_emptied = 0;

  friend bool operator==(const DecayResult&, const DecayResult&) = default;
};

/// Rejects thresholds outside [0, 1] (and NaN) with InputError.
void validate_threshold(double threshold);

/// Shared rule for cumulative-threshold inference: keep taking items while
/// the mass collected so far is below `threshold`.
inline bool threshold_reached(double cumulative, double threshold) noexcept {
  return cumulative >= threshold;
}

}  // namespace mcprioq

#endif  // MCPRIOQ_RECOMMENDATION_HPP_
