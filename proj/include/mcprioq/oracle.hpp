#ifndef MCPRIOQ_ORACLE_HPP_
#define MCPRIOQ_ORACLE_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mcprioq/rational.hpp"
#include "mcprioq/recommendation.hpp"

namespace mcprioq {

/// Single-threaded reference model: per source, a plain vector of
/// (dst, count) kept in the order produced by replaying the strict bubble
/// rule, plus the total. Used as ground truth in differential tests.
class OracleGraph {
 public:
  struct Source {
    std::vector<std::pair<std::string, std::uint64_t>> edges;
    std::uint64_t total = 0;
  };

  void record(const std::string& src, const std::string& dst);
  Recommendation recommend_top_n(const std::string& src, std::size_t n) const;
  Recommendation recommend_cumulative(const std::string& src,
                                      double threshold) const;
  DecayResult decay(const Rational& factor);

  const Source* find(const std::string& src) const;
  const std::map<std::string, Source>& sources() const noexcept {
    return sources_;
  }

  /// Snapshot text for this state, written without going through io.
  std::string snapshot_text() const;

 private:
  std::map<std::string, Source> sources_;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_ORACLE_HPP_
