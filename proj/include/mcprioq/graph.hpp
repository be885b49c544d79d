#ifndef MCPRIOQ_GRAPH_HPP_
#define MCPRIOQ_GRAPH_HPP_

/// \file
/// Concurrent sparse Markov chain whose per-source edge lists stay
/// (approximately) sorted by transition count.
///
/// Every node that appears as a source or destination gets one vertex entry
/// in the node table. A vertex owns the outgoing edge queue, the
/// destination-to-edge table, and the total transition counter; edges refer
/// to their destination by the vertex's interned id.
///
/// Probabilities are never stored: an edge's probability is its count divided
/// by the source total, both read at query time. The edge counter is bumped
/// before the total, so a concurrent reader can momentarily see
/// probabilities that sum to slightly more or less than one.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mcprioq/edge_queue.hpp"
#include "mcprioq/node_id.hpp"
#include "mcprioq/node_index.hpp"
#include "mcprioq/rational.hpp"
#include "mcprioq/recommendation.hpp"
#include "mcprioq/reclamation.hpp"

namespace mcprioq {

/// When and how hard to forget. Triggers are evaluated by the embedding
/// application (see due()); the graph never runs a timer of its own.
struct DecayConfig {
  struct Manual {};
  struct EveryNTransitions {
    std::uint64_t n;
  };
  struct Periodic {
    std::chrono::nanoseconds interval;
  };

  Rational factor{1, 2};
  std::variant<Manual, EveryNTransitions, Periodic> trigger = Manual{};

  void validate() const;
  bool due(std::uint64_t transitions_since_last,
           std::chrono::nanoseconds since_last) const;
};

struct RecordResult {
  bool created = false;
  std::size_t swaps = 0;
};

struct GraphStats {
  std::uint64_t sources = 0;
  std::uint64_t edges = 0;
  std::uint64_t transitions = 0;

  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

/// Plain copy of one source's state, in queue order.
struct SourceImage {
  std::string src;
  std::uint64_t total = 0;
  std::vector<std::pair<std::string, std::uint64_t>> edges;

  friend bool operator==(const SourceImage&, const SourceImage&) = default;
};
using GraphImage = std::vector<SourceImage>;

class SourceEntry {
 public:
  SourceEntry(NodeId id, ReclamationDomain& domain)
      : id(std::move(id)), queue(domain), dst_index(domain) {}

  const NodeId id;
  std::atomic<std::uint64_t> total{0};
  std::atomic<bool> is_source{false};
  EdgeQueue queue;
  IndexTable<const NodeId*, EdgeEntry, PointerHash> dst_index;
};

class Graph {
 public:
  explicit Graph(DecayConfig config = {});
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  ~Graph();

  /// Counts one src -> dst transition. O(1) expected; re-sorts the queue
  /// only if its reorder permit is free.
  RecordResult record_transition(const NodeId& src, const NodeId& dst);
  RecordResult record_transition(std::string_view src, std::string_view dst);

  /// First min(n, edges) entries of src's queue.
  Recommendation recommend_top_n(const NodeId& src, std::size_t n,
                                 TraversalAudit* audit = nullptr) const;
  /// Shortest queue prefix whose cumulative probability reaches `threshold`.
  Recommendation recommend_cumulative(const NodeId& src, double threshold,
                                      TraversalAudit* audit = nullptr) const;

  /// Scales every count by `factor` (floor), unlinking edges that reach zero.
  DecayResult decay(const Rational& factor);
  DecayResult decay() { return decay(config_.factor); }

  /// Finishes deferred re-sorting. Callers must exclude concurrent writers
  /// for the result to be exactly sorted.
  StabilizeResult stabilize_all();

  GraphStats stats() const;

  /// Quiescent consistency check; returns a description of every violation.
  std::vector<std::string> check_invariants() const;

  /// Non-empty sources sorted by id, edges in queue order.
  GraphImage image() const;

  /// Rebuilds one source with edges in the given order (no re-sort).
  /// Throws InputError unless counts are >= 1 and non-increasing, sum to
  /// `total`, and name distinct destinations, or if src already has edges.
  void restore_source(const NodeId& src, std::uint64_t total,
                      std::span<const std::pair<NodeId, std::uint64_t>> edges);

  const DecayConfig& config() const noexcept { return config_; }
  ReclamationDomain& domain() noexcept { return domain_; }

 private:
  enum class Mode { top_n, cumulative };

  SourceEntry& vertex(const ReadGuard& guard, const NodeId& id);
  std::size_t reorder(SourceEntry& source, EdgeEntry* touched);
  Recommendation recommend(const NodeId& src, Mode mode, std::size_t n,
                           double threshold, TraversalAudit* audit) const;

  // Declared first: destroyed after every table that retires into it.
  mutable ReclamationDomain domain_;
  DecayConfig config_;
  IndexTable<NodeId, SourceEntry, NodeIdHash> vertices_;
};

}  // namespace mcprioq

#endif  // MCPRIOQ_GRAPH_HPP_
