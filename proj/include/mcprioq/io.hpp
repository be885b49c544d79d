#ifndef MCPRIOQ_IO_HPP_
#define MCPRIOQ_IO_HPP_

/// \file
/// Transition streams and snapshots.
///
/// Stream: one `src,dst` pair per line; lines starting with `#` and blank
/// lines are ignored.
///
/// Snapshot (all lines end in `\n`):
///
///     MCPRIOQ 1
///     S <src> <total> <edge_count>
///     E <dst> <count>          (edge_count lines, queue order)
///     ...
///
/// Sources appear in byte-wise id order; sources without edges are omitted.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "mcprioq/graph.hpp"
#include "mcprioq/node_id.hpp"

namespace mcprioq {

inline constexpr int kSnapshotVersion = 1;

struct TransitionRecord {
  NodeId src;
  NodeId dst;
};

struct ParseOptions {
  /// Skip malformed lines (counting them) instead of failing on the first.
  bool lenient = false;
};

struct ParseStats {
  std::uint64_t lines = 0;
  std::uint64_t records = 0;
  std::uint64_t skipped = 0;
};

/// Streams records to `sink` as they are parsed. In strict mode a malformed
/// line throws FormatError carrying its 1-based line number.
ParseStats for_each_transition(
    std::istream& in, const ParseOptions& options,
    const std::function<void(const TransitionRecord&)>& sink);

std::vector<TransitionRecord> parse_stream(std::istream& in,
                                           const ParseOptions& options = {},
                                           ParseStats* stats = nullptr);

/// The graph must be quiescent and stabilized; throws InvariantError if a
/// queue is out of order. Stream errors are reported as std::ios_base::failure.
void write_snapshot(const Graph& graph, std::ostream& out);
std::string snapshot_string(const Graph& graph);

/// Throws FormatError (with line number) on a version mismatch, malformed
/// line, counts increasing along a queue, total != sum of counts, or a
/// duplicate source or destination.
std::unique_ptr<Graph> read_snapshot(std::istream& in, DecayConfig config = {});
std::unique_ptr<Graph> snapshot_from_string(const std::string& text,
                                            DecayConfig config = {});

}  // namespace mcprioq

#endif  // MCPRIOQ_IO_HPP_
