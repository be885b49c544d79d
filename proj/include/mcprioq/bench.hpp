#ifndef MCPRIOQ_BENCH_HPP_
#define MCPRIOQ_BENCH_HPP_

/// \file
/// Concurrency benchmark and stress harness.
///
/// Writers record transitions: the source is uniform over the first
/// `sources` nodes, the destination is a Zipf rank mapped through a
/// per-source permutation of all nodes, so every source has its own popular
/// head. Readers alternate top-n and cumulative queries and audit a share of
/// their traversals against the queue anomaly bound. Afterwards the harness
/// quiesces, stabilizes and checks counter conservation against its own
/// operation count.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcprioq/graph.hpp"

namespace mcprioq {

struct WorkloadConfig {
  std::uint64_t nodes = 1000;
  double zipf_s = 1.0;
  unsigned writers = 1;
  unsigned readers = 0;
  double duration_secs = 1.0;
  std::uint64_t seed = 0;
  /// Number of nodes that act as sources; 0 means all of them.
  std::uint64_t sources = 0;
  /// Fixed per-writer operation budget; 0 means run for duration_secs.
  std::uint64_t ops_per_writer = 0;
  std::size_t top_n = 10;
  std::vector<double> thresholds{0.5, 0.9, 0.99};

  /// Throws InputError on an invalid configuration.
  void validate() const;
  std::uint64_t source_count() const noexcept {
    return sources == 0 ? nodes : sources;
  }
};

struct BenchReport {
  double elapsed_secs = 0.0;
  std::uint64_t update_ops = 0;
  double update_throughput = 0.0;
  std::uint64_t update_latency_p50 = 0;
  std::uint64_t update_latency_p99 = 0;
  std::uint64_t inference_ops = 0;
  std::uint64_t inference_latency_p50 = 0;
  std::uint64_t inference_latency_p99 = 0;
  std::uint64_t audited_traversals = 0;
  std::map<double, double> items_for_threshold;
  std::uint64_t anomalies_detected = 0;
  std::uint64_t canary_hits = 0;
  GraphStats stats;
  std::uint64_t edge_count_sum = 0;
  bool conservation_ok = true;
  std::vector<std::string> violations;

  bool passed() const noexcept {
    return anomalies_detected == 0 && canary_hits == 0 && conservation_ok &&
           violations.empty();
  }
  std::string to_key_values() const;
  std::string to_json() const;
};

/// Node name used by the harness for index k.
std::string bench_node_name(std::uint64_t k);

/// Destination index for `rank` (1-based) out of `source`, a bijection of
/// ranks onto [0, nodes) that depends on the seed and the source.
std::uint64_t bench_destination(std::uint64_t seed, std::uint64_t source,
                                std::uint64_t rank, std::uint64_t nodes);

/// Runs the workload against `graph` and leaves it quiescent and stabilized.
BenchReport run_bench(const WorkloadConfig& config, Graph& graph);
BenchReport run_bench(const WorkloadConfig& config);

}  // namespace mcprioq

#endif  // MCPRIOQ_BENCH_HPP_
