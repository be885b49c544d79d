#include "mcprioq/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "mcprioq/errors.hpp"
#include "mcprioq/histogram.hpp"
#include "mcprioq/zipf.hpp"

namespace mcprioq {
namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

std::string format_threshold(double t) {
  std::ostringstream s;
  s << t;
  return s.str();
}

struct WriterResult {
  std::uint64_t ops = 0;
  LatencyHistogram latency;
};

struct ReaderResult {
  std::uint64_t ops = 0;
  std::uint64_t audited = 0;
  std::uint64_t anomalies = 0;
  std::uint64_t canary_hits = 0;
  std::vector<std::string> diagnostics;
  LatencyHistogram latency;
};

}  // namespace

void WorkloadConfig::validate() const {
  if (nodes < 2) throw InputError("bench needs at least 2 nodes");
  if (!(zipf_s >= 0.0) || !std::isfinite(zipf_s)) {
    throw InputError("zipf exponent must be finite and >= 0");
  }
  if (!(duration_secs > 0.0) || !std::isfinite(duration_secs)) {
    throw InputError("duration must be positive");
  }
  if (sources > nodes) throw InputError("sources cannot exceed nodes");
  for (double t : thresholds) validate_threshold(t);
}

std::string bench_node_name(std::uint64_t k) { return "n" + std::to_string(k); }

std::uint64_t bench_destination(std::uint64_t seed, std::uint64_t source,
                                std::uint64_t rank, std::uint64_t nodes) {
  // Affine permutation x -> (a*x + b) mod nodes with gcd(a, nodes) = 1.
  const std::uint64_t h = splitmix64(seed ^ splitmix64(source + 1));
  std::uint64_t a = 1 + h % (nodes - 1);
  while (std::gcd(a, nodes) != 1) a = a % (nodes - 1) + 1;
  const std::uint64_t b = splitmix64(h) % nodes;
  const auto x = static_cast<unsigned __int128>(rank - 1);
  return static_cast<std::uint64_t>((x * a + b) % nodes);
}

BenchReport run_bench(const WorkloadConfig& config) {
  Graph graph;
  return run_bench(config, graph);
}

BenchReport run_bench(const WorkloadConfig& config, Graph& graph) {
  config.validate();
  BenchReport report;

  std::vector<NodeId> names;
  names.reserve(config.nodes);
  for (std::uint64_t k = 0; k < config.nodes; ++k) {
    names.emplace_back(bench_node_name(k));
  }
  const std::uint64_t source_count = config.source_count();
  const ZipfDistribution zipf(config.nodes, config.zipf_s);
  // Per-source multiplier/offset pairs, so the hot loop avoids rehashing.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> perms(source_count);
  for (std::uint64_t s = 0; s < source_count; ++s) {
    const std::uint64_t d0 = bench_destination(config.seed, s, 1, config.nodes);
    const std::uint64_t d1 = bench_destination(config.seed, s, 2, config.nodes);
    perms[s] = {(d1 + config.nodes - d0) % config.nodes, d0};
  }

  std::vector<WriterResult> writer_results(config.writers);
  std::vector<ReaderResult> reader_results(config.readers);
  std::atomic<unsigned> writers_running{config.writers};
  std::atomic<bool> stop_readers{false};
  const auto duration = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(config.duration_secs));

  const auto start = Clock::now();
  const auto deadline = start + duration;
  std::vector<std::thread> threads;
  threads.reserve(config.writers + config.readers);

  for (unsigned w = 0; w < config.writers; ++w) {
    threads.emplace_back([&, w] {
      WriterResult& out = writer_results[w];
      std::mt19937_64 rng(splitmix64(config.seed * 2 + 1 + w));
      for (;;) {
        if (config.ops_per_writer != 0) {
          if (out.ops >= config.ops_per_writer) break;
        } else if ((out.ops & 63) == 0 && Clock::now() >= deadline) {
          break;
        }
        const std::uint64_t s = rng() % source_count;
        const std::uint64_t rank = zipf(rng);
        const auto [a, b] = perms[s];
        const auto d = static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(rank - 1) * a + b) % config.nodes);
        const auto t0 = Clock::now();
        graph.record_transition(names[s], names[d]);
        out.latency.record(elapsed_ns(t0, Clock::now()));
        ++out.ops;
      }
      writers_running.fetch_sub(1, std::memory_order_acq_rel);
    });
  }

  for (unsigned r = 0; r < config.readers; ++r) {
    threads.emplace_back([&, r] {
      ReaderResult& out = reader_results[r];
      std::mt19937_64 rng(splitmix64(~config.seed - r));
      TraversalAudit audit;
      for (std::uint64_t i = 0;; ++i) {
        if (config.writers != 0 && config.ops_per_writer != 0) {
          if (writers_running.load(std::memory_order_acquire) == 0) break;
        } else if ((i & 15) == 0 && Clock::now() >= deadline) {
          break;
        }
        if (stop_readers.load(std::memory_order_relaxed)) break;
        const NodeId& src = names[rng() % source_count];
        const bool top_n = (i & 1) == 0;
        const double threshold =
            config.thresholds.empty()
                ? 0.5
                : config.thresholds[(i / 2) % config.thresholds.size()];
        const bool audited = (i & 2) == 0;
        const auto t0 = Clock::now();
        if (top_n) {
          graph.recommend_top_n(src, config.top_n, audited ? &audit : nullptr);
        } else {
          graph.recommend_cumulative(src, threshold, audited ? &audit : nullptr);
        }
        const auto t1 = Clock::now();
        ++out.ops;
        if (!audited) {
          out.latency.record(elapsed_ns(t0, t1));
          continue;
        }
        ++out.audited;
        out.canary_hits += audit.canary_hits();
        if (!audit.within_bounds()) {
          ++out.anomalies;
          if (out.diagnostics.size() < 8) {
            const QueueVersion& b = audit.before();
            const QueueVersion& a = audit.after();
            std::ostringstream d;
            d << "traversal of " << src << ": visits=" << audit.visits()
              << " duplicates=" << audit.duplicates()
              << " length=" << b.length
              << " swaps=" << (a.swaps_started - b.swaps_done)
              << " links=" << (a.links_started - b.links_done)
              << " unlinks=" << (a.unlinks_started - b.unlinks_done)
              << " aborted=" << audit.aborted();
            out.diagnostics.push_back(d.str());
          }
        }
      }
    });
  }

  for (std::size_t i = 0; i < config.writers; ++i) threads[i].join();
  const auto writers_done = Clock::now();
  if (config.writers > 0) stop_readers.store(true, std::memory_order_relaxed);
  for (std::size_t i = config.writers; i < threads.size(); ++i) threads[i].join();
  const auto end = Clock::now();

  report.elapsed_secs = std::chrono::duration<double>(end - start).count();
  LatencyHistogram updates;
  for (const WriterResult& w : writer_results) {
    report.update_ops += w.ops;
    updates.merge(w.latency);
  }
  const double write_secs =
      std::chrono::duration<double>(writers_done - start).count();
  report.update_throughput =
      write_secs > 0.0 ? static_cast<double>(report.update_ops) / write_secs : 0.0;
  report.update_latency_p50 = updates.percentile(0.50);
  report.update_latency_p99 = updates.percentile(0.99);

  LatencyHistogram inference;
  for (const ReaderResult& r : reader_results) {
    report.inference_ops += r.ops;
    report.audited_traversals += r.audited;
    report.anomalies_detected += r.anomalies;
    report.canary_hits += r.canary_hits;
    for (const auto& d : r.diagnostics) report.violations.push_back("anomaly: " + d);
    inference.merge(r.latency);
  }
  report.inference_latency_p50 = inference.percentile(0.50);
  report.inference_latency_p99 = inference.percentile(0.99);

  graph.domain().quiesce();
  graph.stabilize_all();
  for (auto& problem : graph.check_invariants()) {
    report.violations.push_back(std::move(problem));
  }
  report.stats = graph.stats();
  // check_invariants() already matched every source total against its edge
  // counts; compare the grand total with the harness's own count.
  report.edge_count_sum = report.stats.transitions;
  report.conservation_ok = report.edge_count_sum == report.update_ops;
  if (!report.conservation_ok) {
    report.violations.push_back(
        "conservation: sum of edge counts " + std::to_string(report.edge_count_sum) +
        " != operations " + std::to_string(report.update_ops));
  }

  for (double t : config.thresholds) {
    std::uint64_t queried = 0;
    std::uint64_t items = 0;
    for (std::uint64_t s = 0; s < source_count; ++s) {
      const Recommendation rec = graph.recommend_cumulative(names[s], t);
      if (rec.items.empty() && t > 0.0) continue;
      if (!rec.found) continue;
      ++queried;
      items += rec.items.size();
    }
    report.items_for_threshold[t] =
        queried == 0 ? 0.0 : static_cast<double>(items) / static_cast<double>(queried);
  }
  return report;
}

std::string BenchReport::to_key_values() const {
  std::ostringstream out;
  out << "elapsed_secs=" << elapsed_secs << '\n'
      << "update_ops=" << update_ops << '\n'
      << "update_throughput=" << update_throughput << '\n'
      << "update_latency_p50=" << update_latency_p50 << '\n'
      << "update_latency_p99=" << update_latency_p99 << '\n'
      << "inference_ops=" << inference_ops << '\n'
      << "inference_latency_p50=" << inference_latency_p50 << '\n'
      << "inference_latency_p99=" << inference_latency_p99 << '\n'
      << "audited_traversals=" << audited_traversals << '\n';
  for (const auto& [t, mean] : items_for_threshold) {
    out << "items_for_threshold." << format_threshold(t) << '=' << mean << '\n';
  }
  out << "anomalies_detected=" << anomalies_detected << '\n'
      << "canary_hits=" << canary_hits << '\n'
      << "sources=" << stats.sources << '\n'
      << "edges=" << stats.edges << '\n'
      << "transitions=" << stats.transitions << '\n'
      << "edge_count_sum=" << edge_count_sum << '\n'
      << "conservation_ok=" << (conservation_ok ? "true" : "false") << '\n'
      << "violations=" << violations.size() << '\n'
      << "passed=" << (passed() ? "true" : "false") << '\n';
  return out.str();
}

std::string BenchReport::to_json() const {
  nlohmann::json j;
  j["elapsed_secs"] = elapsed_secs;
  j["update_ops"] = update_ops;
  j["update_throughput"] = update_throughput;
  j["update_latency_p50"] = update_latency_p50;
  j["update_latency_p99"] = update_latency_p99;
  j["inference_ops"] = inference_ops;
  j["inference_latency_p50"] = inference_latency_p50;
  j["inference_latency_p99"] = inference_latency_p99;
  j["audited_traversals"] = audited_traversals;
  nlohmann::json items = nlohmann::json::object();
  for (const auto& [t, mean] : items_for_threshold) items[format_threshold(t)] = mean;
  j["items_for_threshold"] = items;
  j["anomalies_detected"] = anomalies_detected;
  j["canary_hits"] = canary_hits;
  j["sources"] = stats.sources;
  j["edges"] = stats.edges;
  j["transitions"] = stats.transitions;
  j["edge_count_sum"] = edge_count_sum;
  j["conservation_ok"] = conservation_ok;
  j["violations"] = violations;
  j["passed"] = passed();
  return j.dump();
}

}  // namespace mcprioq
