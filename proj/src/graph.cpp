#include "mcprioq/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_set>

#include "mcprioq/errors.hpp"

namespace mcprioq {
namespace {

// Increments unless the edge has been zeroed by decay (count 0 is terminal).
bool try_increment(EdgeEntry& e) {
  std::uint64_t c = e.count.load(std::memory_order_relaxed);
  while (c != 0) {
    if (e.count.compare_exchange_weak(c, c + 1, std::memory_order_acq_rel,
                                      std::memory_order_relaxed)) {
      return true;
    }
  }
  return false;
}

}  // namespace

void validate_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InputError("threshold must be in [0, 1], got " +
                     std::to_string(threshold));
  }
}

void DecayConfig::validate() const {
  if (!factor.is_decay_factor()) {
    throw InputError("decay factor must be in (0, 1], got " +
                     factor.to_string());
  }
  if (const auto* every = std::get_if<EveryNTransitions>(&trigger)) {
    if (every->n == 0) throw InputError("decay interval must be positive");
  }
  if (const auto* periodic = std::get_if<Periodic>(&trigger)) {
    if (periodic->interval.count() <= 0) {
      throw InputError("decay period must be positive");
    }
  }
}

bool DecayConfig::due(std::uint64_t transitions_since_last,
                      std::chrono::nanoseconds since_last) const {
  if (const auto* every = std::get_if<EveryNTransitions>(&trigger)) {
    return transitions_since_last >= every->n;
  }
  if (const auto* periodic = std::get_if<Periodic>(&trigger)) {
    return since_last >= periodic->interval;
  }
  return false;
}

Graph::Graph(DecayConfig config)
    : config_(std::move(config)), vertices_(domain_) {
  config_.validate();
}

Graph::~Graph() = default;

SourceEntry& Graph::vertex(const ReadGuard& guard, const NodeId& id) {
  if (SourceEntry* v = vertices_.get(guard, id)) return *v;
  return *vertices_
              .put_if_absent(guard, id, std::make_unique<SourceEntry>(id, domain_))
              .current;
}

RecordResult Graph::record_transition(std::string_view src,
                                      std::string_view dst) {
  return record_transition(NodeId(src), NodeId(dst));
}

RecordResult Graph::record_transition(const NodeId& src, const NodeId& dst) {
  auto guard = domain_.enter_read();
  SourceEntry& source = vertex(guard, src);
  const NodeId* dst_key = &vertex(guard, dst).id;
  if (!source.is_source.load(std::memory_order_relaxed)) {
    source.is_source.store(true, std::memory_order_release);
  }

  RecordResult result;
  EdgeEntry* edge = nullptr;
  for (;;) {
    if (EdgeEntry* existing = source.dst_index.get(guard, dst_key)) {
      if (try_increment(*existing)) {
        edge = existing;
        break;
      }
      // Zeroed by a concurrent decay that has yet to detach it.
      std::this_thread::yield();
      continue;
    }
    auto put = source.dst_index.put_if_absent(
        guard, dst_key, std::make_unique<EdgeEntry>(dst_key, 1));
    if (put.inserted) {
      edge = put.current;
      source.queue.enqueue_pending(edge);
      result.created = true;
      break;
    }
  }
  source.total.fetch_add(1, std::memory_order_acq_rel);
  result.swaps = reorder(source, edge);
  return result;
}

std::size_t Graph::reorder(SourceEntry& source, EdgeEntry* touched) {
  std::size_t swaps = 0;
  while (auto permit = source.queue.try_reorder()) {
    source.queue.drain_pending(*permit);
    if (touched != nullptr) {
      if (touched->linked &&
          touched->count.load(std::memory_order_acquire) != 0) {
        swaps += source.queue.bubble_up(*permit, touched);
      }
      touched = nullptr;
    }
    permit.reset();
    // An entry enqueued while we held the permit would otherwise wait for
    // the next writer on this source.
    if (!source.queue.has_pending()) break;
  }
  return swaps;
}

Recommendation Graph::recommend_top_n(const NodeId& src, std::size_t n,
                                      TraversalAudit* audit) const {
  return recommend(src, Mode::top_n, n, 0.0, audit);
}

Recommendation Graph::recommend_cumulative(const NodeId& src, double threshold,
                                           TraversalAudit* audit) const {
  validate_threshold(threshold);
  return recommend(src, Mode::cumulative, 0, threshold, audit);
}

Recommendation Graph::recommend(const NodeId& src, Mode mode, std::size_t n,
                                double threshold, TraversalAudit* audit) const {
  Recommendation rec;
  auto guard = domain_.enter_read();
  const SourceEntry* source = vertices_.get(guard, src);
  if (source == nullptr || !source->is_source.load(std::memory_order_acquire)) {
    return rec;
  }
  rec.found = true;
  const EdgeQueue& queue = source->queue;
  if (audit != nullptr) audit->begin(queue);

  const std::uint64_t total = source->total.load(std::memory_order_acquire);
  bool stopped = false;
  queue.traverse(guard, [&](const EdgeEntry& e) {
    if (audit != nullptr && !audit->observe(queue, e)) return false;
    const bool done = mode == Mode::top_n
                          ? rec.items.size() >= n
                          : threshold_reached(rec.cumulative, threshold);
    if (done) {
      stopped = true;
      return false;
    }
    const std::uint64_t c = e.count.load(std::memory_order_acquire);
    if (c == 0 || total == 0) return true;
    const double p = std::min(1.0, static_cast<double>(c) /
                                       static_cast<double>(total));
    rec.items.push_back({e.dst->str(), p});
    rec.cumulative += p;
    return true;
  });
  if (audit != nullptr) audit->end(queue, !stopped);
  return rec;
}

DecayResult Graph::decay(const Rational& factor) {
  if (!factor.is_decay_factor()) {
    throw InputError("decay factor must be in (0, 1], got " +
                     factor.to_string());
  }
  DecayResult result;
  auto guard = domain_.enter_read();
  vertices_.iterate(guard, [&](const NodeId&, SourceEntry& source) {
    if (!source.is_source.load(std::memory_order_acquire)) return;
    ReorderPermit permit = source.queue.reorder();
    source.queue.drain_pending(permit);
    const bool had_edges = !source.queue.empty();
    std::uint64_t removed_mass = 0;
    EdgeEntry* e = source.queue.first(permit);
    while (e != source.queue.tail()) {
      EdgeEntry* next = e->next.load(std::memory_order_relaxed);
      std::uint64_t before = e->count.load(std::memory_order_acquire);
      std::uint64_t after = factor.scale_floor(before);
      while (!e->count.compare_exchange_weak(before, after,
                                             std::memory_order_acq_rel)) {
        after = factor.scale_floor(before);
      }
      removed_mass += before - after;
      if (after == 0) {
        source.dst_index.detach(guard, e->dst, e);
        source.queue.unlink(permit, e);
        ++result.edges_removed;
      }
      e = next;
    }
    // Modular: a writer whose edge increment was halved may not have bumped
    // the total yet; the total is exact again once it does.
    source.total.fetch_sub(removed_mass, std::memory_order_acq_rel);
    if (had_edges && source.queue.empty()) ++result.sources_emptied;
  });
  return result;
}

StabilizeResult Graph::stabilize_all() {
  StabilizeResult result;
  auto guard = domain_.enter_read();
  vertices_.iterate(guard, [&](const NodeId&, SourceEntry& source) {
    const StabilizeResult r = source.queue.stabilize(guard);
    result.passes += r.passes;
    result.swaps += r.swaps;
  });
  return result;
}

GraphStats Graph::stats() const {
  GraphStats stats;
  auto guard = domain_.enter_read();
  vertices_.iterate(guard, [&](const NodeId&, const SourceEntry& source) {
    const std::uint64_t length = source.queue.length();
    if (length == 0) return;
    ++stats.sources;
    stats.edges += length;
    stats.transitions += source.total.load(std::memory_order_acquire);
  });
  return stats;
}

std::vector<std::string> Graph::check_invariants() const {
  std::vector<std::string> problems;
  auto guard = domain_.enter_read();
  vertices_.iterate(guard, [&](const NodeId& id, const SourceEntry& source) {
    const auto where = [&](const std::string& what) {
      problems.push_back("source " + id.str() + ": " + what);
    };
    if (source.queue.has_pending()) where("entries still pending");
    std::uint64_t sum = 0;
    std::uint64_t forward = 0;
    std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
    const EdgeEntry* expected_prev = source.queue.head();
    source.queue.traverse(guard, [&](const EdgeEntry& e) {
      ++forward;
      if (!e.alive()) where("reclaimed entry reachable");
      if (!e.linked) where("unlinked entry reachable");
      const std::uint64_t c = e.count.load(std::memory_order_acquire);
      if (c == 0) where("zero count on a linked edge");
      if (c > previous) where("counts increase at " + e.dst->str());
      if (e.prev.load(std::memory_order_acquire) != expected_prev) {
        where("prev link mismatch at " + e.dst->str());
      }
      if (source.dst_index.get(guard, e.dst) != &e) {
        where("index does not resolve " + e.dst->str());
      }
      previous = c;
      expected_prev = &e;
      sum += c;
      return forward <= source.queue.length() + 1;
    });
    if (source.queue.tail()->prev.load(std::memory_order_acquire) !=
        expected_prev) {
      where("tail prev link mismatch");
    }
    if (forward != source.queue.length()) {
      where("length " + std::to_string(source.queue.length()) +
            " but forward walk visited " + std::to_string(forward));
    }
    const std::uint64_t total = source.total.load(std::memory_order_acquire);
    if (total != sum) {
      where("total " + std::to_string(total) + " != sum of counts " +
            std::to_string(sum));
    }
    std::uint64_t attached = 0;
    source.dst_index.iterate(guard, [&](const NodeId*, const EdgeEntry&) {
      ++attached;
    });
    if (attached != forward) {
      where("index holds " + std::to_string(attached) + " edges, queue " +
            std::to_string(forward));
    }
  });
  return problems;
}

GraphImage Graph::image() const {
  GraphImage image;
  auto guard = domain_.enter_read();
  vertices_.iterate(guard, [&](const NodeId& id, const SourceEntry& source) {
    if (source.queue.empty()) return;
    SourceImage s;
    s.src = id.str();
    s.total = source.total.load(std::memory_order_acquire);
    source.queue.traverse(guard, [&](const EdgeEntry& e) {
      s.edges.emplace_back(e.dst->str(), e.count.load(std::memory_order_acquire));
      return true;
    });
    image.push_back(std::move(s));
  });
  std::sort(image.begin(), image.end(),
            [](const SourceImage& a, const SourceImage& b) { return a.src < b.src; });
  return image;
}

void Graph::restore_source(
    const NodeId& src, std::uint64_t total,
    std::span<const std::pair<NodeId, std::uint64_t>> edges) {
  if (edges.empty()) throw InputError("source " + src.str() + " has no edges");
  std::uint64_t sum = 0;
  std::uint64_t previous = std::numeric_limits<std::uint64_t>::max();
  std::unordered_set<std::string_view> seen;
  for (const auto& [dst, count] : edges) {
    if (count == 0) throw InputError("zero count on edge " + src.str() + "->" + dst.str());
    if (count > previous) {
      throw InputError("counts increase at edge " + src.str() + "->" + dst.str());
    }
    if (!seen.insert(dst.view()).second) {
      throw InputError("duplicate edge " + src.str() + "->" + dst.str());
    }
    if (sum > std::numeric_limits<std::uint64_t>::max() - count) {
      throw InputError("transition total overflows for " + src.str());
    }
    sum += count;
    previous = count;
  }
  if (sum != total) {
    throw InputError("total " + std::to_string(total) + " of " + src.str() +
                     " != sum of counts " + std::to_string(sum));
  }

  auto guard = domain_.enter_read();
  SourceEntry& source = vertex(guard, src);
  ReorderPermit permit = source.queue.reorder();
  source.queue.drain_pending(permit);
  if (!source.queue.empty()) {
    throw InputError("source " + src.str() + " already has edges");
  }
  source.dst_index.reserve(guard, source.dst_index.size() + edges.size());
  for (const auto& [dst, count] : edges) {
    const NodeId* dst_key = &vertex(guard, dst).id;
    auto put = source.dst_index.put_if_absent(
        guard, dst_key, std::make_unique<EdgeEntry>(dst_key, count));
    if (!put.inserted) {
      throw InputError("duplicate edge " + src.str() + "->" + dst.str());
    }
    source.queue.push_tail(permit, put.current);
  }
  source.total.fetch_add(total, std::memory_order_acq_rel);
  source.is_source.store(true, std::memory_order_release);
}

}  // namespace mcprioq
