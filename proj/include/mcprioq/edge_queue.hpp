#ifndef MCPRIOQ_EDGE_QUEUE_HPP_
#define MCPRIOQ_EDGE_QUEUE_HPP_

/// \file
/// Count-ordered doubly linked edge list with RCU-style adjacent swaps.
///
/// Readers walk `next` links only, without locks. All structural changes
/// (append, swap, unlink) on one queue are serialized by a per-queue reorder
/// permit that writers try to take and skip on contention; counter
/// increments never need it. A swap of adjacent entries publishes six single
/// link stores in the order given by kSwapPublicationOrder, chosen so that a
/// concurrent forward walk never sees a cycle and at worst misses or repeats
/// one of the two swapped entries.

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "mcprioq/node_id.hpp"
#include "mcprioq/reclamation.hpp"

namespace mcprioq {

class EdgeEntry {
 public:
  static constexpr std::uint32_t kLiveCanary = 0x11FE11FEu;
  static constexpr std::uint32_t kDeadCanary = 0xDEADDEADu;

  EdgeEntry(const NodeId* dst, std::uint64_t initial_count) noexcept
      : dst(dst), count(initial_count) {}
  ~EdgeEntry() { canary.store(kDeadCanary, std::memory_order_relaxed); }

  EdgeEntry(const EdgeEntry&) = delete;
  EdgeEntry& operator=(const EdgeEntry&) = delete;

  bool alive() const noexcept {
    return canary.load(std::memory_order_relaxed) == kLiveCanary;
  }

  const NodeId* const dst;  // null for sentinels
  std::atomic<std::uint64_t> count;
  std::atomic<EdgeEntry*> next{nullptr};
  std::atomic<EdgeEntry*> prev{nullptr};
  std::atomic<std::uint32_t> canary{kLiveCanary};
  bool linked = false;  // guarded by the owning queue's permit
};

/// Roles in a swap of `first` and `second` within pred -> first -> second ->
/// succ.
enum class SwapRole : std::uint8_t { pred, first, second, succ };
enum class Link : std::uint8_t { next, prev };

struct LinkStore {
  SwapRole node;
  Link link;
  SwapRole target;
};

/// Forward links are rewired back to front (first.next before second.next
/// before pred.next) so that second.next points at first only once first no
/// longer points at second. Backward links follow; only permit holders read
/// them.
inline constexpr std::array<LinkStore, 6> kSwapPublicationOrder{{
    {SwapRole::first, Link::next, SwapRole::succ},
    {SwapRole::second, Link::next, SwapRole::first},
    {SwapRole::pred, Link::next, SwapRole::second},
    {SwapRole::second, Link::prev, SwapRole::pred},
    {SwapRole::first, Link::prev, SwapRole::second},
    {SwapRole::succ, Link::prev, SwapRole::first},
}};

class EdgeQueue;

/// Exclusive right to restructure one queue. Obtained from
/// EdgeQueue::try_reorder() or EdgeQueue::reorder(); released on destruction.
class ReorderPermit {
 public:
  ReorderPermit(ReorderPermit&& other) noexcept : queue_(other.queue_) {
    other.queue_ = nullptr;
  }
  ReorderPermit& operator=(ReorderPermit&&) = delete;
  ReorderPermit(const ReorderPermit&) = delete;
  ReorderPermit& operator=(const ReorderPermit&) = delete;
  ~ReorderPermit();

  bool holds(const EdgeQueue& q) const noexcept { return queue_ == &q; }

 private:
  friend class EdgeQueue;
  explicit ReorderPermit(EdgeQueue* q) noexcept : queue_(q) {}
  EdgeQueue* queue_;
};

struct StabilizeResult {
  std::size_t passes = 0;
  std::size_t swaps = 0;
};

/// Counters a reader can sample before and after a traversal to bound what
/// it may have observed. Each structural operation bumps its `started`
/// counter before its first link store and its `done` counter after the last,
/// so (after.started - before.done) covers every operation overlapping a walk.
struct QueueVersion {
  std::uint64_t length = 0;
  std::uint64_t links_started = 0;
  std::uint64_t links_done = 0;
  std::uint64_t unlinks_started = 0;
  std::uint64_t unlinks_done = 0;
  std::uint64_t swaps_started = 0;
  std::uint64_t swaps_done = 0;
};

class EdgeQueue;

/// Records what one forward walk observed, for checking it against the
/// anomaly bound: with S swaps, I appends and U unlinks overlapping the
/// walk, it visits at most L + I + 2S entries (L = length at the start),
/// repeats at most S of them, and, when S = U = 0 and it reaches the tail,
/// misses none of the L entries present at the start.
class TraversalAudit {
 public:
  void begin(const EdgeQueue& q);
  /// Returns false once the walk has exceeded its bound; the caller must stop.
  bool observe(const EdgeQueue& q, const EdgeEntry& e);
  void end(const EdgeQueue& q, bool reached_tail);

  bool within_bounds() const noexcept;

  const QueueVersion& before() const noexcept { return before_; }
  const QueueVersion& after() const noexcept { return after_; }
  std::uint64_t visits() const noexcept { return visits_; }
  std::uint64_t duplicates() const noexcept { return duplicates_; }
  std::uint64_t canary_hits() const noexcept { return canary_hits_; }
  bool reached_tail() const noexcept { return reached_tail_; }
  bool aborted() const noexcept { return aborted_; }

 private:
  QueueVersion before_;
  QueueVersion after_;
  std::uint64_t visits_ = 0;
  std::uint64_t duplicates_ = 0;
  std::uint64_t canary_hits_ = 0;
  bool reached_tail_ = false;
  bool aborted_ = false;
  std::vector<const EdgeEntry*> seen_;
};

class EdgeQueue {
 public:
  explicit EdgeQueue(ReclamationDomain& domain) noexcept;
  EdgeQueue(const EdgeQueue&) = delete;
  EdgeQueue& operator=(const EdgeQueue&) = delete;

  std::optional<ReorderPermit> try_reorder();
  /// Spins with backoff until the permit is free.
  ReorderPermit reorder();

  /// Appends an unlinked entry after the current last entry.
  void push_tail(const ReorderPermit& permit, EdgeEntry* e);
  /// Exchanges `a` and its immediate successor `b`.
  void swap_adjacent(const ReorderPermit& permit, EdgeEntry* a, EdgeEntry* b);
  /// Moves `e` towards the head while its predecessor's count is strictly
  /// smaller. Returns the number of swaps.
  std::size_t bubble_up(const ReorderPermit& permit, EdgeEntry* e);
  /// Removes `e` and retires it; walks positioned on `e` continue through its
  /// preserved next link.
  void unlink(const ReorderPermit& permit, EdgeEntry* e);

  /// Bubble passes until one pass makes no swap.
  StabilizeResult stabilize(const ReadGuard& guard);

  /// Lock-free hand-off of a new entry to whoever holds the permit next.
  void enqueue_pending(EdgeEntry* e) noexcept;
  bool has_pending() const noexcept {
    return pending_.load(std::memory_order_seq_cst) != nullptr;
  }
  /// Links every pending entry at the tail, oldest first.
  std::size_t drain_pending(const ReorderPermit& permit);

  /// Calls visit(entry) head to tail until it returns false.
  template <typename Visitor>
  void traverse(const ReadGuard& guard, Visitor&& visit) const {
    (void)guard;
    for (const EdgeEntry* e = head_.next.load(std::memory_order_acquire);
         e != &tail_; e = e->next.load(std::memory_order_acquire)) {
      if (!visit(*e)) return;
    }
  }

  /// Walks prev links, tail to head. Only meaningful while the caller holds
  /// the permit or the queue is quiescent.
  template <typename Visitor>
  void traverse_backward(Visitor&& visit) const {
    for (const EdgeEntry* e = tail_.prev.load(std::memory_order_acquire);
         e != &head_; e = e->prev.load(std::memory_order_acquire)) {
      if (!visit(*e)) return;
    }
  }

  const EdgeEntry* head() const noexcept { return &head_; }
  const EdgeEntry* tail() const noexcept { return &tail_; }
  EdgeEntry* first(const ReorderPermit& permit) const;

  std::uint64_t length() const noexcept {
    return length_.load(std::memory_order_acquire);
  }
  bool empty() const noexcept { return length() == 0; }
  QueueVersion version() const noexcept;

 private:
  friend class ReorderPermit;
  void release() noexcept { busy_.store(false, std::memory_order_seq_cst); }

  ReclamationDomain& domain_;
  EdgeEntry head_{nullptr, std::numeric_limits<std::uint64_t>::max()};
  EdgeEntry tail_{nullptr, 0};
  std::atomic<bool> busy_{false};
  std::atomic<EdgeEntry*> pending_{nullptr};
  std::atomic<std::uint64_t> length_{0};
  std::atomic<std::uint64_t> links_started_{0};
  std::atomic<std::uint64_t> links_done_{0};
  std::atomic<std::uint64_t> unlinks_started_{0};
  std::atomic<std::uint64_t> unlinks_done_{0};
  std::atomic<std::uint64_t> swaps_started_{0};
  std::atomic<std::uint64_t> swaps_done_{0};
};

}  // namespace mcprioq

#endif  // MCPRIOQ_EDGE_QUEUE_HPP_
