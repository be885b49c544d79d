#include "mcprioq/edge_queue.hpp"

#include <algorithm>
#include <cassert>
#include <thread>
#include <vector>

namespace mcprioq {

ReorderPermit::~ReorderPermit() {
  if (queue_ != nullptr) queue_->release();
}

EdgeQueue::EdgeQueue(ReclamationDomain& domain) noexcept : domain_(domain) {
  head_.next.store(&tail_, std::memory_order_relaxed);
  tail_.prev.store(&head_, std::memory_order_relaxed);
  head_.linked = true;
  tail_.linked = true;
}

std::optional<ReorderPermit> EdgeQueue::try_reorder() {
  if (busy_.load(std::memory_order_relaxed) ||
      busy_.exchange(true, std::memory_order_seq_cst)) {
    return std::nullopt;
  }
  return ReorderPermit(this);
}

ReorderPermit EdgeQueue::reorder() {
  for (unsigned spins = 0;; ++spins) {
    if (auto permit = try_reorder()) return std::move(*permit);
    if (spins > 16) std::this_thread::yield();
  }
}

EdgeEntry* EdgeQueue::first(const ReorderPermit& permit) const {
  assert(permit.holds(*this));
  (void)permit;
  return head_.next.load(std::memory_order_relaxed);
}

void EdgeQueue::push_tail(const ReorderPermit& permit, EdgeEntry* e) {
  assert(permit.holds(*this));
  assert(!e->linked);
  (void)permit;
  EdgeEntry* last = tail_.prev.load(std::memory_order_relaxed);
  e->prev.store(last, std::memory_order_relaxed);
  e->next.store(&tail_, std::memory_order_relaxed);
  e->linked = true;
  links_started_.fetch_add(1, std::memory_order_seq_cst);
  last->next.store(e, std::memory_order_release);
  tail_.prev.store(e, std::memory_order_release);
  length_.fetch_add(1, std::memory_order_seq_cst);
  links_done_.fetch_add(1, std::memory_order_seq_cst);
}

void EdgeQueue::swap_adjacent(const ReorderPermit& permit, EdgeEntry* a,
                              EdgeEntry* b) {
  assert(permit.holds(*this));
  assert(a->next.load(std::memory_order_relaxed) == b);
  assert(b->prev.load(std::memory_order_relaxed) == a);
  (void)permit;
  EdgeEntry* const roles[] = {a->prev.load(std::memory_order_relaxed), a, b,
                              b->next.load(std::memory_order_relaxed)};
  swaps_started_.fetch_add(1, std::memory_order_seq_cst);
  for (const LinkStore& step : kSwapPublicationOrder) {
    EdgeEntry* node = roles[static_cast<std::size_t>(step.node)];
    EdgeEntry* target = roles[static_cast<std::size_t>(step.target)];
    auto& link = step.link == Link::next ? node->next : node->prev;
    link.store(target, std::memory_order_release);
  }
  swaps_done_.fetch_add(1, std::memory_order_seq_cst);
}

std::size_t EdgeQueue::bubble_up(const ReorderPermit& permit, EdgeEntry* e) {
  assert(e->linked);
  std::size_t swaps = 0;
  for (;;) {
    EdgeEntry* p = e->prev.load(std::memory_order_relaxed);
    if (p == &head_) break;
    if (p->count.load(std::memory_order_acquire) >=
        e->count.load(std::memory_order_acquire)) {
      break;
    }
    swap_adjacent(permit, p, e);
    ++swaps;
  }
  return swaps;
}

void EdgeQueue::unlink(const ReorderPermit& permit, EdgeEntry* e) {
  assert(permit.holds(*this));
  assert(e->linked);
  (void)permit;
  EdgeEntry* p = e->prev.load(std::memory_order_relaxed);
  EdgeEntry* n = e->next.load(std::memory_order_relaxed);
  unlinks_started_.fetch_add(1, std::memory_order_seq_cst);
  p->next.store(n, std::memory_order_release);
  n->prev.store(p, std::memory_order_release);
  e->linked = false;
  length_.fetch_sub(1, std::memory_order_seq_cst);
  unlinks_done_.fetch_add(1, std::memory_order_seq_cst);
  domain_.retire(e);
}

StabilizeResult EdgeQueue::stabilize(const ReadGuard& guard) {
  (void)guard;
  ReorderPermit permit = reorder();
  drain_pending(permit);
  StabilizeResult result;
  for (;;) {
    ++result.passes;
    std::size_t swaps = 0;
    EdgeEntry* e = head_.next.load(std::memory_order_relaxed);
    while (e != &tail_) {
      EdgeEntry* p = e->prev.load(std::memory_order_relaxed);
      if (p != &head_ && p->count.load(std::memory_order_acquire) <
                             e->count.load(std::memory_order_acquire)) {
        swap_adjacent(permit, p, e);
        ++swaps;
        e = p->next.load(std::memory_order_relaxed);
      } else {
        e = e->next.load(std::memory_order_relaxed);
      }
    }
    result.swaps += swaps;
    if (swaps == 0) return result;
  }
}

void EdgeQueue::enqueue_pending(EdgeEntry* e) noexcept {
  EdgeEntry* head = pending_.load(std::memory_order_relaxed);
  do {
    e->next.store(head, std::memory_order_relaxed);
  } while (!pending_.compare_exchange_weak(head, e, std::memory_order_seq_cst,
                                           std::memory_order_relaxed));
}

std::size_t EdgeQueue::drain_pending(const ReorderPermit& permit) {
  EdgeEntry* stack = pending_.exchange(nullptr, std::memory_order_seq_cst);
  if (stack == nullptr) return 0;
  std::vector<EdgeEntry*> batch;
  for (EdgeEntry* e = stack; e != nullptr;
       e = e->next.load(std::memory_order_relaxed)) {
    batch.push_back(e);
  }
  for (auto it = batch.rbegin(); it != batch.rend(); ++it) push_tail(permit, *it);
  return batch.size();
}

QueueVersion EdgeQueue::version() const noexcept {
  // Completed counters first and started counters last, so that an operation
  // finishing during this call can only loosen the bound computed from it.
  QueueVersion v;
  v.swaps_done = swaps_done_.load(std::memory_order_seq_cst);
  v.links_done = links_done_.load(std::memory_order_seq_cst);
  v.unlinks_done = unlinks_done_.load(std::memory_order_seq_cst);
  v.length = length_.load(std::memory_order_seq_cst);
  v.unlinks_started = unlinks_started_.load(std::memory_order_seq_cst);
  v.links_started = links_started_.load(std::memory_order_seq_cst);
  v.swaps_started = swaps_started_.load(std::memory_order_seq_cst);
  return v;
}

void TraversalAudit::begin(const EdgeQueue& q) {
  before_ = q.version();
  after_ = before_;
  visits_ = duplicates_ = canary_hits_ = 0;
  reached_tail_ = aborted_ = false;
  seen_.clear();
}

bool TraversalAudit::observe(const EdgeQueue& q, const EdgeEntry& e) {
  ++visits_;
  if (!e.alive()) ++canary_hits_;
  seen_.push_back(&e);
  if (visits_ > before_.length) {
    const QueueVersion now = q.version();
    const std::uint64_t limit =
        before_.length + (now.links_started - before_.links_done) +
        2 * (now.swaps_started - before_.swaps_done);
    if (visits_ > limit) {
      aborted_ = true;
      return false;
    }
  }
  return true;
}

void TraversalAudit::end(const EdgeQueue& q, bool reached_tail) {
  after_ = q.version();
  reached_tail_ = reached_tail && !aborted_;
  std::sort(seen_.begin(), seen_.end());
  duplicates_ = static_cast<std::uint64_t>(
      seen_.size() -
      static_cast<std::size_t>(std::unique(seen_.begin(), seen_.end()) -
                               seen_.begin()));
}

bool TraversalAudit::within_bounds() const noexcept {
  const std::uint64_t swaps = after_.swaps_started - before_.swaps_done;
  const std::uint64_t links = after_.links_started - before_.links_done;
  const std::uint64_t unlinks = after_.unlinks_started - before_.unlinks_done;
  if (aborted_ || canary_hits_ != 0) return false;
  if (visits_ > before_.length + links + 2 * swaps) return false;
  if (duplicates_ > swaps) return false;
  if (reached_tail_ && swaps == 0 && unlinks == 0 && visits_ < before_.length) {
    return false;
  }
  return true;
}

}  // namespace mcprioq
