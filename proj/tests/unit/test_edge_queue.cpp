#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <deque>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mcprioq/edge_queue.hpp"

namespace {

using mcprioq::EdgeEntry;
using mcprioq::EdgeQueue;
using mcprioq::NodeId;
using mcprioq::ReclamationDomain;
using mcprioq::TraversalAudit;

using Entries = std::vector<std::pair<std::string, std::uint64_t>>;

// Owns the entries of one queue; unlinked entries are handed to the domain.
class QueueFixture {
 public:
  QueueFixture() : queue_(domain_) {}
  ~QueueFixture() { domain_.quiesce(); }

  EdgeEntry* make(const std::string& name, std::uint64_t count) {
    names_.emplace_back(name);
    owned_.push_back(std::make_unique<EdgeEntry>(&names_.back(), count));
    return owned_.back().get();
  }

  EdgeEntry* push(const std::string& name, std::uint64_t count) {
    EdgeEntry* e = make(name, count);
    auto permit = queue_.reorder();
    queue_.push_tail(permit, e);
    return e;
  }

  void unlink(EdgeEntry* e) {
    auto it = std::find_if(owned_.begin(), owned_.end(),
                           [e](const auto& p) { return p.get() == e; });
    it->release();
    owned_.erase(it);
    auto permit = queue_.reorder();
    queue_.unlink(permit, e);
  }

  Entries forward() {
    Entries out;
    auto guard = domain_.enter_read();
    queue_.traverse(guard, [&](const EdgeEntry& e) {
      out.emplace_back(e.dst->str(), e.count.load());
      return true;
    });
    return out;
  }

  Entries backward() {
    Entries out;
    queue_.traverse_backward([&](const EdgeEntry& e) {
      out.emplace_back(e.dst->str(), e.count.load());
      return true;
    });
    std::reverse(out.begin(), out.end());
    return out;
  }

  ReclamationDomain& domain() { return domain_; }
  EdgeQueue& queue() { return queue_; }

 private:
  ReclamationDomain domain_;
  std::deque<NodeId> names_;
  std::vector<std::unique_ptr<EdgeEntry>> owned_;
  EdgeQueue queue_;
};

TEST(EdgeQueue, EmptyQueueHasNoVisits) {
  QueueFixture f;
  EXPECT_TRUE(f.forward().empty());
  EXPECT_TRUE(f.queue().empty());
}

TEST(EdgeQueue, PushTailOnEmpty) {
  QueueFixture f;
  f.push("E", 1);
  EXPECT_EQ(f.forward(), (Entries{{"E", 1}}));
  EXPECT_EQ(f.backward(), f.forward());
  EXPECT_EQ(f.queue().length(), 1u);
}

TEST(EdgeQueue, PushTailAppends) {
  QueueFixture f;
  f.push("B", 5);
  f.push("C", 1);
  EXPECT_EQ(f.forward(), (Entries{{"B", 5}, {"C", 1}}));
}

TEST(EdgeQueue, PushTailTieDoesNotSwap) {
  QueueFixture f;
  f.push("B", 1);
  EdgeEntry* c = f.push("C", 1);
  auto permit = f.queue().reorder();
  EXPECT_EQ(f.queue().bubble_up(permit, c), 0u);
  EXPECT_EQ(f.forward(), (Entries{{"B", 1}, {"C", 1}}));
}

TEST(EdgeQueue, SwapAdjacentInterior) {
  QueueFixture f;
  f.push("P", 9);
  EdgeEntry* a = f.push("A", 3);
  EdgeEntry* b = f.push("B", 2);
  f.push("N", 1);
  {
    auto permit = f.queue().reorder();
    f.queue().swap_adjacent(permit, a, b);
  }
  EXPECT_EQ(f.forward(), (Entries{{"P", 9}, {"B", 2}, {"A", 3}, {"N", 1}}));
  EXPECT_EQ(f.backward(), f.forward());
  EXPECT_EQ(f.queue().version().swaps_done, 1u);
}

TEST(EdgeQueue, SwapAdjacentAtSentinels) {
  QueueFixture f;
  EdgeEntry* a = f.push("A", 1);
  EdgeEntry* b = f.push("B", 2);
  {
    auto permit = f.queue().reorder();
    f.queue().swap_adjacent(permit, a, b);
  }
  EXPECT_EQ(f.forward(), (Entries{{"B", 2}, {"A", 1}}));
  EXPECT_EQ(f.backward(), f.forward());
  EXPECT_EQ(f.queue().head()->next.load(), b);
  EXPECT_EQ(f.queue().tail()->prev.load(), a);
}

TEST(EdgeQueue, BubbleUpStrictTie) {
  QueueFixture f;
  f.push("B", 5);
  EdgeEntry* c = f.push("C", 5);
  auto permit = f.queue().reorder();
  EXPECT_EQ(f.queue().bubble_up(permit, c), 0u);
  EXPECT_EQ(f.forward(), (Entries{{"B", 5}, {"C", 5}}));
}

TEST(EdgeQueue, BubbleUpSingleSwap) {
  QueueFixture f;
  f.push("B", 3);
  EdgeEntry* c = f.push("C", 4);
  auto permit = f.queue().reorder();
  EXPECT_EQ(f.queue().bubble_up(permit, c), 1u);
  EXPECT_EQ(f.forward(), (Entries{{"C", 4}, {"B", 3}}));
}

TEST(EdgeQueue, BubbleUpTwoSwaps) {
  QueueFixture f;
  f.push("B", 2);
  f.push("C", 2);
  EdgeEntry* d = f.push("D", 3);
  auto permit = f.queue().reorder();
  EXPECT_EQ(f.queue().bubble_up(permit, d), 2u);
  EXPECT_EQ(f.forward(), (Entries{{"D", 3}, {"B", 2}, {"C", 2}}));
  EXPECT_EQ(f.backward(), f.forward());
}

TEST(EdgeQueue, UnlinkOnlyEntry) {
  QueueFixture f;
  EdgeEntry* b = f.push("B", 1);
  f.unlink(b);
  EXPECT_TRUE(f.forward().empty());
  EXPECT_TRUE(f.queue().empty());
  EXPECT_EQ(f.queue().head()->next.load(), f.queue().tail());
}

TEST(EdgeQueue, UnlinkMiddle) {
  QueueFixture f;
  f.push("B", 3);
  EdgeEntry* c = f.push("C", 2);
  f.push("D", 1);
  f.unlink(c);
  EXPECT_EQ(f.forward(), (Entries{{"B", 3}, {"D", 1}}));
  EXPECT_EQ(f.backward(), f.forward());
}

TEST(EdgeQueue, TraversalPositionedAtUnlinkedEntryCompletes) {
  QueueFixture f;
  f.push("B", 3);
  EdgeEntry* c = f.push("C", 2);
  f.push("D", 1);
  std::vector<std::string> seen;
  {
    auto guard = f.domain().enter_read();
    f.queue().traverse(guard, [&](const EdgeEntry& e) {
      seen.push_back(e.dst->str());
      if (&e == c) f.unlink(c);
      EXPECT_TRUE(e.alive());
      return true;
    });
  }
  EXPECT_EQ(seen, (std::vector<std::string>{"B", "C", "D"}));
  EXPECT_EQ(f.forward(), (Entries{{"B", 3}, {"D", 1}}));
}

TEST(EdgeQueue, TraverseQuiescentOrder) {
  QueueFixture f;
  f.push("B", 5);
  f.push("C", 3);
  f.push("D", 2);
  EXPECT_EQ(f.forward(), (Entries{{"B", 5}, {"C", 3}, {"D", 2}}));
}

TEST(EdgeQueue, StabilizeSortedIsOnePass) {
  QueueFixture f;
  f.push("B", 5);
  f.push("C", 3);
  auto guard = f.domain().enter_read();
  const auto r = f.queue().stabilize(guard);
  EXPECT_EQ(r.passes, 1u);
  EXPECT_EQ(r.swaps, 0u);
}

TEST(EdgeQueue, StabilizeEmptyIsOnePass) {
  QueueFixture f;
  auto guard = f.domain().enter_read();
  const auto r = f.queue().stabilize(guard);
  EXPECT_EQ(r.passes, 1u);
  EXPECT_EQ(r.swaps, 0u);
}

TEST(EdgeQueue, StabilizeSorts) {
  QueueFixture f;
  f.push("B", 1);
  f.push("C", 3);
  f.push("D", 2);
  {
    auto guard = f.domain().enter_read();
    f.queue().stabilize(guard);
  }
  EXPECT_EQ(f.forward(), (Entries{{"C", 3}, {"D", 2}, {"B", 1}}));
  EXPECT_EQ(f.backward(), f.forward());
}

TEST(EdgeQueue, StabilizeMatchesStableSort) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    QueueFixture f;
    Entries expected;
    const int n = static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      const std::uint64_t c = 1 + rng() % 4;
      f.push("x" + std::to_string(i), c);
      expected.emplace_back("x" + std::to_string(i), c);
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    {
      auto guard = f.domain().enter_read();
      f.queue().stabilize(guard);
    }
    ASSERT_EQ(f.forward(), expected);
    ASSERT_EQ(f.backward(), expected);
  }
}

TEST(EdgeQueue, PendingDrainsOldestFirst) {
  QueueFixture f;
  EdgeEntry* a = f.make("A", 1);
  EdgeEntry* b = f.make("B", 1);
  f.queue().enqueue_pending(a);
  f.queue().enqueue_pending(b);
  EXPECT_TRUE(f.queue().has_pending());
  {
    auto permit = f.queue().reorder();
    EXPECT_EQ(f.queue().drain_pending(permit), 2u);
  }
  EXPECT_FALSE(f.queue().has_pending());
  EXPECT_EQ(f.forward(), (Entries{{"A", 1}, {"B", 1}}));
}

TEST(EdgeQueue, PermitIsExclusive) {
  QueueFixture f;
  auto permit = f.queue().try_reorder();
  ASSERT_TRUE(permit.has_value());
  EXPECT_FALSE(f.queue().try_reorder().has_value());
  permit.reset();
  EXPECT_TRUE(f.queue().try_reorder().has_value());
}

TEST(TraversalAudit, QuiescentWalkIsWithinBounds) {
  QueueFixture f;
  f.push("B", 5);
  f.push("C", 3);
  TraversalAudit audit;
  auto guard = f.domain().enter_read();
  audit.begin(f.queue());
  f.queue().traverse(guard, [&](const EdgeEntry& e) { return audit.observe(f.queue(), e); });
  audit.end(f.queue(), true);
  EXPECT_EQ(audit.visits(), 2u);
  EXPECT_TRUE(audit.within_bounds());
}

TEST(TraversalAudit, FlagsOmissionWithoutConcurrentChanges) {
  QueueFixture f;
  f.push("B", 5);
  f.push("C", 3);
  TraversalAudit audit;
  audit.begin(f.queue());
  audit.observe(f.queue(), *f.queue().head()->next.load());
  audit.end(f.queue(), true);
  EXPECT_FALSE(audit.within_bounds());
}

TEST(TraversalAudit, FlagsDuplicateWithoutSwaps) {
  QueueFixture f;
  EdgeEntry* b = f.push("B", 5);
  f.push("C", 3);
  TraversalAudit audit;
  audit.begin(f.queue());
  audit.observe(f.queue(), *b);
  audit.observe(f.queue(), *b);
  audit.end(f.queue(), false);
  EXPECT_EQ(audit.duplicates(), 1u);
  EXPECT_FALSE(audit.within_bounds());
}

// One thread keeps re-sorting under random increments while readers audit
// every walk.
TEST(EdgeQueue, ConcurrentSwapsStayWithinAnomalyBound) {
  QueueFixture f;
  std::vector<EdgeEntry*> entries;
  for (int i = 0; i < 32; ++i) entries.push_back(f.push("e" + std::to_string(i), 1));
  std::atomic<bool> done{false};
  std::atomic<std::uint64_t> violations{0};
  std::atomic<std::uint64_t> walks{0};

  std::vector<std::thread> readers;
  for (int r = 0; r < 2; ++r) {
    readers.emplace_back([&] {
      TraversalAudit audit;
      while (!done.load()) {
        auto guard = f.domain().enter_read();
        audit.begin(f.queue());
        bool reached = true;
        f.queue().traverse(guard, [&](const EdgeEntry& e) {
          if (!audit.observe(f.queue(), e)) return reached = false;
          return true;
        });
        audit.end(f.queue(), reached);
        if (!audit.within_bounds()) violations.fetch_add(1);
        walks.fetch_add(1);
      }
    });
  }
  std::mt19937_64 rng(3);
  // Keep swapping until the readers have audited enough walks; on a single
  // core they may not get scheduled at all otherwise.
  for (int i = 0; i < 20000 || walks.load() < 2000; ++i) {
    EdgeEntry* e = entries[rng() % entries.size()];
    e->count.fetch_add(1);
    auto permit = f.queue().reorder();
    f.queue().bubble_up(permit, e);
    if (i % 64 == 0) std::this_thread::yield();
  }
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_EQ(violations.load(), 0u);
  EXPECT_GT(walks.load(), 0u);
  EXPECT_EQ(f.backward(), f.forward());
}

}  // namespace
