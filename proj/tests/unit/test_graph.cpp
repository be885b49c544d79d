#include <gtest/gtest.h>

#include <string>
#include <thread>
#include <vector>

#include "mcprioq/errors.hpp"
#include "mcprioq/graph.hpp"

namespace {

using mcprioq::DecayConfig;
using mcprioq::Graph;
using mcprioq::GraphStats;
using mcprioq::NodeId;
using mcprioq::Rational;
using mcprioq::RecommendedItem;
using mcprioq::SourceImage;

using Edges = std::vector<std::pair<std::string, std::uint64_t>>;

// Builds src's queue by replaying transitions in an order that produces the
// listed counts with the listed order (highest first, ties in list order).
void build(Graph& g, const std::string& src, const Edges& edges) {
  for (const auto& [dst, count] : edges) {
    for (std::uint64_t i = 0; i < count; ++i) g.record_transition(src, dst);
  }
}

Edges edges_of(const Graph& g, const std::string& src) {
  for (const SourceImage& s : g.image()) {
    if (s.src == src) return s.edges;
  }
  return {};
}

std::uint64_t total_of(const Graph& g, const std::string& src) {
  for (const SourceImage& s : g.image()) {
    if (s.src == src) return s.total;
  }
  return 0;
}

std::vector<RecommendedItem> items(std::initializer_list<RecommendedItem> list) {
  return list;
}

TEST(Graph, FirstTransitionCreatesEdge) {
  Graph g;
  const auto r = g.record_transition("A", "B");
  EXPECT_TRUE(r.created);
  EXPECT_EQ(r.swaps, 0u);
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"B", 1}}));
  EXPECT_EQ(total_of(g, "A"), 1u);
}

TEST(Graph, IncrementWithoutInversionDoesNotSwap) {
  Graph g;
  build(g, "A", {{"B", 5}, {"C", 2}});
  const auto r = g.record_transition("A", "C");
  EXPECT_FALSE(r.created);
  EXPECT_EQ(r.swaps, 0u);
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"B", 5}, {"C", 3}}));
}

TEST(Graph, IncrementPastPredecessorSwaps) {
  Graph g;
  build(g, "A", {{"B", 3}, {"C", 3}});
  const auto r = g.record_transition("A", "C");
  EXPECT_EQ(r.swaps, 1u);
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"C", 4}, {"B", 3}}));
  EXPECT_EQ(total_of(g, "A"), 7u);
}

TEST(Graph, TopN) {
  Graph g;
  build(g, "A", {{"B", 5}, {"C", 3}, {"D", 2}});
  const NodeId a("A");
  EXPECT_TRUE(g.recommend_top_n(a, 0).items.empty());
  EXPECT_TRUE(g.recommend_top_n(a, 0).found);

  const auto two = g.recommend_top_n(a, 2);
  EXPECT_EQ(two.items, items({{"B", 0.5}, {"C", 0.3}}));
  EXPECT_DOUBLE_EQ(two.cumulative, 0.8);

  EXPECT_EQ(g.recommend_top_n(a, 99).items.size(), 3u);
}

TEST(Graph, Cumulative) {
  Graph g;
  build(g, "A", {{"B", 5}, {"C", 3}, {"D", 2}});
  const NodeId a("A");
  EXPECT_EQ(g.recommend_cumulative(a, 0.7).items, items({{"B", 0.5}, {"C", 0.3}}));

  const auto zero = g.recommend_cumulative(a, 0.0);
  EXPECT_TRUE(zero.items.empty());
  EXPECT_EQ(zero.cumulative, 0.0);

  const auto all = g.recommend_cumulative(a, 1.0);
  EXPECT_EQ(all.items.size(), 3u);
  EXPECT_DOUBLE_EQ(all.cumulative, 1.0);
}

TEST(Graph, CumulativeRejectsThresholdOutsideUnitInterval) {
  Graph g;
  build(g, "A", {{"B", 1}});
  EXPECT_THROW(g.recommend_cumulative(NodeId("A"), 1.5), mcprioq::InputError);
  EXPECT_THROW(g.recommend_cumulative(NodeId("A"), -0.1), mcprioq::InputError);
}

TEST(Graph, UnknownSourceIsNotFound) {
  Graph g;
  build(g, "A", {{"B", 1}});
  EXPECT_FALSE(g.recommend_top_n(NodeId("Z"), 5).found);
  // A destination that never acted as a source is not a source either.
  EXPECT_FALSE(g.recommend_top_n(NodeId("B"), 5).found);
}

TEST(Graph, DecayHalves) {
  Graph g;
  build(g, "A", {{"B", 5}, {"C", 3}, {"D", 1}});
  const auto r = g.decay(Rational(1, 2));
  EXPECT_EQ(r.edges_removed, 1u);
  EXPECT_EQ(r.sources_emptied, 0u);
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"B", 2}, {"C", 1}}));
  EXPECT_EQ(total_of(g, "A"), 3u);
  EXPECT_TRUE(g.check_invariants().empty());
}

TEST(Graph, DecayByOneIsIdentity) {
  Graph g;
  build(g, "A", {{"B", 5}, {"C", 3}, {"D", 1}});
  const auto before = g.image();
  const auto r = g.decay(Rational(1, 1));
  EXPECT_EQ(r.edges_removed, 0u);
  EXPECT_EQ(g.image(), before);
}

TEST(Graph, DecayEmptiesSourceButKeepsItQueryable) {
  Graph g;
  build(g, "A", {{"B", 1}});
  const auto r = g.decay(Rational(1, 2));
  EXPECT_EQ(r.sources_emptied, 1u);
  EXPECT_EQ(r.edges_removed, 1u);
  const auto rec = g.recommend_top_n(NodeId("A"), 5);
  EXPECT_TRUE(rec.found);
  EXPECT_TRUE(rec.items.empty());
  EXPECT_EQ(g.stats(), (GraphStats{0, 0, 0}));

  // The edge can be recreated afterwards.
  EXPECT_TRUE(g.record_transition("A", "B").created);
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"B", 1}}));
}

TEST(Graph, DefaultDecayUsesConfiguredFactor) {
  DecayConfig config;
  config.factor = Rational(1, 4);
  Graph g(config);
  build(g, "A", {{"B", 8}});
  g.decay();
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"B", 2}}));
}

TEST(Graph, StatsCountSourcesEdgesTransitions) {
  Graph g;
  EXPECT_EQ(g.stats(), (GraphStats{0, 0, 0}));
  g.record_transition("A", "B");
  g.record_transition("A", "C");
  g.record_transition("A", "D");
  EXPECT_EQ(g.stats(), (GraphStats{1, 3, 3}));
}

TEST(Graph, StatsAfterLongStream) {
  Graph g;
  for (int i = 0; i < 10000; ++i) {
    g.record_transition("s" + std::to_string(i % 37), "d" + std::to_string(i % 101));
  }
  EXPECT_EQ(g.stats().transitions, 10000u);
  EXPECT_TRUE(g.check_invariants().empty());
}

TEST(Graph, StabilizeAllOnEmptyGraph) {
  Graph g;
  const auto r = g.stabilize_all();
  EXPECT_EQ(r.swaps, 0u);
}

TEST(Graph, SelfLoopsAreOrdinaryEdges) {
  Graph g;
  g.record_transition("A", "A");
  g.record_transition("A", "B");
  g.record_transition("A", "A");
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"A", 2}, {"B", 1}}));
}

TEST(Graph, InvalidNodeIdRejected) {
  Graph g;
  EXPECT_THROW(g.record_transition("", "B"), mcprioq::InputError);
  EXPECT_THROW(g.record_transition("A", "B,C"), mcprioq::InputError);
  EXPECT_THROW(g.record_transition("A B", "C"), mcprioq::InputError);
}

TEST(Graph, RestoreSourceValidates) {
  Graph g;
  using Pairs = std::vector<std::pair<NodeId, std::uint64_t>>;
  const Pairs ok{{NodeId("B"), 5}, {NodeId("C"), 3}};
  g.restore_source(NodeId("A"), 8, ok);
  EXPECT_EQ(edges_of(g, "A"), (Edges{{"B", 5}, {"C", 3}}));
  EXPECT_THROW(g.restore_source(NodeId("A"), 8, ok), mcprioq::InputError);

  const Pairs increasing{{NodeId("B"), 3}, {NodeId("C"), 5}};
  EXPECT_THROW(g.restore_source(NodeId("X"), 8, increasing), mcprioq::InputError);
  const Pairs zero{{NodeId("B"), 0}};
  EXPECT_THROW(g.restore_source(NodeId("Y"), 0, zero), mcprioq::InputError);
  const Pairs dup{{NodeId("B"), 2}, {NodeId("B"), 1}};
  EXPECT_THROW(g.restore_source(NodeId("Z"), 3, dup), mcprioq::InputError);
  EXPECT_THROW(g.restore_source(NodeId("W"), 9, ok), mcprioq::InputError);
}

TEST(Graph, DecayConfigTriggers) {
  DecayConfig manual;
  EXPECT_FALSE(manual.due(1000000, std::chrono::hours(1)));

  DecayConfig every;
  every.trigger = DecayConfig::EveryNTransitions{10};
  EXPECT_FALSE(every.due(9, {}));
  EXPECT_TRUE(every.due(10, {}));

  DecayConfig periodic;
  periodic.trigger = DecayConfig::Periodic{std::chrono::seconds(5)};
  EXPECT_FALSE(periodic.due(0, std::chrono::seconds(4)));
  EXPECT_TRUE(periodic.due(0, std::chrono::seconds(5)));

  DecayConfig bad;
  bad.factor = Rational(0, 1);
  EXPECT_THROW(bad.validate(), mcprioq::InputError);
  bad.factor = Rational(3, 2);
  EXPECT_THROW(bad.validate(), mcprioq::InputError);
}

TEST(Graph, ConcurrentWritersThenStabilizeRestoresOrder) {
  Graph g;
  constexpr int kWriters = 4;
  constexpr int kOps = 20000;
  std::vector<std::thread> threads;
  for (int w = 0; w < kWriters; ++w) {
    threads.emplace_back([&, w] {
      std::uint64_t x = 12345 + w;
      for (int i = 0; i < kOps; ++i) {
        x = x * 6364136223846793005ULL + 1442695040888963407ULL;
        const int src = static_cast<int>((x >> 33) % 4);
        const int dst = static_cast<int>((x >> 20) % 50);
        g.record_transition("s" + std::to_string(src), "d" + std::to_string(dst));
      }
    });
  }
  for (auto& t : threads) t.join();
  g.domain().quiesce();
  g.stabilize_all();
  EXPECT_TRUE(g.check_invariants().empty());
  EXPECT_EQ(g.stats().transitions, static_cast<std::uint64_t>(kWriters * kOps));
  for (const SourceImage& s : g.image()) {
    for (std::size_t i = 1; i < s.edges.size(); ++i) {
      ASSERT_GE(s.edges[i - 1].second, s.edges[i].second);
    }
  }
}

TEST(Graph, ConcurrentDecayAndWritersConserveTotals) {
  Graph g;
  std::atomic<bool> done{false};
  std::vector<std::thread> writers;
  for (int w = 0; w < 3; ++w) {
    writers.emplace_back([&, w] {
      std::uint64_t x = 99 + w;
      for (int i = 0; i < 20000; ++i) {
        x = x * 6364136223846793005ULL + 1442695040888963407ULL;
        g.record_transition("s" + std::to_string((x >> 40) % 3),
                            "d" + std::to_string((x >> 20) % 20));
      }
    });
  }
  std::thread decayer([&] {
    while (!done.load()) {
      g.decay(Rational(1, 2));
      std::this_thread::yield();
    }
  });
  for (auto& t : writers) t.join();
  done = true;
  decayer.join();
  g.domain().quiesce();
  g.stabilize_all();
  EXPECT_EQ(g.check_invariants(), std::vector<std::string>{});
}

}  // namespace
