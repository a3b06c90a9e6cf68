#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "denserew/error.hpp"
#include "denserew/state_graph.hpp"

using namespace denserew;
using namespace denserew::graph;

namespace {

using Kind = ObservationOutcome::Kind;

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no denserew::Error thrown";
  return Errc::InvalidArgument;
}

// Snapshot text for an empty N-slot graph with a hand-chosen change counter.
std::string empty_snapshot(std::size_t n, const std::string& counter) {
  std::ostringstream s;
  s << "denserew-state-graph 1\ncapacity " << n << "\ndimension 2\nepsilon_d 0.5\n"
    << "eviction oldest\nsample_interval 1\nweights 0\ncounters 0 0 " << counter
    << "\noccupied 0\nadjacency\n";
  for (std::size_t i = 0; i < n * n; ++i) s << "0 ";
  return s.str();
}

}  // namespace

TEST(StateGraph, ConstructionIsEmpty) {
  auto g = create_graph(4, 0.5, EvictionPolicy::Oldest, 1);
  EXPECT_EQ(g.capacity(), 4u);
  EXPECT_EQ(g.occupied_count(), 0u);
  EXPECT_EQ(g.change_counter(), 0.0);
  EXPECT_EQ(g.adjacency_matrix(), Matrix(4, 4));
}

TEST(StateGraph, ConstructionGuards) {
  EXPECT_EQ(code_of([] { create_graph(1, 0.5, EvictionPolicy::Oldest, 1); }), Errc::InvalidCapacity);
  EXPECT_EQ(code_of([] { create_graph(4, 0.5, EvictionPolicy::Oldest, 1, {1.0, 0.0}); }),
            Errc::InvalidWeights);
  EXPECT_EQ(code_of([] { create_graph(4, 0.5, EvictionPolicy::Oldest, 1, {1.0, -2.0}); }),
            Errc::InvalidWeights);
  EXPECT_EQ(code_of([] { create_graph(4, 0.5, EvictionPolicy::Oldest, 0); }), Errc::InvalidArgument);
}

TEST(StateGraph, Distance) {
  auto g = create_graph(4, 0.5, EvictionPolicy::Oldest, 1);
  const std::vector<double> o{0, 0}, b{3, 4};
  EXPECT_EQ(g.distance(b, b), 0.0);
  EXPECT_DOUBLE_EQ(g.distance(o, b), 5.0);

  auto w = create_graph(4, 0.5, EvictionPolicy::Oldest, 1, {4.0, 1.0});
  // sqrt(4*9 + 16) = sqrt(52)
  EXPECT_NEAR(w.distance(o, b), 2.0 * std::sqrt(13.0), 1e-12);
  EXPECT_NEAR(w.distance(o, b), 7.2111, 1e-4);

  const std::vector<double> three{1, 2, 3};
  EXPECT_EQ(code_of([&] { g.distance(o, three); }), Errc::DimensionError);
}

TEST(StateGraph, FirstObservationInsertsWithoutEdge) {
  auto g = create_graph(4, 0.5, EvictionPolicy::Oldest, 1);
  const auto out = g.observe_transition(std::nullopt, std::vector<double>{0, 0});
  EXPECT_EQ(out.kind, Kind::InsertedNew);
  ASSERT_TRUE(out.node);
  EXPECT_EQ(out.node->slot, 0u);
  EXPECT_FALSE(out.edge_updated);
  EXPECT_EQ(g.adjacency_matrix(), Matrix(4, 4));
  EXPECT_EQ(g.change_counter(), 3.0);
}

TEST(StateGraph, RelabelNearestNode) {
  auto g = create_graph(4, 0.2, EvictionPolicy::Oldest, 1);
  const auto n0 = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  const auto n1 = *g.observe_transition(n0, std::vector<double>{1, 0}).node;
  ASSERT_EQ(g.adjacency(0, 1), 1.0);
  const double c = g.change_counter();

  const auto out = g.observe_transition(n0, std::vector<double>{1.05, 0});
  EXPECT_EQ(out.kind, Kind::Relabeled);
  EXPECT_EQ(*out.node, n1);
  EXPECT_EQ(g.slot(1).feature, (std::vector<double>{1.05, 0}));
  EXPECT_EQ(g.adjacency(0, 1), 2.0);
  EXPECT_EQ(g.adjacency(1, 0), 2.0);
  EXPECT_EQ(g.change_counter(), c + 1.0);
}

TEST(StateGraph, RelabelSelfLoopAddsNothing) {
  auto g = create_graph(4, 0.2, EvictionPolicy::Oldest, 1);
  const auto n0 = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  const double c = g.change_counter();
  const auto out = g.observe_transition(n0, std::vector<double>{0.1, 0});
  EXPECT_EQ(out.kind, Kind::Relabeled);
  EXPECT_FALSE(out.edge_updated);
  EXPECT_EQ(g.adjacency(0, 0), 0.0);
  EXPECT_EQ(g.change_counter(), c);
}

TEST(StateGraph, RelabelKeepsFeatureWhenItWouldCrowdAnotherNode) {
  auto g = create_graph(4, 0.5, EvictionPolicy::Oldest, 1);
  const auto n0 = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  g.observe_transition(n0, std::vector<double>{0.9, 0});
  // Within 0.5 of n0 (0.45) and of n1 (0.45); the nearest (lowest id) is n0,
  // but moving it would land within epsilon_d of n1.
  const auto out = g.observe_transition(std::nullopt, std::vector<double>{0.45, 0});
  EXPECT_EQ(out.kind, Kind::Relabeled);
  EXPECT_EQ(out.node->slot, 0u);
  EXPECT_EQ(g.slot(0).feature, (std::vector<double>{0, 0}));
}

TEST(StateGraph, EvictOldestWhenFull) {
  auto g = create_graph(2, 0.5, EvictionPolicy::Oldest, 1);
  const auto n0 = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  const auto n1 = *g.observe_transition(n0, std::vector<double>{1, 0}).node;
  EXPECT_TRUE(g.full());
  EXPECT_LT(g.slot(0).age, g.slot(1).age);
  const double c = g.change_counter();

  const auto out = g.observe_transition(n1, std::vector<double>{9, 9});
  EXPECT_EQ(out.kind, Kind::EvictedAndInserted);
  EXPECT_EQ(out.evicted_slot, 0u);
  EXPECT_EQ(out.node->slot, 0u);
  EXPECT_EQ(g.slot(0).feature, (std::vector<double>{9, 9}));
  EXPECT_EQ(g.adjacency(0, 1), 1.0);
  EXPECT_EQ(g.adjacency(1, 0), 1.0);
  EXPECT_EQ(g.change_counter(), c + 1.0);
}

TEST(StateGraph, EvictionClearsOldEdges) {
  auto g = create_graph(3, 0.5, EvictionPolicy::Oldest, 1);
  auto a = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  auto b = *g.observe_transition(a, std::vector<double>{1, 0}).node;
  auto c = *g.observe_transition(b, std::vector<double>{2, 0}).node;
  g.observe_transition(c, std::vector<double>{0, 0});  // edge c-a
  ASSERT_EQ(g.adjacency(0, 1), 1.0);
  ASSERT_EQ(g.adjacency(0, 2), 1.0);
  // Slot 0 is oldest; no prev, so the new node has no edges at all.
  const auto out = g.observe_transition(std::nullopt, std::vector<double>{5, 5});
  EXPECT_EQ(out.evicted_slot, 0u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(g.adjacency(0, j), 0.0);
    EXPECT_EQ(g.adjacency(j, 0), 0.0);
  }
  EXPECT_EQ(g.adjacency(1, 2), 1.0);
}

TEST(StateGraph, WeakestConnectedEviction) {
  auto g = create_graph(3, 0.5, EvictionPolicy::WeakestConnected, 1);
  auto a = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  auto b = *g.observe_transition(a, std::vector<double>{1, 0}).node;
  a = *g.observe_transition(b, std::vector<double>{0, 0}).node;
  b = *g.observe_transition(a, std::vector<double>{1, 0}).node;
  g.observe_transition(std::nullopt, std::vector<double>{2, 0});  // isolated slot 2
  const auto out = g.observe_transition(std::nullopt, std::vector<double>{7, 7});
  EXPECT_EQ(out.evicted_slot, 2u);
}

TEST(StateGraph, EvictedPrevGivesStaleHandle) {
  auto g = create_graph(2, 0.5, EvictionPolicy::Oldest, 1);
  const auto n0 = *g.observe_transition(std::nullopt, std::vector<double>{0, 0}).node;
  g.observe_transition(n0, std::vector<double>{1, 0});
  // n0 is the victim and also prev: no edge is created.
  const auto out = g.observe_transition(n0, std::vector<double>{9, 9});
  EXPECT_EQ(out.evicted_slot, 0u);
  EXPECT_FALSE(out.edge_updated);
  EXPECT_EQ(g.adjacency(0, 1), 0.0);
  EXPECT_FALSE(g.is_current(n0));
  EXPECT_EQ(code_of([&] { g.observe_transition(n0, std::vector<double>{3, 3}); }), Errc::StaleNode);
  EXPECT_EQ(code_of([&] { g.set_label(n0, 1.0); }), Errc::StaleNode);
}

TEST(StateGraph, DimensionMismatch) {
  auto g = create_graph(4, 0.5, EvictionPolicy::Oldest, 1);
  g.observe_transition(std::nullopt, std::vector<double>{0, 0});
  EXPECT_EQ(code_of([&] { g.observe_transition(std::nullopt, std::vector<double>{0, 0, 0}); }),
            Errc::DimensionError);
}

TEST(StateGraph, TrainingTrigger) {
  std::istringstream at(empty_snapshot(10, "45"));
  auto g = StateGraph::load(at);
  EXPECT_TRUE(g.should_train_and_reset(0.5));
  EXPECT_EQ(g.change_counter(), 0.0);

  std::istringstream below(empty_snapshot(10, "44.999"));
  auto h = StateGraph::load(below);
  EXPECT_FALSE(h.should_train_and_reset(0.5));
  EXPECT_EQ(h.change_counter(), 44.999);

  auto z = create_graph(10, 0.5, EvictionPolicy::Oldest, 1);
  EXPECT_FALSE(z.should_train_and_reset(0.01));
  EXPECT_EQ(code_of([&] { z.should_train_and_reset(0.0); }), Errc::InvalidTolerance);
}

TEST(StateGraph, NormalizedAdjacency) {
  auto g = create_graph(3, 0.1, EvictionPolicy::Oldest, 1);
  EXPECT_EQ(g.normalized_adjacency(), Matrix(3, 3));

  const std::vector<double> p0{0, 0}, p1{1, 0}, p2{2, 0};
  const auto a = *g.observe_transition(std::nullopt, p0).node;
  const auto b = *g.observe_transition(a, p1).node;
  g.observe_transition(b, p0);
  g.observe_transition(a, p1);
  g.observe_transition(b, p0);
  const auto c = *g.observe_transition(a, p2).node;
  g.observe_transition(c, p0);
  ASSERT_EQ(g.adjacency(0, 1), 4.0);
  ASSERT_EQ(g.adjacency(0, 2), 2.0);

  const Matrix n = g.normalized_adjacency();
  EXPECT_EQ(n(0, 1), 1.0);
  EXPECT_EQ(n(0, 2), 0.5);
  EXPECT_EQ(n(1, 2), 0.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(n(i, j), n(j, i));
}

TEST(StateGraph, SampleIntervalSkipsSteps) {
  auto g = create_graph(4, 0.1, EvictionPolicy::Oldest, 3);
  EXPECT_EQ(g.observe_transition(std::nullopt, std::vector<double>{0, 0}).kind, Kind::InsertedNew);
  g.advance_step();
  const auto skipped = g.observe_transition(std::nullopt, std::vector<double>{5, 5});
  EXPECT_EQ(skipped.kind, Kind::SkippedByInterval);
  EXPECT_FALSE(skipped.node);
  EXPECT_EQ(g.occupied_count(), 1u);
  g.advance_step();
  g.advance_step();
  EXPECT_EQ(g.observe_transition(std::nullopt, std::vector<double>{5, 5}).kind, Kind::InsertedNew);
}

TEST(StateGraph, LabelsAndSnapshotRoundTrip) {
  auto g = create_graph(5, 0.05, EvictionPolicy::WeakestConnected, 2, {1.0, 0.3});
  std::optional<NodeRef> prev;
  for (int i = 0; i < 40; ++i) {
    const std::vector<double> f{std::sin(i * 0.7) / 3.0, std::cos(i * 1.3) / 7.0};
    const auto out = g.observe_transition(prev, f);
    if (out.node) prev = out.node;
    g.advance_step();
  }
  g.set_label(*prev, 0.1);
  std::stringstream buf;
  g.save(buf);
  const auto back = StateGraph::load(buf);
  EXPECT_TRUE(back == g);
  EXPECT_EQ(back.label(prev->slot), 0.1);
  EXPECT_EQ(back.change_counter(), g.change_counter());
  EXPECT_EQ(back.step_counter(), g.step_counter());

  std::istringstream junk("denserew-state-graph 2\n");
  EXPECT_EQ(code_of([&] { StateGraph::load(junk); }), Errc::ParseError);
}
