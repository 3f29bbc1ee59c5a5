#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "monotx/error.hpp"
#include "monotx/oracle.hpp"
#include "monotx/topology.hpp"
#include "test_util.hpp"

namespace monotx {
namespace {

constexpr int a = 1;
constexpr int b = 2;

bool has_edge(const AlignmentGraph &g, int from, int to) {
  return std::any_of(g.edges.begin(), g.edges.end(), [&](const GraphEdge &e) {
    return e.from == from && e.to == to;
  });
}

int emitting_count(const AlignmentGraph &g) {
  return static_cast<int>(g.nodes.size()) - 2;
}

TEST(CtctGraph, DistinctPairHasSkip) {
  const std::vector<int> y = {a, b};
  const AlignmentGraph g = build_ctct_graph(y, 0, 3);
  EXPECT_EQ(g.nodes.size(), 7u);
  EXPECT_EQ(g.min_path_len, 2);
  EXPECT_TRUE(has_edge(g, 2, 4));  // label a -> label b
  EXPECT_TRUE(validate_graph(g).ok()) << validate_graph(g).message;
}

TEST(CtctGraph, RepeatedPairHasNoSkip) {
  const std::vector<int> y = {a, a};
  const AlignmentGraph g = build_ctct_graph(y, 0, 2);
  EXPECT_FALSE(has_edge(g, 2, 4));
  EXPECT_EQ(g.min_path_len, 3);
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(CtctGraph, EmptyReference) {
  const AlignmentGraph g = build_ctct_graph({}, 0, 2);
  ASSERT_EQ(emitting_count(g), 1);
  EXPECT_EQ(g.nodes[1].emit_label, 0);
  EXPECT_TRUE(has_edge(g, 1, 1));
  EXPECT_EQ(g.min_path_len, 1);
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(CtctGraph, DecoderStates) {
  const std::vector<int> y = {a, b};
  const AlignmentGraph g = build_ctct_graph(y, 0, 3);
  for (const auto &e : g.edges) {
    if (e.to == g.end_id()) continue;
    const int to = e.to;
    if (to % 2 == 0) {  // label node l = to / 2
      const int l = to / 2;
      EXPECT_EQ(e.decoder_state, e.from == to ? l : l - 1);
    } else {  // blank node after (to - 1) / 2 labels
      EXPECT_EQ(e.decoder_state, (to - 1) / 2);
    }
  }
}

TEST(CtctGraph, MinPathLenCountsRepeats) {
  const std::vector<int> y = {a, a, b, b, a};
  EXPECT_EQ(build_ctct_graph(y, 0, 3).min_path_len, 5 + 2);
}

TEST(CtctGraph, RejectsBlankLabel) {
  const std::vector<int> y = {a, 0};
  try {
    build_ctct_graph(y, 0, 3);
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_EQ(e.code(), "invalid-label");
  }
  const std::vector<int> out_of_range = {3};
  EXPECT_THROW(build_ctct_graph(out_of_range, 0, 3), ValidationError);
}

TEST(MonoRnntGraph, SingleLabel) {
  const std::vector<int> y = {a};
  const AlignmentGraph g = build_monornnt_graph(y, 0, 2);
  EXPECT_EQ(g.nodes.size(), 5u);
  EXPECT_EQ(g.min_path_len, 1);
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(MonoRnntGraph, BackToBackLabels) {
  const std::vector<int> y = {a, b};
  const AlignmentGraph g = build_monornnt_graph(y, 0, 3);
  EXPECT_TRUE(has_edge(g, 2, 4));
  EXPECT_EQ(g.min_path_len, 2);
  EXPECT_TRUE(validate_graph(g).ok());
}

TEST(MonoRnntGraph, NoLabelSelfLoops) {
  const std::vector<int> y = {a, a, b};
  const AlignmentGraph g = build_monornnt_graph(y, 0, 3);
  for (const auto &e : g.edges) {
    if (e.from == e.to) EXPECT_EQ(g.nodes[e.to].emit_label, 0);
  }
  EXPECT_EQ(g.min_path_len, 3);
}

TEST(MonoRnntGraph, EmptyReference) {
  const AlignmentGraph g = build_monornnt_graph({}, 0, 2);
  EXPECT_EQ(emitting_count(g), 1);
  EXPECT_TRUE(has_edge(g, 1, 1));
  EXPECT_EQ(oracle::enumerate_alignments(g, 4).size(), 1u);
}

TEST(ValidateGraph, EdgeIntoStart) {
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a}, 0, 2);
  g.edges.push_back({1, 0, 0});
  EXPECT_EQ(to_string(validate_graph(g).error), "edge-into-start");
}

TEST(ValidateGraph, DecoderStateRange) {
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a}, 0, 2);
  g.edges[1].decoder_state = g.labels + 1;
  EXPECT_EQ(to_string(validate_graph(g).error), "decoder-state-range");
}

TEST(ValidateGraph, DanglingEdge) {
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a}, 0, 2);
  g.edges.push_back({1, 42, 0});
  EXPECT_EQ(to_string(validate_graph(g).error), "dangling-edge");
}

TEST(ValidateGraph, TopologicalOrder) {
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a, b}, 0, 3);
  g.edges.push_back({4, 2, 1});
  EXPECT_EQ(to_string(validate_graph(g).error), "bad-topological-order");
}

TEST(ValidateGraph, UnreachableNode) {
  // Blank node 3 of (a, b) still leads to label b but nothing enters it.
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a, b}, 0, 3);
  std::erase_if(g.edges, [](const GraphEdge &e) { return e.to == 3; });
  const GraphError err = validate_graph(g).error;
  EXPECT_EQ(to_string(err), "unreachable-node");
}

TEST(ValidateGraph, EdgeOutOfEnd) {
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a}, 0, 2);
  g.edges.push_back({g.end_id(), 1, 0});
  EXPECT_FALSE(validate_graph(g).ok());
}

TEST(ValidateGraph, MinPathLenMismatch) {
  AlignmentGraph g = build_ctct_graph(std::vector<int>{a}, 0, 2);
  g.min_path_len = 5;
  EXPECT_EQ(to_string(validate_graph(g).error), "min-path-len");
}

TEST(PathCounts, UniformExamples) {
  const std::vector<int> y = {a};
  EXPECT_EQ(count_paths(build_ctct_graph(y, 0, 2), 2), 3u);
  EXPECT_EQ(count_paths(build_monornnt_graph(y, 0, 2), 2), 2u);
}

TEST(PathCounts, DpMatchesEnumeration) {
  std::mt19937_64 rng(17);
  for (int U = 0; U <= 3; ++U) {
    for (int T = 1; T <= 6; ++T) {
      for (int trial = 0; trial < 3; ++trial) {
        const LabelSequence y = testing::random_labels(rng, U, 3);
        for (Topology topo : {Topology::kCtcT, Topology::kMonoRnnT}) {
          const AlignmentGraph g = build_graph(topo, y, 0, 3);
          EXPECT_EQ(count_paths(g, T), oracle::enumerate_alignments(g, T).size())
              << to_string(topo) << " U=" << U << " T=" << T;
        }
      }
    }
  }
}

TEST(Builders, Deterministic) {
  const std::vector<int> y = {a, b, b};
  EXPECT_EQ(build_ctct_graph(y, 0, 3), build_ctct_graph(y, 0, 3));
  EXPECT_EQ(build_monornnt_graph(y, 0, 3), build_monornnt_graph(y, 0, 3));
}

TEST(Builders, NonZeroBlank) {
  const std::vector<int> y = {0, 1};
  const AlignmentGraph g = build_ctct_graph(y, 2, 3);
  EXPECT_TRUE(validate_graph(g).ok());
  EXPECT_EQ(g.nodes[1].emit_label, 2);
}

TEST(TopologyNames, RoundTrip) {
  EXPECT_EQ(parse_topology("ctct"), Topology::kCtcT);
  EXPECT_EQ(parse_topology(to_string(Topology::kMonoRnnT)), Topology::kMonoRnnT);
  EXPECT_THROW(parse_topology("rnnt"), ValidationError);
}

}  // namespace
}  // namespace monotx
