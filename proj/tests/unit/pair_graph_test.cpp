#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "bhavnet/error.hpp"
#include "bhavnet/pair_graph.hpp"
#include "bhavnet/union_find.hpp"
#include "oracles.hpp"

using namespace bhavnet;

namespace {

std::vector<LabeledPair> pairs_of(std::initializer_list<std::pair<const char*, const char*>> words) {
  std::vector<LabeledPair> out;
  for (const auto& [a, b] : words) out.push_back({a, b, Relation::synonym, ""});
  return out;
}

// Forwards whose fingerprints are mutually orthogonal, so rule 2 never fires for tau >= 0.
std::vector<PairForward> orthogonal_forwards(std::size_t n) {
  std::vector<PairForward> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Tensor e({n});
    e[i] = 1.0;
    out[i].s1 = out[i].s2 = e;
    out[i].a1 = out[i].a2 = e;
  }
  return out;
}

oracle::EdgeMap as_map(const PairGraph& g) {
  oracle::EdgeMap m;
  for (const Edge& e : g.edges) m[{e.src, e.dst}] = {e.weight, static_cast<int>(e.rule)};
  return m;
}

std::vector<double> mean_of(const Tensor& a, const Tensor& b) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) / 2;
  return out;
}

}  // namespace

TEST(BuildGraph, SharedWordFixture) {
  const auto batch = pairs_of({{"hot", "cold"}, {"cold", "icy"}, {"big", "small"}});
  const PairGraph g = build_graph(batch, orthogonal_forwards(3), 1.01, 0.5);
  EXPECT_EQ(g.node_count, 3u);
  const std::vector<Edge> want{{0, 1, 1.0, EdgeRule::shared_word}, {1, 0, 1.0, EdgeRule::shared_word}};
  EXPECT_EQ(g.edges, want);
  EXPECT_TRUE(g.adjacency()[2].empty());
}

TEST(BuildGraph, ChainGetsOneTransitiveEdge) {
  const auto batch = pairs_of({{"a", "b"}, {"b", "c"}, {"c", "d"}});
  const PairGraph g = build_graph(batch, orthogonal_forwards(3), 1.01, 0.5);
  const oracle::EdgeMap m = as_map(g);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_EQ(m.at({0, 2}), (oracle::GraphEdge{0.5, 3}));
  EXPECT_EQ(m.at({2, 0}), (oracle::GraphEdge{0.5, 3}));
  EXPECT_EQ(m.at({0, 1}), (oracle::GraphEdge{1.0, 1}));
}

TEST(BuildGraph, TransitiveStepDoesNotCascade) {
  const auto batch = pairs_of({{"a", "b"}, {"b", "c"}, {"c", "d"}, {"d", "e"}});
  const oracle::EdgeMap m = as_map(build_graph(batch, orthogonal_forwards(4), 1.01, 0.5));
  EXPECT_FALSE(m.count({0, 3}));
  EXPECT_TRUE(m.count({0, 2}));
  EXPECT_TRUE(m.count({1, 3}));
}

TEST(BuildGraph, SinglePairHasNoEdges) {
  const PairGraph g = build_graph(pairs_of({{"a", "b"}}), orthogonal_forwards(1), 0.0, 0.5);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.node_count, 1u);
}

TEST(BuildGraph, SimilarityRuleInEitherSpace) {
  auto fw = orthogonal_forwards(2);
  const auto batch = pairs_of({{"a", "b"}, {"c", "d"}});
  EXPECT_TRUE(build_graph(batch, fw, 0.5, 0.5).edges.empty());
  fw[1].a1 = fw[1].a2 = fw[0].a1;
  const PairGraph g = build_graph(batch, fw, 0.5, 0.5);
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0].rule, EdgeRule::similarity);
  // Equal fingerprints give cosine exactly 1, which is not above tau = 1.
  EXPECT_TRUE(build_graph(batch, fw, 1.0, 0.5).edges.empty());
}

TEST(BuildGraph, MisalignedInputs) {
  EXPECT_THROW(build_graph(pairs_of({{"a", "b"}, {"c", "d"}}), orthogonal_forwards(3), 0.9, 0.5), InvalidInput);
}

TEST(BuildGraph, AboveOneAndDisjointWordsGivesNoEdges) {
  Rng rng(1);
  std::vector<PairForward> fw(6);
  for (auto& f : fw) {
    f.s1 = oracle::random_tensor(rng, {4});
    f.s2 = f.s1;
    f.a1 = f.a2 = oracle::random_tensor(rng, {4});
  }
  const auto batch = pairs_of({{"a", "b"}, {"c", "d"}, {"e", "f"}, {"g", "h"}, {"i", "j"}, {"k", "l"}});
  EXPECT_TRUE(build_graph(batch, fw, 1.0001, 0.5).edges.empty());
}

class RandomBatches : public ::testing::Test {
 protected:
  struct Case {
    std::vector<LabeledPair> batch;
    std::vector<PairForward> forwards;
    double tau;
  };

  static Case make(Rng& rng, bool with_ant) {
    Case c;
    const std::size_t n = 1 + rng.below(16);
    const std::size_t vocab = 4 + rng.below(30);
    const std::size_t width = 2 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t a = rng.below(vocab), b = rng.below(vocab);
      while (b == a) b = rng.below(vocab);
      c.batch.push_back({"w" + std::to_string(a), "w" + std::to_string(b), Relation::synonym, ""});
      PairForward f;
      f.s1 = oracle::random_tensor(rng, {width});
      f.s2 = oracle::random_tensor(rng, {width});
      if (with_ant) {
        f.a1 = oracle::random_tensor(rng, {width});
        f.a2 = oracle::random_tensor(rng, {width});
      }
      c.forwards.push_back(std::move(f));
    }
    c.tau = rng.uniform(0.0, 0.95);
    return c;
  }
};

TEST_F(RandomBatches, MatchesBruteForceExactly) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Case c = make(rng, trial % 4 != 0);
    const double tw = trial % 2 ? 0.5 : 0.25;
    std::vector<std::vector<double>> syn, ant;
    for (const auto& f : c.forwards) {
      syn.push_back(mean_of(f.s1, f.s2));
      if (f.a1) ant.push_back(mean_of(*f.a1, *f.a2));
    }
    const PairGraph g = build_graph(c.batch, c.forwards, c.tau, tw);
    ASSERT_EQ(as_map(g), oracle::brute_force_graph(c.batch, syn, ant, c.tau, tw)) << "trial " << trial;
  }
}

TEST_F(RandomBatches, StructuralInvariants) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Case c = make(rng, true);
    const PairGraph g = build_graph(c.batch, c.forwards, c.tau, 0.5);
    const oracle::EdgeMap m = as_map(g);
    EXPECT_EQ(m.size(), g.edges.size());
    EXPECT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end(),
                               [](const Edge& a, const Edge& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); }));
    for (const Edge& e : g.edges) {
      EXPECT_NE(e.src, e.dst);
      EXPECT_GT(e.weight, 0.0);
      EXPECT_LE(e.weight, 1.0);
      const auto back = m.find({e.dst, e.src});
      ASSERT_NE(back, m.end());
      EXPECT_EQ(back->second.weight, e.weight);
    }
  }
}

TEST_F(RandomBatches, PermutationEquivariant) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Case c = make(rng, true);
    const std::size_t n = c.batch.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span(perm));
    Case p = c;
    for (std::size_t i = 0; i < n; ++i) {
      p.batch[perm[i]] = c.batch[i];
      p.forwards[perm[i]] = c.forwards[i];
    }
    const oracle::EdgeMap a = as_map(build_graph(c.batch, c.forwards, c.tau, 0.5));
    const oracle::EdgeMap b = as_map(build_graph(p.batch, p.forwards, c.tau, 0.5));
    oracle::EdgeMap relabeled;
    for (const auto& [key, edge] : a) relabeled[{perm[key.first], perm[key.second]}] = edge;
    EXPECT_EQ(relabeled, b);
  }
}

TEST(GraphStats, EmptyAndComplete) {
  PairGraph empty;
  empty.node_count = 5;
  const GraphStats s = graph_stats(empty);
  EXPECT_EQ(s.components, 5u);
  EXPECT_EQ(s.edge_count(), 0u);
  EXPECT_EQ(s.degree_histogram, (std::map<std::size_t, std::size_t>{{0, 5}}));

  PairGraph k4;
  k4.node_count = 4;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) k4.edges.push_back({i, j, 1.0, EdgeRule::shared_word});
  const GraphStats t = graph_stats(k4);
  EXPECT_EQ(t.degree_histogram, (std::map<std::size_t, std::size_t>{{3, 4}}));
  EXPECT_EQ(t.components, 1u);
  EXPECT_EQ(t.edges_by_rule[1], 6u);
}

TEST(GraphStats, ComponentsMatchBfs) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    PairGraph g;
    g.node_count = 1 + rng.below(20);
    std::vector<std::pair<std::size_t, std::size_t>> plain;
    const double density = rng.uniform(0.0, 0.3);
    for (std::size_t i = 0; i < g.node_count; ++i)
      for (std::size_t j = i + 1; j < g.node_count; ++j)
        if (rng.bernoulli(density)) {
          g.edges.push_back({i, j, 1.0, EdgeRule::similarity});
          g.edges.push_back({j, i, 1.0, EdgeRule::similarity});
          plain.emplace_back(i, j);
        }
    EXPECT_EQ(graph_stats(g).components, oracle::bfs_components(g.node_count, plain));
  }
}

TEST(DisjointSets, CountsSets) {
  DisjointSets ds(4);
  EXPECT_TRUE(ds.unite(0, 1));
  EXPECT_FALSE(ds.unite(1, 0));
  EXPECT_TRUE(ds.unite(2, 3));
  EXPECT_EQ(ds.find(0), ds.find(1));
  EXPECT_NE(ds.find(0), ds.find(2));
}

TEST(GraphDump, EdgeLinesAndFooter) {
  const auto batch = pairs_of({{"hot", "cold"}, {"cold", "icy"}, {"big", "small"}});
  const std::string dump = format_graph_dump(build_graph(batch, orthogonal_forwards(3), 1.01, 0.5));
  EXPECT_EQ(dump.rfind("0 1 1 1\n1 0 1 1\n", 0), 0u) << dump;
  EXPECT_NE(dump.find("# nodes 3"), std::string::npos) << dump;
  EXPECT_NE(dump.find("# components 2"), std::string::npos) << dump;
}
