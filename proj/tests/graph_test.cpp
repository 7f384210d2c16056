#include <gtest/gtest.h>

#include <numeric>

#include "lbd/error.hpp"
#include "lbd/graph.hpp"
#include "support.hpp"

namespace lbd {
namespace {

TokenSet ts(const std::string& id, std::map<std::string, std::uint32_t> counts) {
  return {id, std::move(counts)};
}

// Term A occurs in s1 and s2, term B in s2 and s3.
std::vector<TokenSet> ab_fixture() {
  return {ts("s:d:1", {{"m:a", 1}, {"l:noun:x", 1}}),
          ts("s:d:2", {{"m:a", 1}, {"m:b", 2}}),
          ts("s:d:3", {{"m:b", 1}, {"l:noun:y", 3}})};
}

TEST(BuildGraph, EmptyInput) {
  const auto g = build_graph({});
  EXPECT_EQ(g.node_count(), 0u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(BuildGraph, SharedTokenDegree) {
  const std::vector<TokenSet> sets = {ts("s:d:0", {{"l:noun:malaria", 1}}),
                                      ts("s:d:1", {{"l:noun:malaria", 2}})};
  const auto g = build_graph(sets);
  EXPECT_EQ(g.degree(g.index_of("l:noun:malaria")), 2u);
}

TEST(BuildGraph, OneSentenceFourTokens) {
  const std::vector<TokenSet> sets = {
      ts("s:d:0", {{"l:noun:a", 1}, {"l:noun:b", 1}, {"m:c1", 1}, {"e:x_y", 1}})};
  const auto g = build_graph(sets);
  EXPECT_EQ(g.node_count(), 5u);
  EXPECT_EQ(g.edge_count(), 4u);
}

TEST(BuildGraph, DuplicateSentenceRejected) {
  const std::vector<TokenSet> sets = {ts("s:d:0", {{"l:noun:a", 1}}),
                                      ts("s:d:0", {{"l:noun:b", 1}})};
  try {
    build_graph(sets);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDuplicateSentence);
  }
}

TEST(BuildGraph, BipartiteSortedSymmetricAndCountPreserving) {
  Rng rng(9);
  const auto sets = testing::random_token_sets(40, 30, 0.15, rng);
  const auto g = build_graph(sets);
  std::uint64_t input_total = 0;
  for (const auto& s : sets) input_total += s.total();
  std::uint64_t edge_total = 0;
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    if (i > 0) EXPECT_LT(g.id(i - 1), g.id(i));
    const auto nbrs = g.neighbors(i);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (k > 0) EXPECT_LT(nbrs[k - 1].node, nbrs[k].node);
      EXPECT_NE(is_sentence_id(g.id(i)), is_sentence_id(g.id(nbrs[k].node)));
      const auto back = g.neighbors(nbrs[k].node);
      const auto it = std::find_if(back.begin(), back.end(),
                                   [&](const auto& n) { return n.node == i; });
      ASSERT_NE(it, back.end());
      EXPECT_EQ(it->count, nbrs[k].count);
      if (is_sentence_id(g.id(i))) edge_total += nbrs[k].count;
    }
  }
  EXPECT_EQ(edge_total, input_total);
}

TEST(BuildGraph, SerializationRoundTripsBitExactly) {
  Rng rng(4);
  const auto g = build_graph(testing::random_token_sets(20, 15, 0.2, rng));
  const std::string text = g.serialize();
  EXPECT_EQ(SemanticGraph::parse(text).serialize(), text);
}

TEST(ShortestPath, IdentityPath) {
  const auto g = build_graph(ab_fixture());
  const auto p = shortest_path(g, "m:a", "m:a");
  EXPECT_EQ(p.nodes, std::vector<std::string>{"m:a"});
  EXPECT_EQ(p.length(), 0u);
}

TEST(ShortestPath, TermsSharingOneSentence) {
  const auto g = build_graph(ab_fixture());
  const auto p = shortest_path(g, "m:a", "m:b");
  EXPECT_EQ(p.nodes, (std::vector<std::string>{"m:a", "s:d:2", "m:b"}));
  EXPECT_EQ(p.length(), 2u);
}

TEST(ShortestPath, TiesExpandInIdOrder) {
  const std::vector<TokenSet> sets = {ts("s:d:b", {{"m:x", 1}, {"m:y", 1}}),
                                      ts("s:d:a", {{"m:x", 1}, {"m:y", 1}})};
  const auto p = shortest_path(build_graph(sets), "m:x", "m:y");
  EXPECT_EQ(p.nodes[1], "s:d:a");
}

TEST(ShortestPath, Errors) {
  auto sets = ab_fixture();
  sets.push_back(ts("s:e:0", {{"m:z", 1}}));
  const auto g = build_graph(sets);
  try {
    shortest_path(g, "m:a", "m:z");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoPath);
  }
  try {
    shortest_path(g, "m:a", "m:nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNodeNotFound);
  }
}

TEST(ShortestPath, TokenToTokenPathsHaveEvenLength) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = build_graph(testing::random_token_sets(12, 10, 0.2, rng));
    std::vector<std::string> tokens;
    for (const auto& id : g.ids()) {
      if (!is_sentence_id(id)) tokens.push_back(id);
    }
    for (const auto& a : tokens) {
      for (const auto& b : tokens) {
        try {
          EXPECT_EQ(shortest_path(g, a, b).length() % 2, 0u);
        } catch (const Error& e) {
          EXPECT_EQ(e.kind(), ErrorKind::kNoPath);
        }
      }
    }
  }
}

TEST(Neighborhood, HandEnumeratedFixture) {
  const auto g = build_graph(ab_fixture());
  const GraphPath path{{"m:a", "s:d:2", "m:b"}};
  EXPECT_EQ(extract_neighborhood(g, path, 2000),
            (std::vector<std::string>{"s:d:1", "s:d:2", "s:d:3"}));
  EXPECT_EQ(extract_neighborhood(g, path, 1), std::vector<std::string>{"s:d:2"});
  EXPECT_EQ(extract_neighborhood(g, path, 2), (std::vector<std::string>{"s:d:1", "s:d:2"}));
}

TEST(Neighborhood, DegeneratePathAtToken) {
  const auto g = build_graph(ab_fixture());
  EXPECT_EQ(extract_neighborhood(g, GraphPath{{"m:b"}}, 10),
            (std::vector<std::string>{"s:d:2", "s:d:3"}));
}

TEST(Neighborhood, Errors) {
  const auto g = build_graph(ab_fixture());
  try {
    extract_neighborhood(g, GraphPath{}, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyPath);
  }
  EXPECT_THROW(extract_neighborhood(g, GraphPath{{"m:a"}}, 0), Error);
}

TEST(FirstOrderTokens, InvertsBuild) {
  const auto sets = ab_fixture();
  const auto g = build_graph(sets);
  for (const auto& s : sets) EXPECT_EQ(first_order_tokens(g, s.sent_id), s);
  const std::vector<TokenSet> lonely = {ts("s:q:0", {})};
  EXPECT_TRUE(first_order_tokens(build_graph(lonely), "s:q:0").counts.empty());
  EXPECT_THROW(first_order_tokens(g, "s:zz:0"), Error);
}

}  // namespace
}  // namespace lbd
