#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>

#include "truetrees/plane_tree.hpp"

using namespace truetrees;
using std::numbers::pi;

namespace {

// Brute-force oracle: all plane trivalent trees with a degree-3 root, by
// recursive enumeration of full binary subtrees.
std::vector<std::string> enumerate_trivalent(int edges) {
  std::function<std::vector<std::string>(int)> binary = [&](int internal) {
    std::vector<std::string> out;
    if (internal == 0) return std::vector<std::string>{"()"};
    for (int a = 0; a < internal; ++a)
      for (const auto& l : binary(a))
        for (const auto& r : binary(internal - 1 - a)) out.push_back("(" + l + r + ")");
    return out;
  };
  const int internal = (edges - 3) / 2;
  std::vector<std::string> out;
  for (int a = 0; a <= internal; ++a)
    for (int b = 0; a + b <= internal; ++b)
      for (const auto& x : binary(a))
        for (const auto& y : binary(b))
          for (const auto& z : binary(internal - a - b)) out.push_back(x + y + z);
  return out;
}

std::string shape(const PlaneTree& t, VertexId v) {
  std::string s;
  for (auto c : t.children(v)) s += "(" + shape(t, c) + ")";
  return s;
}

std::string root_shape(const PlaneTree& t) { return shape(t, PlaneTree::root()); }

}  // namespace

TEST(Generators, TrivalentTruncationCounts) {
  EXPECT_EQ(trivalent_truncation(1).edge_count(), 3);
  const auto t2 = trivalent_truncation(2);
  EXPECT_EQ(t2.edge_count(), 9);
  EXPECT_EQ(t2.vertex_count(), 10);
  for (int n = 1; n <= 8; ++n) {
    const auto t = trivalent_truncation(n);
    EXPECT_EQ(t.edge_count(), 3 * ((1 << n) - 1));
    EXPECT_EQ(t.degree(PlaneTree::root()), 3);
    for (auto v : t.internal_vertices()) EXPECT_EQ(t.degree(v), 3);
    for (auto v : t.leaves()) EXPECT_EQ(t.depth(v), n);
  }
  EXPECT_THROW(trivalent_truncation(0), Error);
}

TEST(Generators, GrowTrivalent) {
  const auto claw = trivalent_truncation(1);
  EXPECT_TRUE(grow_trivalent(claw, 0) == claw);

  PlaneTree edge;
  edge.add_child(PlaneTree::root());
  EXPECT_EQ(grow_trivalent(edge, 2).edge_count(), 13);

  const auto seed = fake_deltoid_seed();
  EXPECT_EQ(seed.edge_count(), 5);
  const auto grown = grow_trivalent(seed, 1);
  EXPECT_TRUE(grown.extends(seed));
  for (auto v : seed.leaves()) EXPECT_EQ(grown.children(v).size(), 2u);
  for (auto v : seed.internal_vertices()) EXPECT_EQ(grown.children(v).size(), seed.children(v).size());

  PlaneTree star;
  for (int i = 0; i < 4; ++i) star.add_child(PlaneTree::root());
  try {
    grow_trivalent(star, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegreeBound);
  }
}

TEST(Generators, CauliflowerCounts) {
  EXPECT_EQ(cauliflower_tree(1).edge_count(), 4);
  EXPECT_EQ(cauliflower_tree(2).edge_count(), 12);
  for (int n = 1; n <= 6; ++n) {
    const auto t = cauliflower_tree(n);
    EXPECT_EQ(t.edge_count(), (1 << (n + 2)) - 4);
    int red = 0, blue = 0;
    for (VertexId e = 1; e < t.vertex_count(); ++e) (t.color(e) == Color::Red ? red : blue)++;
    EXPECT_EQ(red, blue);
    EXPECT_LE(t.max_degree(), 4);
    if (n == 3) EXPECT_EQ(red, 14);
  }
  const auto t1 = cauliflower_tree(1);
  const std::vector<Color> order{Color::Blue, Color::Red, Color::Blue, Color::Red};
  for (int i = 0; i < 4; ++i) EXPECT_EQ(*t1.color(t1.children(0)[i]), order[i]);
}

TEST(Generators, RandomTrivalentDeterministicAndValid) {
  EXPECT_EQ(root_shape(random_trivalent(3, 7)), "()()()");
  EXPECT_TRUE(random_trivalent(31, 99) == random_trivalent(31, 99));
  for (int s = 0; s < 50; ++s) {
    const auto t = random_trivalent(31, s);
    EXPECT_EQ(t.edge_count(), 31);
    EXPECT_EQ(t.degree(PlaneTree::root()), 3);
    for (auto v : t.internal_vertices()) EXPECT_EQ(t.degree(v), 3);
  }
  for (int bad : {1, 2, 4, 10}) {
    try {
      random_trivalent(bad, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidSize);
    }
  }
}

class RandomUniformity : public ::testing::TestWithParam<int> {};

TEST_P(RandomUniformity, MatchesEnumeration) {
  const int edges = GetParam();
  const auto shapes = enumerate_trivalent(edges);
  std::map<std::string, int> counts;
  for (const auto& s : shapes) counts[s] = 0;
  ASSERT_EQ(counts.size(), shapes.size());
  const int samples = 10000;
  for (int s = 0; s < samples; ++s) {
    const auto key = root_shape(random_trivalent(edges, s));
    ASSERT_TRUE(counts.count(key)) << key;
    ++counts[key];
  }
  const double p = 1.0 / shapes.size();
  const double sigma = std::sqrt(samples * p * (1 - p));
  for (const auto& [k, c] : counts) EXPECT_NEAR(c, samples * p, 3 * sigma) << k;
}

INSTANTIATE_TEST_SUITE_P(SmallSizes, RandomUniformity, ::testing::Values(5, 7));

TEST(Enumeration, KnownSizes) {
  EXPECT_EQ(enumerate_trivalent(5).size(), 3u);
  EXPECT_EQ(enumerate_trivalent(7).size(), 9u);
}

TEST(Walk, LengthAndMultiplicity) {
  PlaneTree edge;
  edge.add_child(PlaneTree::root());
  EXPECT_EQ(boundary_walk(edge).size(), 2u);
  for (int n = 1; n <= 4; ++n) {
    const auto t = trivalent_truncation(n);
    const auto walk = boundary_walk(t);
    ASSERT_EQ(static_cast<int>(walk.size()), 2 * t.edge_count());
    std::map<VertexId, int> seen;
    for (const auto& h : walk) ++seen[h.edge];
    for (VertexId e = 1; e < t.vertex_count(); ++e) EXPECT_EQ(seen[e], 2);
    for (std::size_t i = 0; i < walk.size(); ++i) EXPECT_EQ(walk[i].to, walk[(i + 1) % walk.size()].from);
    EXPECT_EQ(walk.front().from, PlaneTree::root());
  }
}

TEST(Walk, DepthTwoContour) {
  // ids: root 0, children 1 2 3, grandchildren 4 5 | 6 7 | 8 9.
  // rotation at v is (parent, c0, c1), traced by hand.
  const auto t = trivalent_truncation(2);
  const auto walk = boundary_walk(t);
  std::vector<VertexId> visits;
  for (const auto& h : walk) visits.push_back(h.from);
  const std::vector<VertexId> expected{0, 1, 4, 1, 5, 1, 0, 2, 6, 2, 7, 2, 0, 3, 8, 3, 9, 3};
  EXPECT_EQ(visits, expected);
}

TEST(Signs, Parity) {
  PlaneTree edge;
  edge.add_child(PlaneTree::root());
  EXPECT_EQ(bipartite_signs(edge), (std::vector<int>{1, -1}));
  EXPECT_EQ(bipartite_signs(trivalent_truncation(1)), (std::vector<int>{1, -1, -1, -1}));
  const auto t = trivalent_truncation(2);
  const auto s = bipartite_signs(t);
  for (VertexId v = 0; v < t.vertex_count(); ++v) EXPECT_EQ(s[v], t.depth(v) % 2 ? -1 : 1);
  const auto neg = bipartite_signs(t, -1);
  for (VertexId v = 0; v < t.vertex_count(); ++v) EXPECT_EQ(neg[v], -s[v]);
}

TEST(Shortcuts, Examples) {
  const auto claw = trivalent_truncation(1);
  for (VertexId e = 1; e <= 3; ++e) EXPECT_NEAR(shortcut_length(claw, e), 2 * pi / 3, 1e-14);
  const auto t2 = trivalent_truncation(2);
  EXPECT_NEAR(shortcut_length(t2, 1), 2 * pi / 3, 1e-14);
  EXPECT_NEAR(shortcut_length(t2, 4), 2 * pi / 9, 1e-14);
  EXPECT_NEAR(inner_shortcut_length(t2, 1), 2 * pi / 3 - 2 * pi / 9, 1e-14);
  EXPECT_NEAR(inner_shortcut_length_one_side(t2, 1), 2 * pi / 3 - pi / 9, 1e-14);
  EXPECT_NEAR(shortcut_square_sum(claw), 4 * pi * pi / 3, 1e-12);
  EXPECT_NEAR(shortcut_square_sum(t2), 44 * pi * pi / 27, 1e-12);
}

TEST(Shortcuts, ClosedFormByDistance) {
  for (int n = 1; n <= 10; ++n) {
    const auto t = trivalent_truncation(n);
    const double big = 3.0 * ((1 << n) - 1);
    std::map<int, int> per_level;
    double exact_sum = 0;
    for (VertexId e = 1; e < t.vertex_count(); ++e) {
      const int m = t.depth(e) - 1;
      ++per_level[m];
      const double expect = 2 * pi * ((1 << (n - m)) - 1) / big;
      EXPECT_NEAR(shortcut_length(t, e), expect, 1e-12);
      if (auto p = t.parent(e); p && *p != PlaneTree::root()) EXPECT_LE(shortcut_length(t, e), shortcut_length(t, *p));
    }
    for (int m = 0; m < n; ++m) {
      EXPECT_EQ(per_level[m], 3 << m);
      const double s = 2 * pi * ((1 << (n - m)) - 1) / big;
      exact_sum += (3 << m) * s * s;
    }
    EXPECT_NEAR(shortcut_square_sum(t), exact_sum, 1e-10);
    double root_sum = 0;
    for (auto c : t.children(PlaneTree::root())) root_sum += shortcut_length(t, c);
    EXPECT_NEAR(root_sum, 2 * pi, 1e-12);
  }
}

TEST(Shortcuts, SquareSumBelowBound) {
  for (int n = 1; n <= 12; ++n) EXPECT_LT(shortcut_square_sum(trivalent_truncation(n)), 8 * pi * pi / 3);
}

TEST(Obstacles, AreaBound) {
  const auto claw = trivalent_truncation(1);
  EXPECT_NEAR(obstacle_area_bound(claw, {}, 1.0, 3 * pi), 16 * 3 * pi, 1e-12);
  EXPECT_NEAR(obstacle_area_bound(claw, {{1, 1.0}}, 1.0, 0.0), 16 * (6 + pi), 1e-12);
  EXPECT_EQ(obstacle_area_bound(claw, {{1, 0.0}, {2, 0.0}}, 0.0, 0.0), 0.0);
  EXPECT_NEAR(kObstacleArea, 9 * (2.0 / 3 + pi / 9), 1e-14);
}

TEST(Words, Addressing) {
  const auto t = trivalent_truncation(2);
  const auto first = t.children(PlaneTree::root())[0];
  const auto grandchild = t.children(first)[1];
  EXPECT_EQ(lr_word(t, grandchild).to_string(), "1L");
  EXPECT_EQ(lr_word(t, t.children(first)[0]).to_string(), "1R");
  const auto t5 = trivalent_truncation(5);
  for (VertexId v = 1; v < t5.vertex_count(); ++v) EXPECT_EQ(vertex_of(t5, lr_word(t5, v)), v);
  EXPECT_THROW(vertex_of(t, LRWord::parse("1LLL")), Error);
  EXPECT_THROW(lr_word(t, PlaneTree::root()), Error);
}

TEST(Words, Runs) {
  const auto w = LRWord::parse("2LRLLL");
  EXPECT_EQ(w.digit, 2);
  EXPECT_EQ(w.turns, "LRLLL");
  EXPECT_EQ(w.runs(), (std::vector<int>{1, 1, 3}));
  EXPECT_EQ(w.to_string(), "2LRLLL");
}

TEST(Subtree, RootEdge) {
  const auto t = trivalent_truncation(2);
  std::vector<VertexId> ids;
  const auto s = subtree(t, 1, &ids);
  EXPECT_EQ(s.edge_count(), 3);
  EXPECT_EQ(edge_subtree_size(t, 1), 3);
  EXPECT_EQ(subtree(trivalent_truncation(4), 2).edge_count(), 15);
}

TEST(Json, RoundTrip) {
  for (const auto& t : {trivalent_truncation(3), cauliflower_tree(3), random_trivalent(41, 5)}) {
    const auto j = to_json(t);
    const auto back = tree_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back), j);
    EXPECT_EQ(back.edge_count(), t.edge_count());
  }
  EXPECT_TRUE(tree_from_json(to_json(cauliflower_tree(3))) == cauliflower_tree(3));
  const auto j = to_json(cauliflower_tree(1));
  EXPECT_EQ(j["children"].size(), 4u);
  EXPECT_EQ(j["children"][0]["color"], "blue");
  EXPECT_TRUE(j["color"].is_null());
}
