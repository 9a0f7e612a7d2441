#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "truetrees/regions.hpp"
#include "truetrees/solver.hpp"

using namespace truetrees;
using std::numbers::pi;

namespace {

PlaneTree single_edge() {
  PlaneTree t;
  t.add_child(PlaneTree::root());
  return t;
}

double max_imag(const std::vector<Complex>& pts) {
  double m = 0;
  for (auto z : pts) m = std::max(m, std::abs(z.imag()));
  return m;
}

struct Solved {
  ShabatModel model;
  TracedTree traced;
  explicit Solved(const PlaneTree& t) : model(solve(t)), traced(trace_tree(model, t)) {}
};

const Solved& depth4() {
  static const Solved s(trivalent_truncation(4));
  return s;
}

}  // namespace

TEST(Trace, SingleEdgeSegment) {
  Solved s(single_edge());
  const auto& poly = s.traced.edge_polylines[1];
  ASSERT_GE(poly.size(), 2u);
  EXPECT_NEAR(std::abs(poly.front() - 2.0), 0, 1e-9);
  EXPECT_NEAR(std::abs(poly.back() + 2.0), 0, 1e-9);
  EXPECT_LT(max_imag(poly), 1e-9);
  EXPECT_NEAR(diameter(poly), 4, 1e-9);
  EXPECT_NEAR(tree_diameter(s.traced), 4, 1e-9);
}

TEST(Trace, PathSegments) {
  PlaneTree t;
  const auto mid = t.add_child(PlaneTree::root());
  t.add_child(mid);
  Solved s(t);
  for (VertexId e : {1, 2}) {
    const auto& poly = s.traced.edge_polylines[e];
    EXPECT_LT(max_imag(poly), 1e-9);
    EXPECT_NEAR(diameter(poly), 2, 1e-9);
  }
  EXPECT_NEAR(std::abs(s.traced.vertex_positions[1]), 0, 1e-10);
}

TEST(Trace, ClawSegments) {
  Solved s(trivalent_truncation(1));
  const double r = std::cbrt(4.0);
  for (VertexId e = 1; e <= 3; ++e) {
    const auto& poly = s.traced.edge_polylines[e];
    const double ang = std::arg(poly.back());
    for (auto z : poly)
      if (std::abs(z) > 1e-6) EXPECT_NEAR(std::remainder(std::arg(z) - ang, 2 * pi), 0, 1e-8);
    EXPECT_NEAR(edge_diameter(s.traced, e), r, 1e-9);
  }
  EXPECT_NEAR(std::arg(s.traced.vertex_positions[2]), pi, 1e-9);
}

TEST(Arcs, ClosedFormCases) {
  Solved edge(single_edge());
  ASSERT_EQ(edge.traced.side_arcs.size(), 2u);
  for (double a : edge.traced.side_arcs) EXPECT_NEAR(a, pi, 1e-9);
  Solved claw(trivalent_truncation(1));
  ASSERT_EQ(claw.traced.side_arcs.size(), 6u);
  for (double a : claw.traced.side_arcs) EXPECT_NEAR(a, pi / 3, 1e-9);
}

TEST(Arcs, DepthTwoBalanced) {
  Solved s(trivalent_truncation(2));
  ASSERT_EQ(s.traced.side_arcs.size(), 18u);
  EXPECT_LE(s.traced.balance_error(), 1e-6);
  double total = 0;
  for (double a : s.traced.side_arcs) total += a;
  EXPECT_NEAR(total, 2 * pi, 1e-6);
}

TEST(Arcs, PrimeEndsMatchExteriorMap) {
  const auto& s = depth4();
  const ExteriorMap map(s.model);
  // a leaf tip is the phi-image of its prime end
  for (auto leaf : s.model.tree().leaves()) {
    const double th = tip_prime_end(s.model.tree(), s.traced, leaf);
    const Complex w = map(std::polar(1.0 + 1e-5, th));
    EXPECT_LT(std::abs(w - s.traced.vertex_positions[leaf]), 1e-2) << leaf;
  }
}

TEST(Phi, SingleEdgeJoukowski) {
  Solved s(single_edge());
  for (Complex z : {Complex(1.5, 0.2), Complex(-0.3, 2.0), Complex(0.1, -1.05), Complex(40, 7)})
    EXPECT_NEAR(std::abs(phi(s.model, z) - (z + 1.0 / z)), 0, 1e-10);
}

TEST(Phi, ClawFarFieldAndSymmetry) {
  Solved s(trivalent_truncation(1));
  const Complex big(1e6, 0);
  EXPECT_LE(std::abs(phi(s.model, big) - big), 1e-5);
  const Complex w = phi(s.model, -2.0);
  EXPECT_NEAR(w.imag(), 0, 1e-9);
  EXPECT_LT(w.real(), -std::cbrt(4.0));
  EXPECT_THROW(phi(s.model, 0.5), Error);
}

TEST(Geodesic, AntipodalIsDegenerate) {
  Solved s(single_edge());
  const auto g = circle_geodesic(0.3, 0.3 + pi);
  EXPECT_TRUE(g.degenerate);
  const auto path = geodesic(s.model, 0.3, 0.3 + pi);
  ASSERT_FALSE(path.empty());
  EXPECT_GT(std::abs(path[path.size() / 2]), 100);
}

TEST(Geodesic, CircleArcIsOrthogonal) {
  const auto g = circle_geodesic(0.2, 1.4);
  EXPECT_FALSE(g.degenerate);
  for (auto z : g.points) EXPECT_GT(std::abs(z), 1.0);
  // the circle through e^{i t1}, e^{i t2} orthogonal to |z|=1 has center sec(d/2) e^{i mu}
  const Complex c = std::polar(1.0 / std::cos(0.6), 0.8);
  for (auto z : g.points) EXPECT_NEAR(std::abs(z - c), std::tan(0.6), 1e-12);
}

TEST(Geodesic, ClawLeafSeparation) {
  Solved s(trivalent_truncation(1));
  const auto& t = s.model.tree();
  RegionBuilder rb(s.model, s.traced);
  const double a = s.traced.prime_ends[side_index(s.traced, 0, 2)];
  const double b = s.traced.prime_ends[side_index(s.traced, 0, 3)];
  const auto loop = rb.arc(0, a, 0, b);
  const auto& pos = s.traced.vertex_positions;
  EXPECT_TRUE(point_in_polygon(0.7 * pos[2], loop));
  EXPECT_FALSE(point_in_polygon(0.7 * pos[1], loop));
  EXPECT_FALSE(point_in_polygon(0.7 * pos[3], loop));
  (void)t;
}

TEST(Regions, VNesting) {
  const auto& s = depth4();
  const auto& t = s.model.tree();
  RegionBuilder rb(s.model, s.traced);
  for (const char* pair : {"1", "2R", "3LR"}) {
    const auto outer_word = LRWord::parse(pair);
    auto inner_word = outer_word;
    inner_word.turns.push_back('L');
    const auto outer = rb.v_region(vertex_of(t, outer_word));
    const auto inner = rb.v_region(vertex_of(t, inner_word));
    int outside = 0;
    for (std::size_t i = 0; i + 1 < inner.boundary.size(); ++i) {
      const Complex mid = 0.5 * (inner.boundary[i] + inner.boundary[i + 1]);
      if (!point_in_polygon(mid, outer.boundary) && std::abs(mid - s.traced.vertex_positions[outer.vertex]) > 1e-3)
        ++outside;
    }
    EXPECT_LE(outside, 1) << pair;
    EXPECT_LT(inner.diameter(), outer.diameter());
  }
}

TEST(Regions, WAndHoroball) {
  const auto& s = depth4();
  const auto& t = s.model.tree();
  RegionBuilder rb(s.model, s.traced);
  const auto v = vertex_of(t, LRWord::parse("1"));
  const auto w0 = rb.w_region(v, 0);
  const auto w1 = rb.w_region(v, 1);
  EXPECT_LT(w1.diameter(), w0.diameter());
  EXPECT_THROW(rb.w_region(v, 5), Error);
  const auto h = rb.horoball(0, t.children(0)[0]);
  EXPECT_GT(h.diameter(), 0);
  const auto lam = rb.lambda_curve();
  EXPECT_GT(lam.boundary.size(), 100u);
  for (auto leaf : t.leaves()) {
    double best = HUGE_VAL;
    for (auto z : lam.boundary) best = std::min(best, std::abs(z - s.traced.vertex_positions[leaf]));
    EXPECT_LT(best, 1e-9);
  }
}

TEST(Diameters, WholeTreeAtLeastTwo) {
  for (int n = 1; n <= 4; ++n) {
    Solved s(trivalent_truncation(n));
    EXPECT_GE(tree_diameter(s.traced), 2.0);
  }
  Solved c(cauliflower_tree(3));
  EXPECT_GE(tree_diameter(c.traced), 2.0);
}

TEST(Output, JsonAndSvg) {
  Solved s(trivalent_truncation(2));
  const auto j = traced_to_json(s.model.tree(), s.traced);
  EXPECT_FALSE(j.empty());
  const auto svg = traced_to_svg(s.model.tree(), s.traced);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
}

TEST(Trace, ModelTreeMismatch) {
  const auto m = solve(trivalent_truncation(1));
  EXPECT_THROW(trace_tree(m, trivalent_truncation(2)), Error);
}
