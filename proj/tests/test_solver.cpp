#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "truetrees/solver.hpp"

using namespace truetrees;
using std::numbers::pi;

namespace {

PlaneTree path2() {
  PlaneTree t;
  const auto mid = t.add_child(PlaneTree::root());
  t.add_child(mid);
  return t;
}

PlaneTree single_edge() {
  PlaneTree t;
  t.add_child(PlaneTree::root());
  return t;
}

// every point of a has a partner in b
bool set_contains(const std::vector<Complex>& a, const std::vector<Complex>& b, double tol) {
  for (auto z : a) {
    double best = HUGE_VAL;
    for (auto w : b) best = std::min(best, std::abs(z - w));
    if (best > tol) return false;
  }
  return true;
}

}  // namespace

TEST(Anchors, SingleEdge) {
  const auto m = solve(single_edge());
  EXPECT_EQ(m.degree(), 1);
  EXPECT_NEAR(std::abs(m.evaluate(Complex(3, 1)) - Complex(1.5, 0.5)), 0, 1e-14);
  const auto& pos = m.vertex_positions();
  EXPECT_NEAR(std::abs(pos[0] - 2.0), 0, 1e-10);
  EXPECT_NEAR(std::abs(pos[1] + 2.0), 0, 1e-10);
  const auto c = m.coefficients();
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0], Complex(0.5));
  EXPECT_NEAR(std::abs(c[1]), 0, 1e-14);
}

TEST(Anchors, Path) {
  const auto m = solve(path2());
  const auto& pos = m.vertex_positions();
  EXPECT_NEAR(std::abs(pos[1]), 0, 1e-10);
  EXPECT_NEAR(std::abs(pos[0] - pos[2]), 4, 1e-10);
  EXPECT_NEAR(std::abs(pos[0]), 2, 1e-10);
  EXPECT_NEAR(std::abs(pos[0] + pos[2]), 0, 1e-10);
  for (Complex w : {Complex(0.3, -0.2), Complex(1.5, 0.7)})
    EXPECT_NEAR(std::abs(m.evaluate(w) - (0.5 * w * w - 1.0)), 0, 1e-10);
  const auto c = m.coefficients();
  ASSERT_EQ(c.size(), 3u);
  EXPECT_NEAR(std::abs(c[0] - 0.5), 0, 1e-15);
  EXPECT_EQ(c[1], Complex(0));
  EXPECT_NEAR(std::abs(c[2] + 1.0), 0, 1e-10);
  EXPECT_NEAR(std::abs(residual(m, m.tree())(0)), 0, 1e-12);
}

TEST(Anchors, Claw) {
  const auto m = solve(trivalent_truncation(1));
  const auto& pos = m.vertex_positions();
  const double r = std::cbrt(4.0);
  EXPECT_NEAR(std::abs(pos[0]), 0, 1e-10);
  std::vector<Complex> expect{r * std::polar(1.0, pi / 3), Complex(-r, 0), r * std::polar(1.0, -pi / 3)};
  std::vector<Complex> leaves{pos[1], pos[2], pos[3]};
  for (auto z : leaves) EXPECT_NEAR(std::abs(z), r, 1e-10);
  EXPECT_TRUE(set_contains(leaves, expect, 1e-10));
  EXPECT_TRUE(set_contains(expect, leaves, 1e-10));
  // canonical frame: second root child on the negative axis
  EXPECT_NEAR(std::abs(pos[2] + r), 0, 1e-10);
  EXPECT_NEAR(std::abs(m.evaluate(0.0) - 1.0), 0, 1e-10);
  const auto c = m.coefficients();
  ASSERT_EQ(c.size(), 4u);
  const std::vector<Complex> exact{0.5, 0, 0, 1};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(c[k] - exact[k]), 0, 1e-10);
}

TEST(Anchors, ClawRotationInvariant) {
  const auto m = solve(trivalent_truncation(1));
  std::vector<Complex> leaves{m.vertex_positions()[1], m.vertex_positions()[2], m.vertex_positions()[3]};
  std::vector<Complex> turned;
  for (auto z : leaves) turned.push_back(z * std::polar(1.0, 2 * pi / 3));
  EXPECT_TRUE(set_contains(turned, leaves, 1e-10));
}

TEST(Residual, ClosedFormModelsAreExact) {
  const auto claw = trivalent_truncation(1);
  ShabatModel exact(claw, std::vector<Complex>(4, 0.0), 1.0, bipartite_signs(claw));
  EXPECT_NEAR(exact.residual().norm(), 0, 1e-15);
  EXPECT_NEAR(std::abs(exact.evaluate(0.0) - 1.0), 0, 1e-15);
  ShabatModel path(path2(), std::vector<Complex>(3, 0.0), -1.0, bipartite_signs(path2()));
  EXPECT_NEAR(path.residual().norm(), 0, 1e-15);
  const auto other = trivalent_truncation(2);
  EXPECT_THROW(residual(exact, other), Error);
}

TEST(Normalization, LeadingCoefficients) {
  for (int n = 1; n <= 3; ++n) {
    const auto m = solve(trivalent_truncation(n));
    const auto c = m.coefficients();
    ASSERT_EQ(static_cast<int>(c.size()), m.degree() + 1);
    EXPECT_EQ(c[0], Complex(0.5));
    EXPECT_EQ(c[1], Complex(0.0));
    Complex weighted = 0;
    for (std::size_t i = 0; i < m.crit_points().size(); ++i) weighted += double(m.multiplicities()[i]) * m.crit_points()[i];
    EXPECT_NEAR(std::abs(weighted), 0, 1e-12);
    int total = 0;
    for (int k : m.multiplicities()) total += k;
    EXPECT_EQ(total, m.degree() - 1);
  }
}

TEST(Solve, ResidualAndCriticalPoints) {
  const auto m = solve(cauliflower_tree(2));
  EXPECT_LE(m.residual().cwiseAbs().maxCoeff(), 1e-12);
  for (auto v : m.crit_points()) EXPECT_NEAR(std::abs(m.evaluate_derivative(v)), 0, 1e-12);
  for (std::size_t i = 0; i < m.crit_ids().size(); ++i)
    EXPECT_NEAR(std::abs(m.crit_values()[i] - double(m.signs()[m.crit_ids()[i]])), 0, 1e-12);
  EXPECT_NEAR(std::abs(m.evaluate(0.0) - 1.0), 0, 1e-10);
  EXPECT_TRUE(m.leaves_known());
}

TEST(Solve, LeafValuesAreSigns) {
  const auto m = solve(trivalent_truncation(3));
  for (auto v : m.tree().leaves())
    EXPECT_NEAR(std::abs(m.evaluate(m.vertex_positions()[v]) - double(m.signs()[v])), 0, 1e-9);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const auto base = solve(trivalent_truncation(2));
  ShabatModel m = base;
  auto x = m.parameters();
  for (int i = 0; i < x.size(); ++i) x(i) += Complex(0.01 * std::sin(1.0 + i), 0.01 * std::cos(2.0 * i));
  m.set_parameters(x);
  const auto jac = m.jacobian();
  const double h = 1e-6;
  for (int k = 0; k < x.size(); ++k) {
    ShabatModel a = m, b = m;
    auto xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    a.set_parameters(xp);
    b.set_parameters(xm);
    const Eigen::VectorXcd fd = (a.residual() - b.residual()) / (2 * h);
    EXPECT_LE((fd - jac.col(k)).norm(), 1e-5 * std::max(1.0, jac.col(k).norm())) << "column " << k;
  }
}

TEST(Continuation, TrivalentFamily) {
  std::vector<PlaneTree> fam;
  for (int n = 1; n <= 3; ++n) fam.push_back(trivalent_truncation(n));
  const auto ms = continue_solve(fam);
  ASSERT_EQ(ms.size(), 3u);
  for (const auto& m : ms) EXPECT_LE(m.residual().cwiseAbs().maxCoeff(), 1e-12);
  // the normalized representative is unique
  const auto cold = solve(fam[2]);
  for (VertexId v = 0; v < fam[2].vertex_count(); ++v)
    EXPECT_NEAR(std::abs(cold.vertex_positions()[v] - ms[2].vertex_positions()[v]), 0, 1e-8);
}

TEST(Continuation, SingleMember) {
  const auto fam = continue_solve({trivalent_truncation(2)});
  const auto direct = solve(trivalent_truncation(2));
  for (VertexId v = 0; v < direct.tree().vertex_count(); ++v)
    EXPECT_NEAR(std::abs(fam[0].vertex_positions()[v] - direct.vertex_positions()[v]), 0, 1e-10);
}

TEST(Continuation, CauliflowerConjugationSymmetric) {
  std::vector<PlaneTree> fam;
  for (int n = 1; n <= 3; ++n) fam.push_back(cauliflower_tree(n));
  for (const auto& m : continue_solve(fam)) {
    // canonical frame is reached up to a rotation of at most pi/N
    const auto& raw = m.vertex_positions();
    const auto& top = m.tree().children(PlaneTree::root());
    const double a = std::remainder(pi - std::arg(raw[top[1]]), 2 * pi);
    EXPECT_LE(std::abs(a), pi / m.degree() + 1e-9);
    std::vector<Complex> pos, conj;
    for (auto z : raw) pos.push_back(std::polar(1.0, a) * z);
    for (auto z : pos) conj.push_back(std::conj(z));
    EXPECT_TRUE(set_contains(conj, pos, 1e-8));
    EXPECT_NEAR(std::abs(m.evaluate(0.0) - 1.0), 0, 1e-9);
  }
}

TEST(Continuation, ErrorsCarryFamilyIndex) {
  PlaneTree unrelated;
  for (int i = 0; i < 2; ++i) unrelated.add_child(PlaneTree::root());
  try {
    continue_solve({trivalent_truncation(2), unrelated});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IndexMismatch);
    EXPECT_NE(std::string(e.what()).find("family index 1"), std::string::npos);
  }
}

TEST(Options, Validation) {
  SolveOptions bad;
  bad.tol = 0;
  EXPECT_THROW(solve(trivalent_truncation(1), bad), Error);
  bad = {};
  bad.max_iter = 0;
  EXPECT_THROW(solve(trivalent_truncation(1), bad), Error);
}

TEST(Solve, Deterministic) {
  const auto a = solve(random_trivalent(15, 3));
  const auto b = solve(random_trivalent(15, 3));
  EXPECT_EQ(a.vertex_positions(), b.vertex_positions());
}
