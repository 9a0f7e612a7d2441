#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "truetrees/analysis.hpp"
#include "truetrees/limit_sets.hpp"

using namespace truetrees;
using std::numbers::pi;

namespace {

const PointCloud& omega256() {
  static const PointCloud c = developed_deltoid_boundary(256);
  return c;
}

PointCloud map_cloud(const PointCloud& pts, Complex (*f)(Complex)) {
  PointCloud out;
  for (auto z : pts) out.push_back(f(z));
  return out;
}

}  // namespace

TEST(Deltoid, ExteriorMapExamples) {
  EXPECT_NEAR(std::abs(deltoid_psi(1.0) - 1.5), 0, 1e-15);
  const Complex w = deltoid_psi_inverse(10.0);
  EXPECT_NEAR(std::abs(deltoid_psi(w) - 10.0), 0, 1e-12);
  EXPECT_NEAR(w.real(), 9.995, 1e-4);
  EXPECT_NEAR(std::abs(deltoid_psi_inverse(deltoid_psi(1.2)) - 1.2), 0, 1e-12);
  EXPECT_NEAR(std::abs(deltoid_psi_inverse(1.5) - 1.0), 0, 1e-6);
  try {
    deltoid_psi_inverse(0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoExteriorRoot);
  }
}

TEST(Deltoid, CubicRoots) {
  // (w - 1)(w - 2i)(w + 3)
  const auto r = cubic_roots(1.0, Complex(2, -2), Complex(-3, -4), Complex(0, 6));
  for (Complex expect : {Complex(1, 0), Complex(0, 2), Complex(-3, 0)}) {
    double best = HUGE_VAL;
    for (auto z : r) best = std::min(best, std::abs(z - expect));
    EXPECT_LT(best, 1e-12);
  }
}

TEST(Deltoid, ImplicitMatchesParametrization) {
  for (int k = 0; k < 200; ++k) {
    const Complex z = deltoid_psi(std::polar(1.0, 2 * pi * k / 200));
    EXPECT_NEAR(deltoid_implicit(z), 0, 1e-10);
  }
  EXPECT_TRUE(in_deltoid(0.0));
  EXPECT_FALSE(in_deltoid(2.0));
  EXPECT_FALSE(in_deltoid(std::polar(1.0, pi)));
}

TEST(Deltoid, SchwarzFixesBoundary) {
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Complex z = deltoid_psi(std::polar(1.0, 2 * pi * (k + 0.5) / 1000));
    worst = std::max(worst, std::abs(schwarz_reflect(z) - z));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Deltoid, SchwarzPreimagesReflectBack) {
  for (Complex y : {Complex(3, 1), Complex(-2, 0.5), Complex(0.2, -4)})
    for (auto z : schwarz_preimages(y)) EXPECT_NEAR(std::abs(schwarz_reflect(z) - y), 0, 1e-9);
}

TEST(Developed, MembershipExamples) {
  EXPECT_EQ(developed_deltoid_membership(0.0), Membership::Interior);
  EXPECT_EQ(developed_deltoid_membership(10.0), Membership::Exterior);
  EXPECT_EQ(developed_deltoid_membership(1.5), Membership::Undetermined);
  LimitSetOracle o;
  EXPECT_EQ(o.membership(0.0), Membership::Interior);
  o.kind = LimitSetKind::Deltoid;
  EXPECT_EQ(o.membership(2.0), Membership::Exterior);
}

TEST(Developed, CuspOrbit) {
  const auto c = cusp_preimages(10);
  EXPECT_EQ(c.size(), 3u * (1u << 10));
  for (std::size_t i = 0; i < c.size(); i += 97) EXPECT_NE(developed_deltoid_membership(c[i]), Membership::Exterior);
}

TEST(Developed, CloudRotationInvariant) {
  const auto& cloud = omega256();
  const double cell = developed_deltoid_grid(256).cell();
  const auto turned = rotate(cloud, 2 * pi / 3);
  EXPECT_LE(hausdorff(cloud, turned), 2 * cell);
  EXPECT_LE(hausdorff(cloud, map_cloud(cloud, [](Complex z) { return std::conj(z); })), 2 * cell);
}

TEST(Developed, GridGuard) { EXPECT_THROW(developed_deltoid_boundary(64), Error); }

TEST(Cauliflower, Membership) {
  EXPECT_EQ(cauliflower_membership(0.0), Orbit::Bounded);
  EXPECT_EQ(cauliflower_membership(1.0), Orbit::Escaped);
  EXPECT_EQ(cauliflower_membership(Complex(0, 1.2)), Orbit::Escaped);
  EXPECT_THROW(cauliflower_membership(0.0, 100, 1.0), Error);
}

TEST(Cauliflower, CloudSymmetry) {
  const auto march = cauliflower_boundary(CloudMethod::Marching, 256);
  const double cell = cauliflower_grid(256).cell();
  EXPECT_LE(hausdorff(march, map_cloud(march, [](Complex z) { return -z; })), cell);
  EXPECT_LE(hausdorff(march, map_cloud(march, [](Complex z) { return std::conj(z); })), cell);
  const auto inv = cauliflower_boundary(CloudMethod::InverseIteration, 20000);
  EXPECT_EQ(inv.size(), 20000u);
  EXPECT_LE(hausdorff(inv, map_cloud(inv, [](Complex z) { return -z; })), 0.05);
  EXPECT_LE(hausdorff(inv, map_cloud(inv, [](Complex z) { return std::conj(z); })), 0.05);
  // inverse iteration lands on the Julia set: near the marching contour
  EXPECT_LE(directed_hausdorff(inv, march), 2 * cell);
}

TEST(Fatou, NormalizationAndOrbit) {
  EXPECT_NEAR(std::abs(fatou_coordinate(0.0)), 0, 1e-12);
  EXPECT_NEAR(std::abs(fatou_coordinate(0.25) - 1.0), 0, 1e-8);
  EXPECT_NEAR(std::abs(fatou_coordinate(0.3125) - 2.0), 0, 1e-8);
  EXPECT_NEAR(std::abs(fatou_coordinate(-0.25) - 1.0), 0, 1e-8);
  // f(i/2) = 0
  EXPECT_NEAR(std::abs(fatou_coordinate(Complex(0, 0.5)) + 1.0), 0, 1e-8);
  EXPECT_THROW(fatou_coordinate(1.0), Error);
}

TEST(Fatou, FunctionalEquationOnSamples) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  int used = 0;
  while (used < 100) {
    const Complex z(u(rng), u(rng));
    if (!cauliflower_interior(z)) continue;
    ++used;
    EXPECT_LE(std::abs(fatou_coordinate(cauliflower_map(z)) - fatou_coordinate(z) - 1.0), 1e-8);
    EXPECT_LE(std::abs(fatou_coordinate(std::conj(z)) - std::conj(fatou_coordinate(z))), 1e-8);
  }
}

TEST(Fatou, SeriesTruncationIndependent) {
  FatouOptions far;
  far.min_u = 2000;
  for (Complex z : {Complex(0.1, 0.2), Complex(-0.3, -0.1), Complex(0.45, 0.01)})
    EXPECT_NEAR(std::abs(fatou_coordinate(z) - fatou_coordinate(z, far)), 0, 1e-8);
}

TEST(Fatou, LimitFunctionAtKnownPoints) {
  EXPECT_NEAR(std::abs(cauliflower_limit_function(0.0) - 1.0), 0, 1e-12);
  EXPECT_NEAR(std::abs(cauliflower_limit_function(0.25) + 1.0), 0, 1e-8);
  EXPECT_NEAR(std::abs(cauliflower_limit_function(Complex(0, 0.5)) + 1.0), 0, 1e-8);
}

TEST(Io, CloudCsvRoundTrip) {
  const PointCloud pts{{0.1, -2.5}, {1.0 / 3, 7e-12}};
  const std::string path = ::testing::TempDir() + "cloud_roundtrip.csv";
  write_cloud_csv(path, pts, {{"kind", "test"}});
  const auto back = read_cloud_csv(path);
  ASSERT_EQ(back.size(), 2u);
  for (int i = 0; i < 2; ++i) EXPECT_EQ(back[i], pts[i]);
  std::remove(path.c_str());
  std::remove((path + ".json").c_str());
}
