#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hardylab/exact_example.hpp"

using namespace hardylab;
using namespace hardylab::example;

namespace {

std::vector<Point3> off_axis_points(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  std::vector<Point3> out;
  while (out.size() < count) {
    Point3 p(c(rng), c(rng), c(rng));
    if (p.norm() <= 3.0 && std::sqrt(cylinder_radius_sq(p)) > 0.05) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(ExampleSolution, OriginAndSpotValue) {
  for (double t : {-1.0, 0.0, 0.4}) {
    const Complex expected = std::pow(Complex(1.0, t), 2 * 2.0 - 1.5);
    EXPECT_NEAR(std::abs(eval_solution_u(0.0, t, 2.0) - expected), 0.0, 1e-14);
  }
  EXPECT_NEAR(std::abs(eval_solution_u(1.0, 0.0, 2.0)), 0.25 * std::exp(-0.25), 1e-12);
  EXPECT_NEAR(std::abs(eval_solution_u(1.0, 0.0, 2.0)), 0.194700, 1e-6);
}

TEST(ExampleSolution, ModulusAtCriticalTimes) {
  const double k = 2.3;
  for (double t : {-1.0, 1.0}) {
    for (double r : {0.0, 0.5, 2.0, 5.0}) {
      const double expected = std::pow(2.0, 2 * k - 1.5) * std::pow(1 + r * r, -2 * k) * std::exp(-r * r / 4);
      EXPECT_NEAR(std::norm(eval_solution_u(r, t, k)) / expected, 1.0, 1e-12);
    }
  }
}

TEST(ExamplePotential, RadialGaugeHolds) {
  for (const auto& p : off_axis_points(200, 1)) {
    for (auto v : {Variant::Published, Variant::SignConsistent}) {
      const Vec3 a = eval_potential_A(p, 0.7, 2.0, v);
      EXPECT_LE(std::abs(p.dot(a)), 1e-14 * (1 + a.norm() * p.norm()));
    }
  }
}

TEST(ExamplePotential, AxisIsRejected) {
  EXPECT_THROW(eval_potential_A(Point3(0, 0, 1), 0.1, 2.0), Error);
  try {
    eval_potential_A(Point3(1e-7, 0, 1), 0.1, 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OnAxis);
  }
  try {
    pde_residual(Point3(1.5e-3, 0, 1), 0.1, 2.0, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::StencilCrossesAxis);
  }
}

TEST(ExamplePotential, ParameterCheck) {
  EXPECT_THROW(ExampleParams::checked(1.0), Error);
  EXPECT_THROW(ExampleParams::checked(1.5), Error);
  EXPECT_NO_THROW(ExampleParams::checked(1.6));
}

TEST(ExampleCurl, VerticalComponentVanishes) {
  for (const auto& p : off_axis_points(50, 2)) {
    EXPECT_EQ(eval_curl_A(p, 0.3, 2.0)[2], 0.0);
  }
  EXPECT_EQ(eval_curl_A(Point3(1, 2, 0), 0.3, 2.0).norm(), 0.0);
}

TEST(ExampleCurl, FiniteDifferenceCurlConvergesAtOrderTwo) {
  const Point3 p(0.8, -0.6, 1.1);
  const Vec3 exact = eval_curl_A(p, 0.45, 2.0);
  const double e1 = (fd_curl_A(p, 0.45, 2.0, 1e-2) - exact).norm();
  const double e2 = (fd_curl_A(p, 0.45, 2.0, 5e-3) - exact).norm();
  EXPECT_NEAR(e1 / e2, 4.0, 0.2);
}

TEST(ExampleDivergence, ClosedFormMatchesDifferences) {
  for (const auto& p : off_axis_points(30, 3)) {
    if (cylinder_radius_sq(p) < 0.25) continue;
    const double h = 1e-5;
    double fd_div = 0;
    for (int j = 0; j < 3; ++j) {
      Point3 e = Point3::Zero();
      e[j] = h;
      fd_div += (eval_potential_A(p + e, 0.6, 2.0)[j] - eval_potential_A(p - e, 0.6, 2.0)[j]) / (2 * h);
    }
    EXPECT_NEAR(eval_div_A(p, 0.6, 2.0), fd_div, 1e-6);
  }
}

TEST(ExampleResidual, SignConsistentTripleConvergesAtOrderTwo) {
  const Point3 p(1, 1, 1);
  const double r1 = std::abs(pde_residual(p, 0.3, 2.0, 1e-2, Variant::SignConsistent).value);
  const double r2 = std::abs(pde_residual(p, 0.3, 2.0, 5e-3, Variant::SignConsistent).value);
  EXPECT_NEAR(r1 / r2, 4.0, 0.1);
  const auto pts = off_axis_points(100, 4);
  std::vector<double> times(pts.size(), 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ts(-1.0, 1.0);
  for (auto& t : times) t = ts(rng);
  EXPECT_NEAR(residual_order(pts, times, 2.0, 1e-3, Variant::SignConsistent), 2.0, 0.2);
  double worst = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    worst = std::max(worst, pde_residual(pts[i], times[i], 2.0, 1e-3, Variant::SignConsistent).relative());
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(ExampleResidual, PublishedTripleLeavesOrderOneResidual) {
  // The residual does not shrink with h: the printed triple is not a solution.
  const Point3 p(1, 1, 1);
  const auto r1 = pde_residual(p, 0.3, 2.0, 1e-2, Variant::Published);
  const auto r2 = pde_residual(p, 0.3, 2.0, 5e-3, Variant::Published);
  EXPECT_GT(r1.relative(), 1e-2);
  EXPECT_NEAR(std::abs(r1.value) / std::abs(r2.value), 1.0, 1e-3);
}

TEST(CriticalNorm, ClosedFormForKEqualsTwo) {
  // 2^{5/2} 4 pi int r^2 (1+r^2)^{-4} dr with the integral equal to pi/32.
  const double expected = std::pow(2.0, 2.5) * 4 * std::numbers::pi * std::numbers::pi / 32;
  const double v = critical_weighted_norm(1.0, 2.0);
  EXPECT_NEAR(v * v / expected, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(v, critical_weighted_norm(-1.0, 2.0));
}

TEST(CriticalNorm, StableUnderRefinement) {
  const double coarse = critical_weighted_norm_sq_fixed(1.0, 2.0, 64);
  const double fine = critical_weighted_norm_sq_fixed(1.0, 2.0, 128);
  EXPECT_NEAR(coarse / fine, 1.0, 1e-8);
}

TEST(CriticalNorm, MatchesIndependentQuadrature) {
  // Reference values from an independent adaptive quadrature on [0, inf).
  // The norm is not monotone in k: the 2^{2k} prefactor wins for large k.
  const std::vector<std::pair<double, double>> reference = {
      {0.8, 7.97137485851877}, {1.0, 3.7360043360892607}, {1.5, 2.641754000591062},
      {3.0, 3.4947120552869646}, {5.0, 8.829892325523602}};
  for (const auto& [k, value] : reference) {
    EXPECT_NEAR(critical_weighted_norm(1.0, k) / value, 1.0, 1e-10) << "k=" << k;
  }
}

TEST(CriticalNorm, MatchesBetaFunction) {
  // ||.||^2 = 4 pi 2^{2k - 3/2} B(3/2, 2k - 3/2) / 2, including k near 3/4.
  for (double k : {0.76, 0.8, 0.9, 1.0, 1.25, 2.0, 4.0, 7.5}) {
    const double exact = std::sqrt(2 * std::numbers::pi * std::pow(2.0, 2 * k - 1.5) *
                                   std::beta(1.5, 2 * k - 1.5));
    EXPECT_NEAR(critical_weighted_norm(-1.0, k) / exact, 1.0, 1e-11) << "k=" << k;
  }
}

TEST(CriticalNorm, Preconditions) {
  EXPECT_THROW(critical_weighted_norm(0.5, 2.0), Error);
  EXPECT_THROW(critical_weighted_norm(1.0, 0.7), Error);
}
