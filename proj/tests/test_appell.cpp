#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hardylab/appell.hpp"
#include "hardylab/propagator.hpp"

using namespace hardylab;
using namespace hardylab::appell;

namespace {

appell::WaveFunction free_gaussian(double a0) {
  return [a0](const Eigen::VectorXd& x, double s) { return propagator::free_gaussian_oracle(a0, x[0], s); };
}

}  // namespace

TEST(AlphaBeta, Basics) {
  EXPECT_DOUBLE_EQ(mu_of({2, 2}), 0.125);
  EXPECT_DOUBLE_EQ(mu_of({1, 2}), 0.25);
  EXPECT_DOUBLE_EQ(mu_of({1, 5}), 0.1);
  EXPECT_THROW(AlphaBeta::checked(0.0, 1.0), Error);
  EXPECT_THROW(AlphaBeta::checked(1.0, -2.0), Error);
  const auto ab = AlphaBeta::checked(1.5, 4.0);
  EXPECT_EQ(ab.source_time(0.0), 0.0);
  EXPECT_DOUBLE_EQ(ab.source_time(1.0), 1.0);
  for (double t : {0.1, 0.5, 0.9}) EXPECT_NEAR(ab.target_time(ab.source_time(t)), t, 1e-15);
  EXPECT_EQ(AlphaBeta::checked(3.0, 3.0).dilation(0.37), 1.0);
}

TEST(AppellWave, EqualScalesAreTheIdentity) {
  for (int dim : {1, 2}) {
    const auto grid = UniformGrid::checked(dim, 6.0, dim == 1 ? 256 : 65);
    const auto u = propagator::free_gaussian_wave(grid, 0.3, 0.42);
    const auto out = appell_wave(u, AlphaBeta::checked(2.7, 2.7));
    EXPECT_EQ(out.wave.values, u.values);
    EXPECT_EQ(out.wave.time, u.time);
    EXPECT_EQ(out.clipped_mass, 0.0);
  }
}

TEST(AppellWave, AgreesWithPointwiseTransform) {
  const auto grid = UniformGrid::checked(1, 20.0, 2048);
  const auto ab = AlphaBeta::checked(2.0, 3.0);
  const auto pointwise = appell_function(free_gaussian(0.25), ab, 1);
  for (double t : {0.0, 0.3, 0.8, 1.0}) {
    const auto src = propagator::free_gaussian_wave(grid, 0.25, ab.source_time(t));
    const auto out = appell_wave(src, ab, t).wave;
    double dev = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      dev = std::max(dev, std::abs(out.values[i] - pointwise(Eigen::VectorXd::Constant(1, grid.position(i)[0]), t)));
    }
    EXPECT_LT(dev, 1e-7) << "t=" << t;
    EXPECT_NEAR(weighted_norm(out) / weighted_norm(src), 1.0, 1e-8);
  }
}

TEST(AppellWave, WeightedIdentityAtTimeZero) {
  const auto grid = UniformGrid::checked(1, 20.0, 2048);
  for (auto [alpha, beta] : {std::pair{2.0, 3.0}, std::pair{1.0, 4.0}, std::pair{5.0, 2.5}}) {
    const auto ab = AlphaBeta::checked(alpha, beta);
    const auto u0 = propagator::free_gaussian_wave(grid, 0.25, 0.0);
    const auto ut0 = appell_wave(u0, ab).wave;
    const double lhs = weighted_norm(ut0, 1.0 / (alpha * beta));
    const double rhs = weighted_norm(u0, 1.0 / (beta * beta));
    EXPECT_NEAR(lhs / rhs, 1.0, 1e-6) << alpha << "," << beta;
  }
}

TEST(AppellWave, TargetTimeMustMatchSlice) {
  const auto grid = UniformGrid::checked(1, 10.0, 256);
  const auto u = propagator::free_gaussian_wave(grid, 0.5, 0.5);
  EXPECT_THROW(appell_wave(u, AlphaBeta::checked(1.0, 2.0), 0.5), Error);
}

TEST(AppellWave, ClippedMassRaisesOutOfDomain) {
  // Dilation sqrt(10)/10 at t = 1 pulls the preimage of the box well inside
  // the support of a wide Gaussian.
  const auto grid = UniformGrid::checked(1, 10.0, 256);
  const auto u = propagator::free_gaussian_wave(grid, 0.01, 1.0);
  try {
    appell_wave(u, AlphaBeta::checked(1.0, 10.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
  }
}

TEST(AppellPotentials, EqualScalesAndConstantPotential) {
  Potentials src;
  src.A = [](const Eigen::VectorXd& x, double t) { return Eigen::VectorXd(x * (1 + t)); };
  src.V = [](const Eigen::VectorXd&, double) { return Complex(2.5, 0.0); };
  src.F = [](const Eigen::VectorXd& x, double) { return Complex(x.squaredNorm(), 0.0); };
  const Eigen::VectorXd x{{0.4, -1.1}};
  const auto same = appell_potentials(src, AlphaBeta::checked(3.0, 3.0), 2);
  EXPECT_EQ(same.A(x, 0.3), src.A(x, 0.3));
  EXPECT_EQ(same.V(x, 0.3), src.V(x, 0.3));
  EXPECT_EQ(same.F(x, 0.3), src.F(x, 0.3));
  const auto ab = AlphaBeta::checked(1.5, 4.0);
  const auto tr = appell_potentials(src, ab, 2);
  for (double t : {0.0, 0.25, 1.0}) {
    const double d = ab.denominator(t);
    EXPECT_NEAR(tr.V(x, t).real(), 2.5 * ab.alpha * ab.beta / (d * d), 1e-13);
  }
}

TEST(AppellResidual, TransformedGaussianSolvesTheTransformedEquation) {
  Potentials src;
  src.A = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd::Zero(x.size()); };
  src.V = [](const Eigen::VectorXd&, double) { return Complex(0.0, 0.0); };
  src.F = [](const Eigen::VectorXd&, double) { return Complex(0.0, 0.0); };
  const auto ab = AlphaBeta::checked(2.0, 3.0);
  const auto pot = appell_potentials(src, ab, 1);
  const auto ut = appell_function(free_gaussian(0.25), ab, 1);
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.7);
  const double r1 = std::abs(appell_residual(ut, pot, x, 0.4, 1e-2));
  const double r2 = std::abs(appell_residual(ut, pot, x, 0.4, 5e-3));
  EXPECT_NEAR(r1 / r2, 4.0, 0.1);
  EXPECT_LT(r2, 1e-4);
}

TEST(SymmetricInterval, ConstantMapsToConstant) {
  const auto grid = UniformGrid::checked(1, 5.0, 101);
  SampledWave ones{grid, std::vector<Complex>(grid.size(), Complex(1.0)), 0.5};
  // The target box only sees the inner part of the source; a constant has mass
  // everywhere, so clipping has to be allowed.
  TransformOptions opts;
  opts.max_clipped_fraction = 1.0;
  const auto v = to_symmetric_interval(ones, opts).wave;
  EXPECT_EQ(v.time, 0.0);
  for (const auto& z : v.values) EXPECT_NEAR(std::abs(z - std::pow(2.0, -0.25)), 0.0, 1e-15);
}

TEST(SymmetricInterval, NormChainAndRoundTrip) {
  const auto grid = UniformGrid::checked(1, 20.0, 2048);
  const auto ab = AlphaBeta::checked(2.0, 3.0);
  const auto pointwise = appell_function(free_gaussian(0.25), ab, 1);
  const double tau = 0.35;
  const auto ut = SampledWave::from_function(grid, tau, [&](double x, double) {
    return pointwise(Eigen::VectorXd::Constant(1, x), tau);
  });
  const auto v = to_symmetric_interval(ut).wave;
  EXPECT_DOUBLE_EQ(v.time, 2 * tau - 1);
  EXPECT_NEAR(weighted_norm(v) / weighted_norm(ut), 1.0, 1e-8);
  const double lhs = weighted_norm(v, 1.0 / (2 * ab.alpha * ab.beta));
  const double rhs = weighted_norm(ut, 1.0 / (ab.alpha * ab.beta));
  EXPECT_NEAR(lhs / rhs, 1.0, 1e-8);
  const auto back = from_symmetric_interval(v).wave;
  EXPECT_DOUBLE_EQ(back.time, tau);
  double dev = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) dev = std::max(dev, std::abs(back.values[i] - ut.values[i]));
  EXPECT_LT(dev, 1e-6);
}

TEST(ScaleToUnitTime, IdentityAndGaussian) {
  const auto grid = UniformGrid::checked(1, 8.0, 1024);
  const auto v = SampledWave::from_function(grid, 0.0, [](double x, double) { return Complex(std::exp(-x * x)); });
  const auto same = scale_to_unit_time(v, 1.0, AlphaBeta::checked(2.0, 3.0));
  EXPECT_EQ(same.result.wave.values, v.values);
  const auto scaled = scale_to_unit_time(v, 4.0, AlphaBeta::checked(2.0, 3.0));
  EXPECT_DOUBLE_EQ(scaled.scaled.alpha, 1.0);
  EXPECT_DOUBLE_EQ(scaled.scaled.beta, 1.5);
  for (std::size_t i = 0; i < grid.size(); i += 37) {
    const double x = grid.position(i)[0];
    EXPECT_NEAR(std::abs(scaled.result.wave.values[i] - std::sqrt(2.0) * std::exp(-4 * x * x)), 0.0, 1e-6);
  }
  // ||e^{|x|^2/beta^2} v(0)|| = ||e^{|x|^2/beta'^2} u(0)|| with beta = 2.
  const double lhs = weighted_norm(v, 1.0 / 4.0);
  const double rhs = weighted_norm(scaled.result.wave, 1.0 / (1.0 * 1.0));
  EXPECT_NEAR(lhs / rhs, 1.0, 1e-8);
}
