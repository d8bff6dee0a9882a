#include <cmath>

#include <gtest/gtest.h>

#include "hardylab/gauge.hpp"

using namespace hardylab;
using namespace hardylab::gauge;

TEST(Gauge, LandauMapsToSymmetricGauge) {
  const auto landau_field = landau(1.7);
  const auto sym = symmetric(1.7);
  for (const auto& x : box_samples(2, 4.0, 100, 21)) {
    EXPECT_LT((cronstrom_transform(landau_field, x) - sym(x)).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Gauge, RadialGaugeIsAFixedPoint) {
  const auto sym = symmetric(-0.4);
  for (const auto& x : box_samples(2, 4.0, 50, 22)) {
    EXPECT_LT((cronstrom_transform(sym, x) - sym(x)).norm(), 1e-13);
  }
}

TEST(Gauge, PureGradientIsRemoved) {
  const auto g = gradient();
  for (const auto& x : box_samples(2, 2.0, 50, 23)) {
    EXPECT_LT(cronstrom_transform(g, x).norm(), 1e-12);
    EXPECT_LT(field_matrix(g, x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gauge, FieldMatrixIsAntisymmetric) {
  const auto f = random_quadratic(4, 3);
  for (const auto& x : box_samples(4, 1.5, 20, 24)) {
    const auto b = field_matrix(f, x);
    EXPECT_LT((b + b.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Gauge, TwoRoutesAgreeOnRandomQuadratics) {
  for (int dim : {2, 3, 4}) {
    const auto f = random_quadratic(dim, 100 + dim);
    for (const auto& x : box_samples(dim, 2.0, 25, 30 + dim)) {
      const Vector direct = cronstrom_transform(f, x);
      const Vector via_phi = cronstrom_via_phi(f, x);
      EXPECT_LT((direct - via_phi).lpNorm<Eigen::Infinity>(), 1e-7) << "dim=" << dim;
      EXPECT_LT(std::abs(x.dot(direct)), 1e-12 * (1 + x.squaredNorm() * direct.norm()));
    }
  }
}

TEST(Gauge, FieldIsPreserved) {
  for (int dim : {2, 3, 5}) {
    const auto f = random_quadratic(dim, 7 * dim);
    const auto report = verify_gauge(f, cronstrom_field(f), box_samples(dim, 2.0, 40, dim));
    EXPECT_LT(report.max_field_deviation, 1e-6);
    EXPECT_LT(report.max_radial_component, 1e-10);
    EXPECT_EQ(report.samples, 40u);
  }
}

TEST(Gauge, ExampleFieldIsAlreadyRadial) {
  for (auto variant : {example::Variant::Published, example::Variant::SignConsistent}) {
    const auto f = example_at_time(0.5, 2.0, variant);
    auto fd = f;
    fd.jacobian.reset();
    for (const auto& x : box_samples(3, 3.0, 60, 40)) {
      if (std::hypot(x[0], x[1]) < 0.3) continue;
      EXPECT_LT((cronstrom_transform(f, x) - f(x)).norm(), 1e-12);
      EXPECT_LT((jacobian_at(f, x) - jacobian_at(fd, x)).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
}

TEST(Gauge, XtBOfUniformField) {
  const auto f = landau(2.0);
  const Vector x{{0.3, -1.2}};
  const Vector psi = x_t_B(f, x);
  EXPECT_NEAR(psi[0], -2.0 * x[1], 1e-15);
  EXPECT_NEAR(psi[1], 2.0 * x[0], 1e-15);
}

TEST(Gauge, SamplesAreSeedDeterministic) {
  const auto a = box_samples(3, 1.0, 10, 9);
  const auto b = box_samples(3, 1.0, 10, 9);
  const auto c = box_samples(3, 1.0, 10, 10);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_NE(a[0], c[0]);
}

TEST(Gauge, NonFiniteFieldIsReported) {
  PotentialField bad;
  bad.dimension = 2;
  bad.potential = [](const Vector& x) { return Vector{{1.0 / (x[0] - 0.5), 0.0}}; };
  try {
    compute_phi(bad, Vector{{1.0, 0.0}}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteSample);
  }
}
