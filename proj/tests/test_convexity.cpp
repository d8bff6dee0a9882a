#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hardylab/convexity.hpp"

using namespace hardylab;
using namespace hardylab::convexity;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(NodeGrid, SymmetricGridIsMirrorExact) {
  const auto g = NodeGrid<double>::symmetric(513);
  EXPECT_EQ(g.t(0), -1.0);
  EXPECT_EQ(g.t(512), 1.0);
  EXPECT_EQ(g.t(g.center()), 0.0);
  for (int i = 0; i < 513; ++i) EXPECT_EQ(g.t(512 - i), -g.t(i));
  EXPECT_THROW(NodeGrid<double>::symmetric(8), Error);
  EXPECT_THROW(NodeGrid<double>::symmetric(10), Error);
}

TEST(WeightProfile, RejectsNonPositiveSamples) {
  const auto g = NodeGrid<double>::symmetric(9);
  EXPECT_EQ(kind_of([&] { WeightProfile<double>::sample(g, [](double t) { return t; }); }),
            ErrorKind::NonPositiveProfile);
}

TEST(FunctionalF, ConstantAndLimitProfiles) {
  const auto g = NodeGrid<double>::symmetric(257);
  for (double v : F_of(WeightProfile<double>::constant(g, 0.1)).values) EXPECT_NEAR(v, 32 * 0.01, 1e-15);
  // The limit profile is a zero of F.
  using LD = long double;
  const auto a = limit_profile<LD>(LD(0.1), NodeGrid<LD>::symmetric(1025));
  for (LD v : F_of(a).values) EXPECT_LT(std::abs(static_cast<double>(v)), 1e-9);
}

TEST(FunctionalF, CancellationErrorShrinksUnderRefinement) {
  using LD = long double;
  auto worst = [](int nodes) {
    LD w = 0;
    for (LD v : F_of(limit_profile<LD>(LD(0.1), NodeGrid<LD>::symmetric(nodes))).values) w = std::max(w, std::abs(v));
    return static_cast<double>(w);
  };
  EXPECT_GE(worst(513) / worst(1025), 4.0);
}

TEST(SolveB, FirstIterateClosedForm) {
  const auto g = NodeGrid<double>::symmetric(513);
  for (double mu : {0.01, 0.1, 0.3}) {
    const auto b = solve_b(WeightProfile<double>::constant(g, mu));
    EXPECT_EQ(b.values.values.front(), 0.0);
    EXPECT_EQ(b.values.values.back(), 0.0);
    for (int i = 0; i < g.nodes; ++i) {
      const double t = g.t(i);
      EXPECT_NEAR(b[i], 16 * mu * (1 - t * t), 1e-12);
      EXPECT_EQ(b[i], b[g.nodes - 1 - i]);
    }
  }
}

TEST(SolveB, NegativeFIsRejected) {
  const auto g = NodeGrid<double>::symmetric(129);
  const auto a = WeightProfile<double>::sample(g, [](double t) { return 0.1 - 0.09 * t * t; });
  EXPECT_EQ(kind_of([&] { solve_b(a); }), ErrorKind::NonPositiveF);
}

TEST(Gate, QuarterIsExactlyClosed) {
  const auto g = NodeGrid<double>::symmetric(513);
  const auto a = WeightProfile<double>::constant(g, 0.25);
  const auto b = solve_b(a);
  EXPECT_EQ(gate(a, b), 0.0);
  EXPECT_EQ(kind_of([&] { iterate_step(a, b); }), ErrorKind::GateClosed);
}

TEST(Iteration, Verdicts) {
  const auto converged = run_iteration(0.1);
  EXPECT_EQ(converged.verdict, Verdict::Converged);
  EXPECT_LT(sup_distance(converged.profile.samples(), limit_profile(0.1, converged.profile.grid()).samples()), 1e-10);

  const auto closed = run_iteration(0.3);
  EXPECT_EQ(closed.verdict, Verdict::GateClosed);
  EXPECT_EQ(closed.k, 1);
  EXPECT_NEAR(closed.last_gate, 1 - 16 * 0.09, 1e-14);

  // Between the thresholds the first gate is open and a later one closes.
  const auto later = run_iteration(0.15);
  EXPECT_EQ(later.verdict, Verdict::GateClosed);
  EXPECT_GT(later.k, 1);

  IterationOptions<double> tiny_cap;
  tiny_cap.cap_factor = 1.05;
  EXPECT_EQ(run_iteration(0.15, tiny_cap).verdict, Verdict::Unbounded);

  IterationOptions<double> short_budget;
  short_budget.max_steps = 20;
  EXPECT_EQ(kind_of([&] { run_iteration(0.125, short_budget); }), ErrorKind::IterationBudgetExceeded);
}

TEST(Iteration, ProfilesIncreaseMonotonically) {
  IterationOptions<double> opts;
  opts.record_history = true;
  const auto r = run_iteration(0.1, opts);
  ASSERT_GE(r.history.size(), 3u);
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    for (std::size_t i = 0; i < r.history[k].size(); ++i) EXPECT_GE(r.history[k][i], r.history[k - 1][i]);
  }
  EXPECT_LT(r.profile.evenness_defect(), 1e-15);
}

TEST(Roots, SmallestRoot) {
  EXPECT_NEAR(smallest_root_R(0.125), 1.0, 1e-12);
  EXPECT_NEAR(smallest_root_R(0.1), 0.5, 1e-12);
  EXPECT_EQ(kind_of([] { smallest_root_R(0.13); }), ErrorKind::NoRealRoot);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mus(1e-4, 0.125);
  for (int i = 0; i < 50; ++i) {
    const double mu = mus(rng);
    const double R = smallest_root_R(mu);
    EXPECT_NEAR(R / (4 * (1 + R * R)), mu, 1e-15);
    EXPECT_LE(R, 1.0);
  }
}

TEST(Theorem2, ProfilesAndVerdicts) {
  const auto a22 = theorem2_profile(2.0, 2.0);
  EXPECT_NEAR(a22.R, 1.0, 1e-12);
  EXPECT_NEAR(a22(0.0), 0.25, 1e-15);
  EXPECT_NEAR(a22(1.0), 0.25, 1e-15);
  const auto a81 = theorem2_profile(8.0, 1.0);
  EXPECT_NEAR(a81(0.0), 1.0, 1e-14);
  EXPECT_NEAR(a81(1.0), 1.0 / 64, 1e-15);
  EXPECT_TRUE(hardy_verdict(1.0, 1.0).must_vanish);
  EXPECT_FALSE(hardy_verdict(2.0, 2.0).must_vanish);
  EXPECT_EQ(kind_of([] { theorem2_profile(1.0, 3.9); }), ErrorKind::NoRealRoot);
  EXPECT_EQ(kind_of([] { hardy_verdict(-1.0, 3.0); }), ErrorKind::InvalidArgument);
}

TEST(SolveT, PolynomialAndManufacturedSolutions) {
  const auto T = solve_T<double>([](double) { return 1.0; }, [](double) { return 2.0; }, 0.0, 1.0, 257);
  for (int i = 0; i < T.grid.nodes; ++i) {
    const double t = T.grid.t(i);
    EXPECT_NEAR(T[i], t * (1 - t), 1e-14);
  }
  // T = sin(pi t), gamma = 1 + t: psi = -(gamma T')'.
  const double pi = std::numbers::pi;
  const auto T2 = solve_T<double>([](double t) { return 1 + t; },
                                  [pi](double t) { return -(pi * std::cos(pi * t) - (1 + t) * pi * pi * std::sin(pi * t)); },
                                  0.0, 1.0, 1025);
  for (int i = 0; i < T2.grid.nodes; ++i) EXPECT_NEAR(T2[i], std::sin(pi * T2.grid.t(i)), 1e-10);
  const auto zero = solve_T<double>([](double t) { return 2 + t; }, [](double) { return 0.0; }, -1.0, 1.0, 65);
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
}

TEST(Theta, GridAndPointwiseAgree) {
  const auto g = NodeGrid<double>::interval(-1.0, 1.0, 401);
  auto gamma = [](double t) { return 1.5 + std::sin(t); };
  const auto th = theta(GridFunction<double>::sample(g, gamma));
  EXPECT_EQ(th[0], 1.0);
  EXPECT_EQ(th[400], 0.0);
  for (int i = 0; i < 401; i += 40) EXPECT_NEAR(th[i], theta(gamma, -1.0, 1.0, g.t(i)), 1e-10);
  const auto flat = theta(GridFunction<double>::sample(g, [](double) { return 1.0; }));
  for (int i = 0; i < 401; ++i) EXPECT_NEAR(flat[i], (1 - g.t(i)) / 2, 1e-14);
}

TEST(BoundCheck, SignOfSlack) {
  const int n = 51;
  std::vector<double> zero(n, 0.0), th(n), affine(n), convex(n), concave(n);
  for (int i = 0; i < n; ++i) {
    const double t = -1 + 2.0 * i / (n - 1);
    th[i] = (1 - t) / 2;
    affine[i] = std::exp(2 * t - 1);
    convex[i] = std::cosh(t);
    concave[i] = std::exp(-t * t);
  }
  EXPECT_NEAR(convexity_bound_check(affine, zero, zero, 0.0, th, 0.0), 0.0, 1e-13);
  EXPECT_NEAR(convexity_bound_check(convex, zero, zero, 0.0, th, 0.0), 0.0, 1e-15);  // attained at the ends
  EXPECT_LT(convexity_bound_check(concave, zero, zero, 0.0, th, 0.0), -0.5);
  std::vector<double> lift(n, 0.5);
  EXPECT_GE(convexity_bound_check(concave, lift, zero, 0.0, th, 0.0), 0.0);
}

TEST(EnvConstants, UniformField) {
  const auto f = gauge::landau(2.0);
  const std::vector<Eigen::VectorXd> samples{Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 3)};
  const auto c = env_constants(f, [](const Eigen::VectorXd&) { return std::complex<double>(0.5, 0.0); }, samples);
  EXPECT_NEAR(c.M_B, 2 * 36.0, 1e-12);
  EXPECT_NEAR(c.M_V, 1.0 + 0.0625, 1e-15);
}
