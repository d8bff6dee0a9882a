#pragma once

// Gaussian weight profiles a(t) on [-1, 1], the convexity functional
//   F(a) = (1/a)(a'' + 32 a^3 - 3 a'^2 / (2a)),
// the shift curve b solving b'' = -F(a)/a with b(+-1) = 0, and the
// multiplicative improvement a <- a / (1 - a b) iterated to its fixed point.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hardylab/error.hpp"
#include "hardylab/finite_difference.hpp"
#include "hardylab/gauge.hpp"
#include "hardylab/quadrature.hpp"

namespace hardylab::convexity {

/// Uniform nodes lo = t_0 < ... < t_{n-1} = hi.
template <typename Real = double>
struct NodeGrid {
  Real lo = -1;
  Real hi = 1;
  int nodes = 513;

  /// The symmetric grid on [-1, 1]; the node count must be odd so that t = 0 is a node.
  static NodeGrid symmetric(int nodes) {
    require(nodes >= 9 && nodes % 2 == 1, ErrorKind::InvalidArgument,
            "profile grids need an odd node count >= 9");
    return {Real(-1), Real(1), nodes};
  }
  static NodeGrid interval(Real lo, Real hi, int nodes) {
    require(hi > lo && nodes >= 6, ErrorKind::InvalidArgument, "bad interval grid");
    return {lo, hi, nodes};
  }

  Real spacing() const { return (hi - lo) / (nodes - 1); }
  /// Mirror-exact on symmetric grids: t(n-1-i) == -t(i).
  Real t(int i) const {
    const Real mid = (lo + hi) / 2;
    const Real half = (hi - lo) / 2;
    return mid + half * Real(2 * i - (nodes - 1)) / Real(nodes - 1);
  }
  int center() const { return (nodes - 1) / 2; }
  std::size_t size() const { return static_cast<std::size_t>(nodes); }
  bool operator==(const NodeGrid&) const = default;
};

/// Scalar samples on a NodeGrid.
template <typename Real = double>
struct GridFunction {
  NodeGrid<Real> grid;
  std::vector<Real> values;

  static GridFunction sample(const NodeGrid<Real>& grid, const std::function<Real(Real)>& f) {
    GridFunction out{grid, std::vector<Real>(grid.size())};
    for (int i = 0; i < grid.nodes; ++i) out.values[i] = f(grid.t(i));
    return out;
  }

  Real operator[](std::size_t i) const { return values[i]; }
  Real& operator[](std::size_t i) { return values[i]; }
  std::size_t size() const { return values.size(); }
  Real at_center() const { return values[grid.center()]; }
  std::span<const Real> span() const { return values; }
};

template <typename Real>
Real sup_distance(const GridFunction<Real>& a, const GridFunction<Real>& b) {
  Real out = 0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max<Real>(out, std::abs(a[i] - b[i]));
  return out;
}

/// An even, positive Gaussian weight coefficient a(t) sampled on a symmetric grid.
template <typename Real = double>
class WeightProfile {
 public:
  WeightProfile() = default;
  explicit WeightProfile(GridFunction<Real> samples) : samples_(std::move(samples)) {
    for (Real v : samples_.values) {
      if (!(v > 0)) throw Error(ErrorKind::NonPositiveProfile, "weight profile must be positive");
    }
  }

  static WeightProfile constant(const NodeGrid<Real>& grid, Real mu) {
    return WeightProfile(GridFunction<Real>{grid, std::vector<Real>(grid.size(), mu)});
  }
  static WeightProfile sample(const NodeGrid<Real>& grid, const std::function<Real(Real)>& f) {
    return WeightProfile(GridFunction<Real>::sample(grid, f));
  }

  const NodeGrid<Real>& grid() const { return samples_.grid; }
  const GridFunction<Real>& samples() const { return samples_; }
  const std::vector<Real>& values() const { return samples_.values; }
  Real operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  Real at_center() const { return samples_.at_center(); }
  Real at_left() const { return samples_.values.front(); }
  Real at_right() const { return samples_.values.back(); }

  fd::Derivatives<Real> derivatives() const {
    return fd::uniform_derivatives<Real>(samples_.span(), samples_.grid.spacing());
  }

  /// gamma = 1 / a
  GridFunction<Real> gamma() const {
    GridFunction<Real> out = samples_;
    for (auto& v : out.values) v = Real(1) / v;
    return out;
  }

  /// max |a(t_i) - a(t_{n-1-i})|
  Real evenness_defect() const {
    const std::size_t n = size();
    Real out = 0;
    for (std::size_t i = 0; i < n / 2; ++i)
      out = std::max<Real>(out, std::abs(samples_[i] - samples_[n - 1 - i]));
    return out;
  }

  /// Largest increase of a between consecutive nodes on [0, 1] (zero when
  /// a is nonincreasing there).
  Real monotonicity_defect() const {
    Real out = 0;
    for (std::size_t i = samples_.grid.center(); i + 1 < size(); ++i)
      out = std::max<Real>(out, samples_[i + 1] - samples_[i]);
    return out;
  }

 private:
  GridFunction<Real> samples_;
};

/// b(t) on the profile grid together with the direction of the shift.
template <typename Real = double>
struct ShiftCurve {
  GridFunction<Real> values;
  std::vector<double> direction{0.0, 0.0, 1.0};

  Real operator[](std::size_t i) const { return values[i]; }
  Real at_center() const { return values.at_center(); }
  std::size_t size() const { return values.size(); }
};

// ---------------------------------------------------------------------------

template <typename Real>
GridFunction<Real> F_of(const WeightProfile<Real>& a) {
  const auto d = a.derivatives();
  GridFunction<Real> out{a.grid(), std::vector<Real>(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real ai = a[i];
    out[i] = (d.second[i] + 32 * ai * ai * ai - Real(3) * d.first[i] * d.first[i] / (2 * ai)) / ai;
  }
  return out;
}

template <typename Real = double>
struct SolveOptions {
  /// F(a) below -(tolerance + allowance * h^4) * 32 max(a)^2 counts as a
  /// genuine sign change rather than discretization noise. The h^4 term covers
  /// the one-sided derivative stencils at t = +-1, where F of the limit profile
  /// is close to zero.
  Real negative_f_tolerance = Real(1e-6);
  Real discretization_allowance = Real(10);
};

/// b(t) = int_t^1 int_0^s F(a)/a dtau ds, computed on [0, 1] with fourth-order
/// cumulative quadrature and mirrored, so b is even and b(+-1) = 0 exactly.
template <typename Real>
ShiftCurve<Real> solve_b(const WeightProfile<Real>& a, const SolveOptions<Real>& options = {}) {
  const auto f = F_of(a);
  const Real h4 = std::pow(a.grid().spacing(), 4);
  const Real a_max = *std::max_element(a.samples().values.begin(), a.samples().values.end());
  const Real floor =
      -(options.negative_f_tolerance + options.discretization_allowance * h4) * 32 * a_max * a_max;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > floor)) {
      throw Error(ErrorKind::NonPositiveF,
                  "F(a) is not positive at node " + std::to_string(i));
    }
  }
  const auto& grid = a.grid();
  const int c = grid.center();
  const int half = grid.nodes - c;  // nodes on [0, 1]
  std::vector<Real> g(half);
  for (int i = 0; i < half; ++i) g[i] = f[c + i] / a[c + i];
  const Real h = grid.spacing();
  const auto inner = fd::cumulative_integral<Real>(g, h);      // int_0^s
  const auto outer = fd::cumulative_integral<Real>(inner, h);  // int_0^t of inner
  ShiftCurve<Real> b{GridFunction<Real>{grid, std::vector<Real>(grid.size())}};
  for (int i = 0; i < half; ++i) {
    const Real v = outer.back() - outer[i];
    b.values[c + i] = v;
    b.values[c - i] = v;
  }
  return b;
}

template <typename Real>
struct IterationState {
  int k = 1;
  WeightProfile<Real> profile;
  ShiftCurve<Real> curve;
  Real gate_value = 0;
};

template <typename Real>
Real gate(const WeightProfile<Real>& a, const ShiftCurve<Real>& b) {
  return Real(1) - a.at_center() * b.at_center();
}

template <typename Real>
Real gate(const IterationState<Real>& state) {
  return gate(state.profile, state.curve);
}

/// a_{k+1} = a_k / (1 - a_k b_k).
template <typename Real>
WeightProfile<Real> iterate_step(const WeightProfile<Real>& a, const ShiftCurve<Real>& b) {
  GridFunction<Real> next = a.samples();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real denom = Real(1) - a[i] * b[i];
    if (!(denom > 0)) {
      throw Error(ErrorKind::GateClosed, "1 - a b <= 0 at node " + std::to_string(i));
    }
    next[i] = a[i] / denom;
  }
  return WeightProfile<Real>(std::move(next));
}

// ---------------------------------------------------------------------------
// Closed forms.

/// Smaller positive root of mu = R / (4 (1 + R^2)).
template <typename Real = double>
Real smallest_root_R(Real mu) {
  require(mu > 0, ErrorKind::InvalidArgument, "mu must be positive");
  const Real disc = 1 - 64 * mu * mu;
  if (disc < 0) throw Error(ErrorKind::NoRealRoot, "mu > 1/8 has no real R");
  return 8 * mu / (1 + std::sqrt(disc));
}

template <typename Real = double>
WeightProfile<Real> limit_profile(Real mu, const NodeGrid<Real>& grid) {
  const Real R = smallest_root_R<Real>(mu);
  return WeightProfile<Real>::sample(grid, [R](Real t) { return R / (4 * (1 + R * R * t * t)); });
}

struct Theorem2Profile {
  double alpha = 0;
  double beta = 0;
  double R = 0;

  /// a(t) = alpha beta R / (2 (alpha t + beta (1-t))^2 + 2 R^2 (alpha t - beta (1-t))^2)
  double operator()(double t) const {
    const double sum = alpha * t + beta * (1 - t);
    const double diff = alpha * t - beta * (1 - t);
    return alpha * beta * R / (2 * sum * sum + 2 * R * R * diff * diff);
  }
};

inline Theorem2Profile theorem2_profile(double alpha, double beta) {
  require(alpha > 0 && beta > 0, ErrorKind::InvalidArgument, "alpha and beta must be positive");
  if (alpha * beta < 4) throw Error(ErrorKind::NoRealRoot, "alpha beta < 4 has no real R");
  return {alpha, beta, smallest_root_R(1.0 / (2 * alpha * beta))};
}

struct HardyVerdict {
  bool must_vanish = false;
  std::optional<Theorem2Profile> profile;
};

inline HardyVerdict hardy_verdict(double alpha, double beta) {
  require(alpha > 0 && beta > 0, ErrorKind::InvalidArgument, "alpha and beta must be positive");
  if (alpha * beta < 4) return {true, std::nullopt};
  return {false, theorem2_profile(alpha, beta)};
}

// ---------------------------------------------------------------------------
// Fixed-point driver.

enum class Verdict { Converged, GateClosed, Unbounded };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "Converged";
    case Verdict::GateClosed: return "GateClosed";
    case Verdict::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

template <typename Real = double>
struct IterationOptions {
  int nodes = 513;
  Real tolerance = Real(1e-12);
  int max_steps = 200;
  /// a_k(0) above cap_factor * mu is reported as divergence.
  Real cap_factor = Real(1e6);
  bool record_history = false;
  SolveOptions<Real> solve{};
};

template <typename Real = double>
struct IterationResult {
  Verdict verdict = Verdict::Converged;
  /// Index of the last profile built (Converged/Unbounded) or of the profile
  /// whose gate closed (GateClosed).
  int k = 1;
  Real last_gate = 0;
  Real last_increment = 0;
  WeightProfile<Real> profile;
  std::vector<WeightProfile<Real>> history;  // a_1, a_2, ... when recorded
};

template <typename Real = double>
IterationResult<Real> run_iteration(Real mu, const IterationOptions<Real>& options = {}) {
  require(mu > 0, ErrorKind::InvalidArgument, "mu must be positive");
  require(options.max_steps >= 1, ErrorKind::InvalidArgument, "max_steps must be >= 1");
  const auto grid = NodeGrid<Real>::symmetric(options.nodes);
  const Real cap = options.cap_factor * mu;

  IterationResult<Real> result;
  auto a = WeightProfile<Real>::constant(grid, mu);
  if (options.record_history) result.history.push_back(a);
  for (int k = 1;; ++k) {
    const auto b = solve_b(a, options.solve);
    const Real g = gate(a, b);
    result.last_gate = g;
    if (g <= 0) {
      result.verdict = Verdict::GateClosed;
      result.k = k;
      result.profile = std::move(a);
      return result;
    }
    auto next = iterate_step(a, b);
    const Real increment = sup_distance(next.samples(), a.samples());
    result.last_increment = increment;
    if (options.record_history) result.history.push_back(next);
    if (next.at_center() > cap) {
      result.verdict = Verdict::Unbounded;
      result.k = k + 1;
      result.profile = std::move(next);
      return result;
    }
    if (increment < options.tolerance) {
      result.verdict = Verdict::Converged;
      result.k = k + 1;
      result.profile = std::move(next);
      return result;
    }
    if (k + 1 >= options.max_steps) {
      throw Error(ErrorKind::IterationBudgetExceeded,
                  "no verdict after " + std::to_string(options.max_steps) + " profiles");
    }
    a = std::move(next);
  }
}

// ---------------------------------------------------------------------------
// Two-point problem and interpolation exponent.

/// (gamma T')' = -psi on [c, d], T(c) = T(d) = 0, sampled on `grid`:
/// gamma T' = C - Psi with Psi = int_c^t psi, and C fixed by T(d) = 0.
template <typename Real>
GridFunction<Real> solve_T(const GridFunction<Real>& gamma, const GridFunction<Real>& psi) {
  require(gamma.grid == psi.grid, ErrorKind::InvalidArgument, "gamma and psi grids differ");
  for (Real g : gamma.values) {
    require(g > 0, ErrorKind::InvalidArgument, "gamma must be positive");
  }
  const auto& grid = gamma.grid;
  const Real h = grid.spacing();
  const auto Psi = fd::cumulative_integral<Real>(psi.span(), h);
  std::vector<Real> inv_gamma(grid.size()), psi_over_gamma(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    inv_gamma[i] = Real(1) / gamma[i];
    psi_over_gamma[i] = Psi[i] / gamma[i];
  }
  const auto I1 = fd::cumulative_integral<Real>(inv_gamma, h);
  const auto I2 = fd::cumulative_integral<Real>(psi_over_gamma, h);
  const Real C = I2.back() / I1.back();
  GridFunction<Real> T{grid, std::vector<Real>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) T[i] = C * I1[i] - I2[i];
  T.values.front() = 0;
  T.values.back() = 0;
  return T;
}

template <typename Real>
GridFunction<Real> solve_T(const std::function<Real(Real)>& gamma, const std::function<Real(Real)>& psi,
                           Real c, Real d, int nodes = 1025) {
  const auto grid = NodeGrid<Real>::interval(c, d, nodes);
  return solve_T(GridFunction<Real>::sample(grid, gamma), GridFunction<Real>::sample(grid, psi));
}

/// theta(t) = int_t^d ds/gamma / int_c^d ds/gamma on the grid of gamma.
template <typename Real>
GridFunction<Real> theta(const GridFunction<Real>& gamma) {
  const auto& grid = gamma.grid;
  std::vector<Real> inv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(gamma[i] > 0, ErrorKind::InvalidArgument, "gamma must be positive");
    inv[i] = Real(1) / gamma[i];
  }
  const auto I = fd::cumulative_integral<Real>(inv, grid.spacing());
  GridFunction<Real> out{grid, std::vector<Real>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (I.back() - I[i]) / I.back();
  out.values.front() = 1;
  out.values.back() = 0;
  return out;
}

/// Pointwise theta by adaptive quadrature.
inline double theta(const std::function<double(double)>& gamma, double c, double d, double t) {
  require(d > c && t >= c && t <= d, ErrorKind::InvalidArgument, "theta needs c <= t <= d");
  auto inv = [&](double s) { return 1.0 / gamma(s); };
  const double total = quad::adaptive_gk15(inv, c, d, 0.0, 1e-13).value;
  if (t == d) return 0.0;
  const double tail = quad::adaptive_gk15(inv, t, d, 0.0, 1e-13).value;
  return tail / total;
}

/// min_t [log(e^{2T+M+2N} (H(c)+eps)^theta (H(d)+eps)^{1-theta}) - log(H(t)+eps)].
/// Nonnegative slack means the interpolation bound holds on the samples.
inline double convexity_bound_check(std::span<const double> H, std::span<const double> T,
                                    std::span<const double> M, double N,
                                    std::span<const double> theta_values, double eps) {
  const std::size_t n = H.size();
  require(n >= 2 && T.size() == n && M.size() == n && theta_values.size() == n,
          ErrorKind::InvalidArgument, "convexity inputs must share one grid");
  require(eps >= 0, ErrorKind::InvalidArgument, "eps must be nonnegative");
  const double log_c = std::log(H.front() + eps);
  const double log_d = std::log(H.back() + eps);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    require(H[i] + eps > 0, ErrorKind::InvalidArgument, "H must be positive");
    const double rhs = 2 * T[i] + M[i] + 2 * N + theta_values[i] * log_c + (1 - theta_values[i]) * log_d;
    slack = std::min(slack, rhs - std::log(H[i] + eps));
  }
  return slack;
}

// ---------------------------------------------------------------------------

struct EnvConstants {
  double M_B = 0;  // 2 sup |x^t B|^2
  double M_V = 0;  // 2 sup |V| + sup|V|^2 / 4
};

/// Suprema over the sample set; lower bounds of the true suprema.
inline EnvConstants env_constants(const gauge::PotentialField& field,
                                  const std::function<std::complex<double>(const Eigen::VectorXd&)>& V,
                                  std::span<const Eigen::VectorXd> samples) {
  double sup_psi = 0, sup_v = 0;
  for (const auto& x : samples) {
    sup_psi = std::max(sup_psi, gauge::x_t_B(field, x).squaredNorm());
    sup_v = std::max(sup_v, std::abs(V(x)));
  }
  return {2 * sup_psi, 2 * sup_v + sup_v * sup_v / 4};
}

}  // namespace hardylab::convexity
