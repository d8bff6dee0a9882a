#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include "hardylab/error.hpp"

namespace hardylab::quad {

template <typename Real = double>
struct GaussRule {
  std::vector<Real> nodes;    // on [-1, 1]
  std::vector<Real> weights;
};

/// Gauss-Legendre rule by Newton iteration on P_n.
template <typename Real = double>
GaussRule<Real> gauss_legendre(int n) {
  require(n >= 1, ErrorKind::InvalidArgument, "gauss_legendre needs n >= 1");
  GaussRule<Real> rule;
  rule.nodes.assign(n, Real(0));
  rule.weights.assign(n, Real(0));
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real x = std::cos(std::numbers::pi_v<Real> * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Real dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 4 * std::numeric_limits<Real>::epsilon()) break;
    }
    // Re-evaluate the derivative at the converged node.
    {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = (n == 1) ? Real(1) : n * (x * p1 - p0) / (x * x - 1);
    }
    const Real w = 2 / ((1 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0;
  return rule;
}

/// Composite Gauss-Legendre on [a, b] with `panels` equal panels of `order` points.
template <typename Real, typename F>
Real composite_gauss(F&& f, Real a, Real b, int panels, const GaussRule<Real>& rule) {
  const Real width = (b - a) / panels;
  Real total = 0;
  for (int p = 0; p < panels; ++p) {
    const Real lo = a + p * width;
    const Real mid = lo + width / 2;
    Real panel = 0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      panel += rule.weights[i] * f(mid + width / 2 * rule.nodes[i]);
    }
    total += panel * width / 2;
  }
  return total;
}

template <typename Real, typename F>
Real composite_gauss(F&& f, Real a, Real b, int panels, int order = 8) {
  return composite_gauss(std::forward<F>(f), a, b, panels, gauss_legendre<Real>(order));
}

struct AdaptiveResult {
  double value = 0;
  double error_estimate = 0;
  int intervals = 0;
};

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment gk15(F& f, double a, double b) {
  const double center = (a + b) / 2;
  const double half = (b - a) / 2;
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) bisection.
template <typename F>
AdaptiveResult adaptive_gk15(F&& f, double a, double b, double abs_tol, double rel_tol,
                             int max_intervals = 2000) {
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  double value = first.value;
  double error = first.error;
  heap.push(first);
  int intervals = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (intervals >= max_intervals) {
      throw Error(ErrorKind::QuadratureNotConverged,
                  "adaptive_gk15 exceeded " + std::to_string(max_intervals) + " intervals");
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = (worst.a + worst.b) / 2;
    const auto left = detail::gk15(f, worst.a, mid);
    const auto right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to shed the drift of incremental updates.
  double total = 0, total_error = 0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(total)) {
    throw Error(ErrorKind::QuadratureNotConverged, "non-finite integral");
  }
  return {total, total_error, intervals};
}

}  // namespace hardylab::quad
