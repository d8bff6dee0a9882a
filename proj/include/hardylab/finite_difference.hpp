#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "hardylab/error.hpp"

namespace hardylab::fd {

/// Fornberg's recursion: weights[j][m] is the coefficient of f(x_j) in the
/// m-th derivative at z, for m = 0..max_order.
template <typename Real>
std::vector<std::vector<Real>> fornberg_weights(Real z, std::span<const Real> x, int max_order) {
  const std::size_t n = x.size();
  std::vector<std::vector<Real>> c(n, std::vector<Real>(max_order + 1, Real(0)));
  Real c1 = 1;
  Real c4 = x[0] - z;
  c[0][0] = 1;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), max_order);
    Real c2 = 1;
    const Real c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const Real c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k > 0; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k > 0; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

template <typename Real>
struct Derivatives {
  std::vector<Real> first;
  std::vector<Real> second;
};

/// Fourth-order first and second derivatives of samples on a uniform grid:
/// five-point central stencils in the interior, six-point one-sided stencils
/// at the two nodes nearest each end. Differences are taken against the
/// evaluation node, so constant data differentiates to exact zeros.
template <typename Real>
Derivatives<Real> uniform_derivatives(std::span<const Real> f, Real h) {
  const std::size_t n = f.size();
  require(n >= 6, ErrorKind::InvalidArgument, "uniform_derivatives needs at least 6 samples");

  auto stencil_weights = [](int offset_from_first, int width) {
    std::vector<Real> x(width);
    for (int j = 0; j < width; ++j) x[j] = Real(j - offset_from_first);
    return fornberg_weights<Real>(Real(0), std::span<const Real>(x), 2);
  };
  const auto central = stencil_weights(2, 5);
  const auto left0 = stencil_weights(0, 6);
  const auto left1 = stencil_weights(1, 6);
  const auto right0 = stencil_weights(5, 6);
  const auto right1 = stencil_weights(4, 6);

  Derivatives<Real> d{std::vector<Real>(n), std::vector<Real>(n)};
  auto apply = [&](std::size_t i, std::size_t first, const std::vector<std::vector<Real>>& w) {
    Real d1 = 0, d2 = 0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const Real diff = f[first + j] - f[i];
      d1 += w[j][1] * diff;
      d2 += w[j][2] * diff;
    }
    d.first[i] = d1 / h;
    d.second[i] = d2 / (h * h);
  };
  apply(0, 0, left0);
  apply(1, 0, left1);
  for (std::size_t i = 2; i + 2 < n; ++i) apply(i, i - 2, central);
  apply(n - 2, n - 6, right1);
  apply(n - 1, n - 6, right0);
  return d;
}

/// Cumulative integral G[i] = int_{x_0}^{x_i} g on a uniform grid, fourth
/// order: each cell integrates the cubic through the four nearest samples.
template <typename Real>
std::vector<Real> cumulative_integral(std::span<const Real> g, Real h) {
  const std::size_t n = g.size();
  require(n >= 4, ErrorKind::InvalidArgument, "cumulative_integral needs at least 4 samples");
  std::vector<Real> out(n, Real(0));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    Real cell;
    if (i == 0) {
      cell = 9 * g[0] + 19 * g[1] - 5 * g[2] + g[3];
    } else if (i == n - 2) {
      cell = 9 * g[n - 1] + 19 * g[n - 2] - 5 * g[n - 3] + g[n - 4];
    } else {
      cell = -g[i - 1] + 13 * g[i] + 13 * g[i + 1] - g[i + 2];
    }
    out[i + 1] = out[i] + cell * h / 24;
  }
  return out;
}

}  // namespace hardylab::fd
