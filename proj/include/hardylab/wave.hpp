#pragma once

// Complex fields sampled on a uniform tensor grid over [-L, L]^n, n = 1 or 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "hardylab/error.hpp"

namespace hardylab {

using Complex = std::complex<double>;

struct UniformGrid {
  int dimension = 1;
  double half_extent = 10.0;
  int points = 256;  // per axis, nodes include both walls

  static UniformGrid checked(int dimension, double half_extent, int points) {
    require(dimension == 1 || dimension == 2, ErrorKind::InvalidArgument,
            "grid dimension must be 1 or 2");
    require(half_extent > 0, ErrorKind::InvalidArgument, "grid half-extent must be positive");
    require(points >= 8, ErrorKind::InvalidArgument, "grid needs at least 8 points per axis");
    return {dimension, half_extent, points};
  }

  double spacing() const { return 2 * half_extent / (points - 1); }
  double coordinate(int i) const { return -half_extent + i * spacing(); }
  std::size_t size() const {
    return dimension == 1 ? static_cast<std::size_t>(points)
                          : static_cast<std::size_t>(points) * points;
  }
  double cell_volume() const { return dimension == 1 ? spacing() : spacing() * spacing(); }

  /// Node coordinates of flat index `idx` (x fastest).
  std::array<double, 2> position(std::size_t idx) const {
    if (dimension == 1) return {coordinate(static_cast<int>(idx)), 0.0};
    return {coordinate(static_cast<int>(idx % points)), coordinate(static_cast<int>(idx / points))};
  }
  double radius_sq(std::size_t idx) const {
    const auto p = position(idx);
    return p[0] * p[0] + p[1] * p[1];
  }

  bool operator==(const UniformGrid&) const = default;
};

struct SampledWave {
  UniformGrid grid;
  std::vector<Complex> values;
  double time = 0.0;

  static SampledWave from_function(const UniformGrid& grid, double time,
                                   const std::function<Complex(double, double)>& f) {
    SampledWave w{grid, std::vector<Complex>(grid.size()), time};
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto p = grid.position(i);
      w.values[i] = f(p[0], p[1]);
    }
    return w;
  }
};

/// Riemann sum of |u|^2 e^{2c|x|^2}; the exponent is combined before
/// exponentiation so large weights on tiny tails do not overflow.
inline double weighted_norm_sq(const SampledWave& w, double c = 0.0) {
  double total = 0;
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double mag = std::abs(w.values[i]);
    if (mag == 0.0) continue;
    total += std::exp(2 * c * w.grid.radius_sq(i) + 2 * std::log(mag));
  }
  return total * w.grid.cell_volume();
}

inline double weighted_norm(const SampledWave& w, double c = 0.0) {
  return std::sqrt(weighted_norm_sq(w, c));
}

inline double norm_sq(const SampledWave& w) { return weighted_norm_sq(w, 0.0); }

namespace detail {

/// Four-point Lagrange weights for fractional offset f in [0, 1) from node 1.
inline std::array<double, 4> cubic_weights(double f) {
  return {-f * (f - 1) * (f - 2) / 6, (f + 1) * (f - 1) * (f - 2) / 2,
          -(f + 1) * f * (f - 2) / 2, (f + 1) * f * (f - 1) / 6};
}

struct AxisStencil {
  int first = 0;
  std::array<double, 4> weights{};
  bool inside = false;
};

inline AxisStencil axis_stencil(const UniformGrid& g, double x) {
  AxisStencil s;
  const double pos = (x + g.half_extent) / g.spacing();
  if (pos < 0.0 || pos > g.points - 1) return s;
  s.inside = true;
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) {
    // Coincident node: copy exactly.
    s.first = static_cast<int>(nearest);
    s.weights = {1.0, 0.0, 0.0, 0.0};
    return s;
  }
  int base = static_cast<int>(std::floor(pos)) - 1;
  base = std::clamp(base, 0, g.points - 4);
  s.first = base;
  const double f = pos - (base + 1);
  if (f >= 0.0 && f < 1.0) {
    s.weights = cubic_weights(f);
  } else {
    // Edge cell: general Lagrange weights on nodes base..base+3.
    for (int j = 0; j < 4; ++j) {
      double w = 1;
      for (int m = 0; m < 4; ++m)
        if (m != j) w *= (pos - (base + m)) / double(j - m);
      s.weights[j] = w;
    }
  }
  return s;
}

}  // namespace detail

/// Cubic (tensor) interpolation; zero outside the grid.
inline Complex interpolate(const SampledWave& w, double x, double y = 0.0) {
  const auto& g = w.grid;
  const auto sx = detail::axis_stencil(g, x);
  if (!sx.inside) return 0.0;
  if (g.dimension == 1) {
    Complex out = 0;
    for (int j = 0; j < 4; ++j)
      if (sx.weights[j] != 0.0) out += sx.weights[j] * w.values[sx.first + j];
    return out;
  }
  const auto sy = detail::axis_stencil(g, y);
  if (!sy.inside) return 0.0;
  Complex out = 0;
  for (int jy = 0; jy < 4; ++jy) {
    if (sy.weights[jy] == 0.0) continue;
    Complex row = 0;
    for (int jx = 0; jx < 4; ++jx)
      if (sx.weights[jx] != 0.0)
        row += sx.weights[jx] * w.values[static_cast<std::size_t>(sy.first + jy) * g.points + sx.first + jx];
    out += sy.weights[jy] * row;
  }
  return out;
}

}  // namespace hardylab
