#pragma once

// Crank-Nicolson evolution of d_t u = i(Delta_A + V) u on a 1D or 2D box
// with Dirichlet walls, weighted norms H(t) = ||e^{a(t)|x|^2} u(t)||^2 along
// the evolution, and a discrete log-convexity scan of such traces.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "hardylab/convexity.hpp"
#include "hardylab/error.hpp"
#include "hardylab/wave.hpp"

namespace hardylab::propagator {

/// Closed-form solution of d_t u = i u_xx with u(x, 0) = exp(-a0 x^2).
inline Complex free_gaussian_oracle(double a0, double x, double t) {
  const Complex z(1.0, 4.0 * a0 * t);
  return std::exp(-a0 * x * x / z) / std::sqrt(z);
}

/// Tensor product of the 1D oracle, for 1D or 2D grids.
inline Complex free_gaussian_oracle(double a0, double x, double y, double t, int dimension) {
  Complex out = free_gaussian_oracle(a0, x, t);
  if (dimension == 2) out *= free_gaussian_oracle(a0, y, t);
  return out;
}

inline SampledWave free_gaussian_wave(const UniformGrid& grid, double a0, double t) {
  return SampledWave::from_function(grid, t, [&](double x, double y) {
    return free_gaussian_oracle(a0, x, y, t, grid.dimension);
  });
}

struct GridSpec {
  UniformGrid grid;
  double dt = 1e-3;
  int steps = 100;

  static GridSpec checked(const UniformGrid& grid, double dt, int steps) {
    const int n = grid.points;
    const bool pow2 = std::has_single_bit(static_cast<unsigned>(n));
    require(pow2 || (n % 2 == 1 && n >= 65), ErrorKind::InvalidArgument,
            "points per axis must be a power of two or odd >= 65");
    require(dt > 0 && std::isfinite(dt), ErrorKind::InvalidArgument, "dt must be positive");
    require(steps >= 0, ErrorKind::InvalidArgument, "step count must be nonnegative");
    return {grid, dt, steps};
  }
};

/// Bounded potentials on the box. A returns (A^1, A^2); the second entry is
/// ignored in 1D.
struct EvolutionPotentials {
  std::function<std::array<double, 2>(double x, double y, double t)> A;
  std::function<Complex(double x, double y, double t)> V;
  bool time_dependent = false;

  static EvolutionPotentials free() { return {}; }
  bool has_magnetic() const { return static_cast<bool>(A); }
};

struct EvolveOptions {
  /// Keep every n-th state (the initial state is always kept).
  int record_every = 1;
  /// Mass fraction tolerated in the cells next to the walls.
  double boundary_mass_tolerance = 1e-8;
  int boundary_cells = 4;
  double solve_residual_tolerance = 1e-12;
};

namespace detail {

/// Assembles the discrete Delta_A + V on interior nodes. Magnetic terms use
/// -i(A D + D A) with D the central difference, which is Hermitian and
/// approximates -2i A.grad - i div A.
class Operator {
 public:
  Operator(const UniformGrid& grid, const EvolutionPotentials& pot)
      : grid_(grid), pot_(pot), m_(grid.points - 2) {}

  int interior_per_axis() const { return m_; }
  std::size_t unknowns() const {
    return grid_.dimension == 1 ? static_cast<std::size_t>(m_) : static_cast<std::size_t>(m_) * m_;
  }

  /// Interior index -> full-grid flat index.
  std::size_t full_index(std::size_t k) const {
    if (grid_.dimension == 1) return k + 1;
    const std::size_t ix = k % m_ + 1, iy = k / m_ + 1;
    return iy * grid_.points + ix;
  }

  Eigen::SparseMatrix<Complex> assemble(double t) const {
    const double h = grid_.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const Complex i(0, 1);
    std::vector<Eigen::Triplet<Complex>> trip;
    const std::size_t n = unknowns();
    trip.reserve(n * (grid_.dimension == 1 ? 3 : 5));
    auto node_A = [&](int ix, int iy, int axis) {
      if (!pot_.A) return 0.0;
      const double x = grid_.coordinate(ix);
      const double y = grid_.dimension == 2 ? grid_.coordinate(iy) : 0.0;
      return pot_.A(x, y, t)[axis];
    };
    for (std::size_t k = 0; k < n; ++k) {
      const int ix = grid_.dimension == 1 ? static_cast<int>(k) + 1 : static_cast<int>(k % m_) + 1;
      const int iy = grid_.dimension == 1 ? 0 : static_cast<int>(k / m_) + 1;
      const double x = grid_.coordinate(ix);
      const double y = grid_.dimension == 2 ? grid_.coordinate(iy) : 0.0;
      Complex diag = -2.0 * grid_.dimension * inv_h2;
      if (pot_.V) diag += pot_.V(x, y, t);
      for (int axis = 0; axis < grid_.dimension; ++axis) {
        const double a_here = node_A(ix, iy, axis);
        diag -= a_here * a_here;
        const int stride = axis == 0 ? 1 : m_;
        const int pos = axis == 0 ? ix : iy;
        for (int dir : {-1, 1}) {
          const int npos = pos + dir;
          if (npos < 1 || npos > grid_.points - 2) continue;  // Dirichlet wall
          const int nx = axis == 0 ? npos : ix;
          const int ny = axis == 0 ? iy : npos;
          const double a_nb = node_A(nx, ny, axis);
          // -i/(2h) * dir * (A_here + A_neighbour)
          const Complex coupling = inv_h2 - i * (dir * (a_here + a_nb) / (2.0 * h));
          trip.emplace_back(static_cast<int>(k), static_cast<int>(k) + dir * stride, coupling);
        }
      }
      trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
    }
    Eigen::SparseMatrix<Complex> L(static_cast<int>(n), static_cast<int>(n));
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
  }

 private:
  UniformGrid grid_;
  EvolutionPotentials pot_;
  int m_;
};

inline double boundary_mass(const SampledWave& w, int cells) {
  const auto& g = w.grid;
  double mass = 0;
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const int ix = g.dimension == 1 ? static_cast<int>(idx) : static_cast<int>(idx % g.points);
    const int iy = g.dimension == 1 ? cells : static_cast<int>(idx / g.points);
    const auto near = [&](int i) { return i < cells || i >= g.points - cells; };
    if (near(ix) || (g.dimension == 2 && near(iy))) mass += std::norm(w.values[idx]);
  }
  return mass * g.cell_volume();
}

}  // namespace detail

/// States at times t0, t0 + r dt, ... with r = options.record_every, plus the
/// final state.
inline std::vector<SampledWave> evolve_cn(const SampledWave& initial, const EvolutionPotentials& pot,
                                          const GridSpec& spec, const EvolveOptions& options = {}) {
  require(initial.grid == spec.grid, ErrorKind::InvalidArgument,
          "initial state is not on the evolution grid");
  require(options.record_every >= 1, ErrorKind::InvalidArgument, "record_every must be >= 1");
  const detail::Operator op(spec.grid, pot);
  const std::size_t n = op.unknowns();
  const Complex half_step(0.0, spec.dt / 2);

  Eigen::VectorXcd u(static_cast<int>(n));
  for (std::size_t k = 0; k < n; ++k) u[static_cast<int>(k)] = initial.values[op.full_index(k)];
  const double initial_mass = norm_sq(initial);

  auto snapshot = [&](double time) {
    SampledWave w{spec.grid, std::vector<Complex>(spec.grid.size(), Complex(0)), time};
    for (std::size_t k = 0; k < n; ++k) w.values[op.full_index(k)] = u[static_cast<int>(k)];
    return w;
  };

  std::vector<SampledWave> family;
  family.push_back(snapshot(initial.time));

  Eigen::SparseMatrix<Complex> identity(static_cast<int>(n), static_cast<int>(n));
  identity.setIdentity();
  Eigen::SparseMatrix<Complex> L, lhs, rhs_op;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> solver;
  auto prepare = [&](double t_mid) {
    L = op.assemble(t_mid);
    lhs = identity - half_step * L;
    rhs_op = identity + half_step * L;
    solver.compute(lhs);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorKind::SolverDiverged, "Crank-Nicolson factorization failed");
    }
  };
  if (!pot.time_dependent) prepare(initial.time);

  for (int step = 1; step <= spec.steps; ++step) {
    const double t_mid = initial.time + (step - 0.5) * spec.dt;
    if (pot.time_dependent) prepare(t_mid);
    const Eigen::VectorXcd rhs = rhs_op * u;
    Eigen::VectorXcd next = solver.solve(rhs);
    const double residual = (lhs * next - rhs).norm();
    if (!next.allFinite() || residual > options.solve_residual_tolerance * std::max(1.0, rhs.norm())) {
      throw Error(ErrorKind::SolverDiverged,
                  "linear solve residual " + std::to_string(residual) + " at step " + std::to_string(step));
    }
    u = std::move(next);
    const double time = initial.time + step * spec.dt;
    if (step % options.record_every == 0 || step == spec.steps) {
      family.push_back(snapshot(time));
      const double edge = detail::boundary_mass(family.back(), options.boundary_cells);
      if (initial_mass > 0 && edge > options.boundary_mass_tolerance * initial_mass) {
        throw Error(ErrorKind::BoundaryMassExceeded,
                    "mass fraction " + std::to_string(edge / initial_mass) + " near the walls at t = " +
                        std::to_string(time));
      }
    }
  }
  return family;
}

// ---------------------------------------------------------------------------
// Weighted norms.

struct DecayFit {
  /// |u|^2 ~ C exp(-rate |x|^2) over the fitted tail.
  double rate = 0;
  std::size_t points = 0;
};

/// Least-squares fit of log|u|^2 against |x|^2 over the outer 10% (by radius)
/// of the nodes where |u|^2 exceeds 1e-20 of its maximum.
inline DecayFit fit_tail_decay(const SampledWave& w) {
  double peak = 0;
  for (const auto& v : w.values) peak = std::max(peak, std::norm(v));
  if (peak == 0) return {std::numeric_limits<double>::infinity(), 0};
  std::vector<std::pair<double, double>> significant;  // (r^2, log|u|^2)
  for (std::size_t i = 0; i < w.values.size(); ++i) {
    const double m = std::norm(w.values[i]);
    if (m > 1e-20 * peak) significant.emplace_back(w.grid.radius_sq(i), std::log(m));
  }
  std::sort(significant.begin(), significant.end());
  const std::size_t take = std::max<std::size_t>(8, significant.size() / 10);
  if (significant.size() < take) return {0.0, significant.size()};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const std::size_t start = significant.size() - take;
  for (std::size_t i = start; i < significant.size(); ++i) {
    const auto [x, y] = significant[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double nn = static_cast<double>(take);
  const double denom = nn * sxx - sx * sx;
  if (denom <= 0) return {0.0, take};
  return {-(nn * sxy - sx * sy) / denom, take};
}

/// Weight exponent a is admissible when 2a stays a relative margin below the
/// fitted tail decay rate of |u|^2.
inline bool weight_admissible(const SampledWave& w, double a, double margin = 1e-3) {
  if (a <= 0) return true;
  return 2 * a < fit_tail_decay(w).rate * (1 - margin);
}

/// H = int e^{2a|x|^2} |u|^2 dx (trapezoid; the walls carry zeros).
inline double weighted_H(const SampledWave& w, double a) {
  require(a >= 0, ErrorKind::InvalidArgument, "weight exponent must be nonnegative");
  if (!weight_admissible(w, a)) {
    throw Error(ErrorKind::WeightExceedsDecay,
                "weight exponent " + std::to_string(a) + " exceeds the tail decay at t = " +
                    std::to_string(w.time));
  }
  return weighted_norm_sq(w, a);
}

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> H;
  std::vector<double> norm2;
  std::vector<bool> admissible;
};

/// H(t_i) along a family with weight exponent a(t_i). With `strict`, the
/// first inadmissible slice raises WeightExceedsDecay; otherwise it is
/// flagged and H is still the grid sum.
inline EvolutionTrace trace_H(const std::vector<SampledWave>& family,
                              const std::function<double(double)>& weight, bool strict = true) {
  EvolutionTrace trace;
  for (const auto& w : family) {
    const double a = weight(w.time);
    const bool ok = weight_admissible(w, a);
    if (!ok && strict) {
      throw Error(ErrorKind::WeightExceedsDecay,
                  "weight exponent " + std::to_string(a) + " exceeds the tail decay at t = " +
                      std::to_string(w.time));
    }
    trace.times.push_back(w.time);
    trace.H.push_back(weighted_norm_sq(w, a));
    trace.norm2.push_back(norm_sq(w));
    trace.admissible.push_back(ok);
  }
  return trace;
}

/// A weight profile on [-1, 1] stretched over [t_lo, t_hi], linear between nodes.
inline std::function<double(double)> profile_weight(const convexity::WeightProfile<double>& a,
                                                    double t_lo, double t_hi) {
  return [a, t_lo, t_hi](double t) {
    const double s = std::clamp(2 * (t - t_lo) / (t_hi - t_lo) - 1, -1.0, 1.0);
    const auto& g = a.grid();
    const double pos = (s - g.lo) / g.spacing();
    const int i = std::clamp(static_cast<int>(std::floor(pos)), 0, g.nodes - 2);
    const double f = pos - i;
    return (1 - f) * a[i] + f * a[i + 1];
  };
}

/// min_i [log H_{i-1} - 2 log H_i + log H_{i+1}].
inline double log_convexity_scan(std::span<const double> H) {
  require(H.size() >= 3, ErrorKind::InvalidArgument, "scan needs at least three samples");
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < H.size(); ++i) {
    require(H[i - 1] > 0 && H[i] > 0 && H[i + 1] > 0, ErrorKind::InvalidArgument,
            "trace must be positive");
    out = std::min(out, std::log(H[i - 1]) - 2 * std::log(H[i]) + std::log(H[i + 1]));
  }
  return out;
}

inline double log_convexity_scan(const EvolutionTrace& trace) { return log_convexity_scan(trace.H); }

/// Closed-form H(t) for the 1D free Gaussian with constant weight exponent a.
inline double free_gaussian_H(double a0, double a, double t) {
  const double z2 = 1 + 16 * a0 * a0 * t * t;
  const double rate = 2 * a0 / z2 - 2 * a;
  require(rate > 0, ErrorKind::WeightExceedsDecay, "weight exceeds the Gaussian decay");
  return std::sqrt(std::numbers::pi / rate) / std::sqrt(z2);
}

}  // namespace hardylab::propagator
