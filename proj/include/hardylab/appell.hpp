#pragma once

// Pseudoconformal (Appell) change of variables, the shift of the time window
// to [-1, 1], and the parabolic rescaling of [0, T] to [0, 1].

#include <cmath>
#include <complex>
#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "hardylab/error.hpp"
#include "hardylab/wave.hpp"

namespace hardylab::appell {

struct AlphaBeta {
  double alpha = 1.0;
  double beta = 1.0;

  static AlphaBeta checked(double alpha, double beta) {
    require(alpha > 0 && beta > 0 && std::isfinite(alpha) && std::isfinite(beta),
            ErrorKind::InvalidArgument, "alpha and beta must be positive");
    return {alpha, beta};
  }

  /// alpha(1 - t) + beta t, written so that alpha == beta gives alpha exactly.
  double denominator(double t) const { return alpha + (beta - alpha) * t; }
  /// Source time s(t) = t beta / (alpha(1-t) + beta t).
  double source_time(double t) const { return t * (beta / denominator(t)); }
  /// Inverse of source_time: t(s) = s alpha / (beta(1-s) + alpha s).
  double target_time(double s) const { return s * (alpha / (beta + (alpha - beta) * s)); }
  /// Spatial dilation sqrt(alpha beta) / (alpha(1-t) + beta t).
  double dilation(double t) const { return std::sqrt(alpha * beta) / denominator(t); }
};

inline double mu_of(const AlphaBeta& ab) { return 1.0 / (2.0 * ab.alpha * ab.beta); }

struct TransformResult {
  SampledWave wave;
  /// Source mass (|u|^2 integral) lying outside the region the target grid
  /// samples; it cannot be represented in the output.
  double clipped_mass = 0.0;
};

struct TransformOptions {
  /// Relative clipped mass above which the transform raises OutOfDomain.
  double max_clipped_fraction = 1e-8;
  std::optional<UniformGrid> target_grid;
};

namespace detail {

/// out(x) = amplitude * src(dilation * x) * exp(i * chirp * |x|^2).
inline TransformResult resample(const SampledWave& src, double dilation, double amplitude,
                                double chirp, double new_time, const TransformOptions& options) {
  const UniformGrid target = options.target_grid.value_or(src.grid);
  require(target.dimension == src.grid.dimension, ErrorKind::InvalidArgument,
          "target grid dimension must match the source");
  TransformResult out{SampledWave{target, std::vector<Complex>(target.size()), new_time}, 0.0};
  for (std::size_t i = 0; i < target.size(); ++i) {
    const auto p = target.position(i);
    Complex v = interpolate(src, dilation * p[0], dilation * p[1]);
    if (chirp != 0.0) v *= std::polar(1.0, chirp * target.radius_sq(i));
    out.wave.values[i] = amplitude * v;
  }
  // Source nodes beyond the preimage of the target box.
  const double reach = dilation * target.half_extent;
  double clipped = 0, total = 0;
  for (std::size_t i = 0; i < src.grid.size(); ++i) {
    const auto p = src.grid.position(i);
    const double m = std::norm(src.values[i]);
    total += m;
    if (std::abs(p[0]) > reach * (1 + 1e-12) || std::abs(p[1]) > reach * (1 + 1e-12)) clipped += m;
  }
  out.clipped_mass = clipped * src.grid.cell_volume();
  total *= src.grid.cell_volume();
  if (total > 0 && out.clipped_mass > options.max_clipped_fraction * total) {
    throw Error(ErrorKind::OutOfDomain, "rescaled argument leaves the source grid; clipped mass " +
                                            std::to_string(out.clipped_mass));
  }
  return out;
}

}  // namespace detail

/// u~(x, t) from the source slice u(., s), where t is the target time with
/// source_time(t) = s.
inline TransformResult appell_wave(const SampledWave& u, const AlphaBeta& ab,
                                   const TransformOptions& options = {}) {
  require(u.time >= 0.0 && u.time <= 1.0, ErrorKind::OutOfDomain,
          "source time must lie in [0, 1]");
  const double t = ab.target_time(u.time);
  const double denom = ab.denominator(t);
  const double dilation = ab.dilation(t);
  const int n = u.grid.dimension;
  const double amplitude = std::pow(dilation, n / 2.0);
  // exp((alpha - beta)|x|^2 / (4 i D)) = exp(-i (alpha - beta)|x|^2 / (4 D)).
  const double chirp = -(ab.alpha - ab.beta) / (4.0 * denom);
  return detail::resample(u, dilation, amplitude, chirp, t, options);
}

/// Same, with the target time stated explicitly; the source slice must sit at
/// source_time(target).
inline TransformResult appell_wave(const SampledWave& u, const AlphaBeta& ab, double target_time,
                                   const TransformOptions& options = {}) {
  require(target_time >= 0.0 && target_time <= 1.0, ErrorKind::OutOfDomain,
          "target time must lie in [0, 1]");
  if (std::abs(ab.source_time(target_time) - u.time) > 1e-12) {
    throw Error(ErrorKind::OutOfDomain, "source slice is not at s(t)");
  }
  auto out = appell_wave(u, ab, options);
  out.wave.time = target_time;
  return out;
}

/// Pointwise form of the transformation for a closed-form source u(x, s).
using WaveFunction = std::function<Complex(const Eigen::VectorXd&, double)>;

inline WaveFunction appell_function(WaveFunction u, const AlphaBeta& ab, int dimension) {
  return [u = std::move(u), ab, dimension](const Eigen::VectorXd& x, double t) {
    const double denom = ab.denominator(t);
    const double dilation = ab.dilation(t);
    const Complex chirp = std::polar(1.0, -(ab.alpha - ab.beta) * x.squaredNorm() / (4.0 * denom));
    return std::pow(dilation, dimension / 2.0) * u(Eigen::VectorXd(dilation * x), ab.source_time(t)) *
           chirp;
  };
}

using VectorPotential = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;
using ScalarPotential = std::function<Complex(const Eigen::VectorXd&, double)>;

struct Potentials {
  VectorPotential A;
  ScalarPotential V;
  ScalarPotential F;  // forcing term
};

inline Potentials appell_potentials(const Potentials& src, const AlphaBeta& ab, int dimension) {
  Potentials out;
  out.A = [a = src.A, ab](const Eigen::VectorXd& x, double t) -> Eigen::VectorXd {
    const double d = ab.dilation(t);
    return d * a(Eigen::VectorXd(d * x), ab.source_time(t));
  };
  out.V = [v = src.V, ab](const Eigen::VectorXd& x, double t) {
    const double d = ab.dilation(t);
    return d * d * v(Eigen::VectorXd(d * x), ab.source_time(t));
  };
  out.F = [f = src.F, ab, dimension](const Eigen::VectorXd& x, double t) {
    const double d = ab.dilation(t);
    const double denom = ab.denominator(t);
    const Complex chirp = std::polar(1.0, -(ab.alpha - ab.beta) * x.squaredNorm() / (4.0 * denom));
    return std::pow(d, dimension / 2.0 + 2.0) * f(Eigen::VectorXd(d * x), ab.source_time(t)) * chirp;
  };
  return out;
}

/// d_t u~ - i(Delta u~ + V~ u~ + F~) for a potential-free-magnetic problem
/// (the (alpha - beta) A~.x term is absent in the radial gauge), with
/// second-order central differences of step h.
inline Complex appell_residual(const WaveFunction& u_tilde, const Potentials& transformed,
                               const Eigen::VectorXd& x, double t, double h) {
  const int n = static_cast<int>(x.size());
  const Complex u0 = u_tilde(x, t);
  const Complex ut = (u_tilde(x, t + h) - u_tilde(x, t - h)) / (2 * h);
  Complex lap = 0;
  Eigen::VectorXcd grad(n);
  const Eigen::VectorXd a = transformed.A(x, t);
  double div_a = 0;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = h;
    const Complex up = u_tilde(x + e, t), um = u_tilde(x - e, t);
    lap += (up - 2.0 * u0 + um) / (h * h);
    grad[j] = (up - um) / (2 * h);
    div_a += (transformed.A(x + e, t)[j] - transformed.A(x - e, t)[j]) / (2 * h);
  }
  const Complex i(0, 1);
  const Complex magnetic_lap = lap - 2.0 * i * a.cast<Complex>().dot(grad) - i * div_a * u0 -
                               a.squaredNorm() * u0;
  return ut - i * (magnetic_lap + transformed.V(x, t) * u0 + transformed.F(x, t));
}

/// v(x, t) = 2^{-n/4} u~(x / sqrt 2, (1 + t) / 2), mapping a slice at tau in
/// [0, 1] to t = 2 tau - 1.
inline TransformResult to_symmetric_interval(const SampledWave& u_tilde,
                                             const TransformOptions& options = {}) {
  require(u_tilde.time >= 0.0 && u_tilde.time <= 1.0, ErrorKind::OutOfDomain,
          "slice time must lie in [0, 1]");
  const int n = u_tilde.grid.dimension;
  return detail::resample(u_tilde, 1.0 / std::sqrt(2.0), std::pow(2.0, -n / 4.0), 0.0,
                          2.0 * u_tilde.time - 1.0, options);
}

/// Inverse of to_symmetric_interval.
inline TransformResult from_symmetric_interval(const SampledWave& v,
                                               const TransformOptions& options = {}) {
  require(v.time >= -1.0 && v.time <= 1.0, ErrorKind::OutOfDomain, "slice time must lie in [-1, 1]");
  const int n = v.grid.dimension;
  return detail::resample(v, std::sqrt(2.0), std::pow(2.0, n / 4.0), 0.0, (1.0 + v.time) / 2.0,
                          options);
}

struct ScaledResult {
  TransformResult result;
  AlphaBeta scaled;  // alpha' = alpha / sqrt T, beta' = beta / sqrt T
};

/// u(x, t) = T^{n/4} v(sqrt(T) x, T t): a slice of v at time tau in [0, T]
/// becomes a slice of u at tau / T.
inline ScaledResult scale_to_unit_time(const SampledWave& v, double T, const AlphaBeta& ab,
                                       const TransformOptions& options = {}) {
  require(T > 0, ErrorKind::InvalidArgument, "time horizon must be positive");
  const int n = v.grid.dimension;
  ScaledResult out{detail::resample(v, std::sqrt(T), std::pow(T, n / 4.0), 0.0, v.time / T, options),
                   AlphaBeta{ab.alpha / std::sqrt(T), ab.beta / std::sqrt(T)}};
  return out;
}

}  // namespace hardylab::appell
