#pragma once

// Reduction of a static vector potential to the Cronstrom (radial) gauge
// x . A(x) = 0, and the checks that the field matrix B = DA - DA^t survives it.

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hardylab/error.hpp"
#include "hardylab/exact_example.hpp"
#include "hardylab/quadrature.hpp"

namespace hardylab::gauge {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A static vector potential on R^n. The Jacobian convention is
/// jacobian(x)(k, j) = d_j A^k(x).
struct PotentialField {
  int dimension = 2;
  std::function<Vector(const Vector&)> potential;
  std::optional<std::function<Matrix(const Vector&)>> jacobian;

  Vector operator()(const Vector& x) const { return potential(x); }
};

inline double jacobian_step(const Vector& x) { return 1e-5 * (1.0 + x.norm()); }

/// Analytic Jacobian when the field has one, central differences otherwise.
inline Matrix jacobian_at(const PotentialField& field, const Vector& x) {
  if (field.jacobian) return (*field.jacobian)(x);
  const int n = field.dimension;
  const double h = jacobian_step(x);
  Matrix jac(n, n);
  for (int j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = h;
    jac.col(j) = (field(x + e) - field(x - e)) / (2 * h);
  }
  return jac;
}

/// B_{jk} = d_j A^k - d_k A^j.
inline Matrix field_matrix(const PotentialField& field, const Vector& x) {
  const Matrix jac = jacobian_at(field, x);
  return jac.transpose() - jac;
}

/// Psi(x) = x^t B(x), i.e. Psi_k = sum_j x_j B_{jk}.
inline Vector x_t_B(const PotentialField& field, const Vector& x) {
  return field_matrix(field, x).transpose() * x;
}

namespace detail {

inline void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw Error(ErrorKind::NonFiniteSample, std::string(what) + " is not finite");
}

}  // namespace detail

/// phi(x) = x . int_0^1 A(sx) ds with an n-point Gauss rule on [0, 1].
inline double compute_phi(const PotentialField& field, const Vector& x, int nodes = 64) {
  const auto rule = quad::gauss_legendre<double>(nodes);
  Vector mean = Vector::Zero(field.dimension);
  for (int i = 0; i < nodes; ++i) {
    const double s = 0.5 * (rule.nodes[i] + 1.0);
    const Vector a = field(s * x);
    detail::check_finite(a, "A on the segment");
    mean += 0.5 * rule.weights[i] * a;
  }
  return x.dot(mean);
}

/// Gauge-reduced potential A~(x) = int_0^1 s x^t B(sx) ds, fixed rule.
inline Vector cronstrom_transform(const PotentialField& field, const Vector& x, int nodes) {
  const auto rule = quad::gauss_legendre<double>(nodes);
  Vector out = Vector::Zero(field.dimension);
  for (int i = 0; i < nodes; ++i) {
    const double s = 0.5 * (rule.nodes[i] + 1.0);
    const Matrix b = field_matrix(field, s * x);
    const Vector contracted = b.transpose() * x;
    detail::check_finite(contracted, "x^t B on the segment");
    out += 0.5 * rule.weights[i] * s * contracted;
  }
  return out;
}

struct TransformOptions {
  int initial_nodes = 64;
  int max_nodes = 4096;
  double tolerance = 1e-10;
};

/// Node count doubled from `initial_nodes` until successive values agree.
inline Vector cronstrom_transform(const PotentialField& field, const Vector& x,
                                  const TransformOptions& options = {}) {
  int nodes = options.initial_nodes;
  Vector previous = cronstrom_transform(field, x, nodes);
  while (nodes < options.max_nodes) {
    nodes *= 2;
    Vector next = cronstrom_transform(field, x, nodes);
    if ((next - previous).lpNorm<Eigen::Infinity>() <= options.tolerance * (1.0 + next.norm())) {
      return next;
    }
    previous = std::move(next);
  }
  throw Error(ErrorKind::QuadratureNotConverged, "gauge quadrature did not settle");
}

/// Independent route: A(x) - grad phi(x), grad phi by central differences.
inline Vector cronstrom_via_phi(const PotentialField& field, const Vector& x, int nodes = 64) {
  const int n = field.dimension;
  const double h = jacobian_step(x);
  Vector grad(n);
  for (int j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = h;
    grad[j] = (compute_phi(field, x + e, nodes) - compute_phi(field, x - e, nodes)) / (2 * h);
  }
  return field(x) - grad;
}

/// The transformed potential as a field in its own right (no analytic Jacobian).
inline PotentialField cronstrom_field(const PotentialField& field, TransformOptions options = {}) {
  PotentialField out;
  out.dimension = field.dimension;
  out.potential = [field, options](const Vector& x) { return cronstrom_transform(field, x, options); };
  return out;
}

struct GaugeReport {
  double max_radial_component = 0;   // max |x . A~(x)|
  double max_field_deviation = 0;    // max entrywise |B~(x) - B(x)|
  std::size_t samples = 0;
};

inline GaugeReport verify_gauge(const PotentialField& original, const PotentialField& transformed,
                                std::span<const Vector> samples) {
  GaugeReport report;
  report.samples = samples.size();
  for (const auto& x : samples) {
    const Vector a = transformed(x);
    report.max_radial_component = std::max(report.max_radial_component, std::abs(x.dot(a)));
    const Matrix deviation = field_matrix(transformed, x) - field_matrix(original, x);
    report.max_field_deviation =
        std::max(report.max_field_deviation, deviation.cwiseAbs().maxCoeff());
  }
  return report;
}

// ---------------------------------------------------------------------------
// Field presets.

inline PotentialField landau(double b0) {
  PotentialField f;
  f.dimension = 2;
  f.potential = [b0](const Vector& x) { return Vector{{0.0, b0 * x[0]}}; };
  f.jacobian = [b0](const Vector&) {
    Matrix j = Matrix::Zero(2, 2);
    j(1, 0) = b0;
    return j;
  };
  return f;
}

inline PotentialField symmetric(double b0) {
  PotentialField f;
  f.dimension = 2;
  f.potential = [b0](const Vector& x) { return Vector{{-0.5 * b0 * x[1], 0.5 * b0 * x[0]}}; };
  f.jacobian = [b0](const Vector&) {
    Matrix j = Matrix::Zero(2, 2);
    j(0, 1) = -0.5 * b0;
    j(1, 0) = 0.5 * b0;
    return j;
  };
  return f;
}

/// grad chi for chi(x, y) = x^2 y + sin(x) cos(y).
inline PotentialField gradient() {
  PotentialField f;
  f.dimension = 2;
  f.potential = [](const Vector& x) {
    return Vector{{2 * x[0] * x[1] + std::cos(x[0]) * std::cos(x[1]),
                   x[0] * x[0] - std::sin(x[0]) * std::sin(x[1])}};
  };
  f.jacobian = [](const Vector& x) {
    Matrix j(2, 2);
    j(0, 0) = 2 * x[1] - std::sin(x[0]) * std::cos(x[1]);
    j(0, 1) = 2 * x[0] - std::cos(x[0]) * std::sin(x[1]);
    j(1, 0) = 2 * x[0] - std::cos(x[0]) * std::sin(x[1]);
    j(1, 1) = -std::sin(x[0]) * std::cos(x[1]);
    return j;
  };
  return f;
}

/// The singular three-dimensional example potential frozen at time t.
inline PotentialField example_at_time(double t, double k,
                                      example::Variant variant = example::Variant::Published) {
  PotentialField f;
  f.dimension = 3;
  f.potential = [t, k, variant](const Vector& x) -> Vector {
    return example::eval_potential_A(example::Point3(x[0], x[1], x[2]), t, k, variant);
  };
  // A = q w with q = g / (rho^2 (1 + r^2)), w = (x z^2, y z^2, -z rho^2). The
  // Jacobian is evaluated in closed form because radial segments approach the
  // axis near the origin, where difference quotients lose all accuracy.
  const double g = (variant == example::Variant::Published ? 1.0 : -1.0) * 2 * k * t / (1 + t * t);
  f.jacobian = [g](const Vector& p) -> Matrix {
    const double x = p[0], y = p[1], z = p[2];
    const double rho2 = x * x + y * y, r2 = rho2 + z * z;
    if (rho2 == 0.0) throw Error(ErrorKind::OnAxis, "Jacobian requested on the z-axis");
    const double q = g / (rho2 * (1 + r2));
    const Eigen::Vector3d w(x * z * z, y * z * z, -z * rho2);
    const Eigen::Vector3d grad_q = -q * Eigen::Vector3d(2 * x / rho2 + 2 * x / (1 + r2),
                                                        2 * y / rho2 + 2 * y / (1 + r2), 2 * z / (1 + r2));
    Eigen::Matrix3d dw;  // dw(k, j) = d_j w_k
    dw << z * z, 0, 2 * x * z,
          0, z * z, 2 * y * z,
          -2 * x * z, -2 * y * z, -rho2;
    return w * grad_q.transpose() + q * dw;
  };
  return f;
}

/// A^k(x) = c_k + sum_j L_kj x_j + sum_{j,l} Q_kjl x_j x_l with coefficients
/// drawn uniformly from [-1, 1].
inline PotentialField random_quadratic(int dimension, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const int n = dimension;
  Vector c(n);
  Matrix lin(n, n);
  std::vector<Matrix> quadratic(n, Matrix(n, n));
  for (int k = 0; k < n; ++k) c[k] = coef(rng);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) lin(k, j) = coef(rng);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) quadratic[k](j, l) = coef(rng);
  PotentialField f;
  f.dimension = n;
  f.potential = [=](const Vector& x) {
    Vector out = c + lin * x;
    for (int k = 0; k < n; ++k) out[k] += x.dot(quadratic[k] * x);
    return out;
  };
  f.jacobian = [=](const Vector& x) {
    Matrix j = lin;
    for (int k = 0; k < n; ++k) j.row(k) += ((quadratic[k] + quadratic[k].transpose()) * x).transpose();
    return j;
  };
  return f;
}

/// Deterministic samples in the box [-half_width, half_width]^n.
inline std::vector<Vector> box_samples(int dimension, double half_width, std::size_t count,
                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-half_width, half_width);
  std::vector<Vector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Vector x(dimension);
    for (int j = 0; j < dimension; ++j) x[j] = coord(rng);
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace hardylab::gauge
