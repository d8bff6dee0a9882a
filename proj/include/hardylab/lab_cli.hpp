#pragma once

// Command-line front end: subcommands, flat key=value config files, CSV and
// JSON outputs, and the exit-code contract
//   0 pass, 1 check failed, 2 bad input, 3 iteration budget exceeded.

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hardylab/hardylab.hpp"

namespace hardylab::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kBadInput = 2, kBudgetExceeded = 3 };

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<double> row) {
    require(row.size() == header_.size(), ErrorKind::InvalidArgument, "CSV row width mismatch");
    rows_.push_back(std::move(row));
  }

  void write(std::ostream& os) const {
    for (std::size_t j = 0; j < header_.size(); ++j) os << (j ? "," : "") << header_[j];
    os << '\n';
    for (const auto& row : rows_) {
      for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << format_double(row[j]);
      os << '\n';
    }
  }

  void write_file(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open " + path + " for writing");
    write(f);
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

// ---------------------------------------------------------------------------
// Config files.

struct ConfigEntry {
  std::string key;
  std::string value;
};

/// Parses `key = value` lines; '#' starts a comment, blank lines are skipped.
inline std::vector<ConfigEntry> parse_config(std::istream& in, const std::string& origin) {
  std::vector<ConfigEntry> out;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::InvalidArgument,
                  origin + ":" + std::to_string(number) + ": expected key=value");
    }
    ConfigEntry entry{trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
    if (entry.key.empty()) {
      throw Error(ErrorKind::InvalidArgument, origin + ":" + std::to_string(number) + ": empty key");
    }
    out.push_back(std::move(entry));
  }
  return out;
}

inline std::vector<ConfigEntry> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot read config file " + path);
  return parse_config(f, path);
}

/// HARDYLAB_THREADS, when set, must be a positive integer.
inline int thread_cap() {
  const char* env = std::getenv("HARDYLAB_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  int n = 0;
  const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), n);
  if (ec != std::errc() || *ptr != '\0' || n < 1) {
    throw Error(ErrorKind::InvalidArgument, "HARDYLAB_THREADS must be a positive integer");
  }
  return n;
}

// ---------------------------------------------------------------------------
// Subcommand parameters.

struct VerifyExampleArgs {
  double k = 2.0;
  int samples = 100;
  double h = 1e-3;
  std::uint64_t seed = 1;
  double threshold = 1e-6;
  std::string variant = "sign-consistent";
};

struct IterateArgs {
  double mu = 0.1;
  int nodes = 513;
  double tol = 1e-8;
  int k_max = 20000;
  int every = 1;
};

struct HardyArgs {
  double alpha = 1.0;
  double beta = 1.0;
  int nodes = 101;
};

struct EvolveArgs {
  std::string preset = "free-gaussian";
  int dim = 1;
  double L = 20.0;
  int N = 2048;
  double dt = 2e-4;
  double t0 = -1.0;
  double t1 = 1.0;
  int record_every = 50;
  double a0 = 0.25;
  double mu = 0.05;
  std::string weight = "constant";
  double c = 1.0;
  double m = 1.0;
  double b0 = 1.0;
  double tol = 1e-6;
};

struct GaugeArgs {
  std::string preset = "landau";
  double b0 = 1.0;
  double t = 0.5;
  double k = 2.0;
  std::string variant = "published";
  int samples = 200;
  double half_width = 3.0;
  std::uint64_t seed = 1;
  int dim = 3;
  double tol = 1e-8;
  double field_tol = 1e-6;
};

struct AppellArgs {
  std::string preset = "free-gaussian";
  double alpha = 2.0;
  double beta = 3.0;
  double a0 = 0.25;
  double c = 1.0;
  double L = 20.0;
  int N = 2048;
  double h = 1e-3;
  int samples = 50;
  std::uint64_t seed = 1;
  double tol = 1e-6;
};

struct Outputs {
  std::string csv;     // empty: no CSV
  std::string report;  // empty: JSON to stdout
};

// ---------------------------------------------------------------------------
// Commands. Each fills `report` and returns an exit code; errors propagate as
// hardylab::Error.

inline example::Variant parse_variant(const std::string& name) {
  if (name == "published") return example::Variant::Published;
  if (name == "sign-consistent") return example::Variant::SignConsistent;
  throw Error(ErrorKind::InvalidArgument, "unknown variant '" + name + "'");
}

inline int cmd_verify_example(const VerifyExampleArgs& args, Json& report, std::optional<CsvTable>& csv) {
  example::ExampleParams::checked(args.k);
  require(args.samples >= 1, ErrorKind::InvalidArgument, "samples must be >= 1");
  require(args.h > 0 && args.h < 0.01, ErrorKind::InvalidArgument, "h must lie in (0, 0.01)");
  const auto variant = parse_variant(args.variant);

  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> coord(-3.0, 3.0), time(-1.0, 1.0);
  std::vector<example::Point3> points;
  std::vector<double> times;
  csv.emplace(std::vector<std::string>{"x", "y", "z", "t", "rel_residual"});
  double max_rel = 0;
  while (points.size() < static_cast<std::size_t>(args.samples)) {
    const example::Point3 p(coord(rng), coord(rng), coord(rng));
    if (p.norm() > 3.0 || std::sqrt(example::cylinder_radius_sq(p)) < 0.05) continue;
    const double t = time(rng);
    const double rel = example::pde_residual(p, t, args.k, args.h, variant).relative();
    max_rel = std::max(max_rel, rel);
    csv->add({p.x(), p.y(), p.z(), t, rel});
    points.push_back(p);
    times.push_back(t);
  }
  const double order = example::residual_order(points, times, args.k, args.h, variant);
  const bool pass = max_rel < args.threshold;
  report["k"] = args.k;
  report["samples"] = args.samples;
  report["h"] = args.h;
  report["seed"] = args.seed;
  report["variant"] = args.variant;
  report["max_rel_residual"] = max_rel;
  report["order_estimate"] = order;
  report["norm_t_minus1"] = example::critical_weighted_norm(-1.0, args.k);
  report["norm_t_plus1"] = example::critical_weighted_norm(1.0, args.k);
  report["threshold"] = args.threshold;
  report["pass"] = pass;
  return pass ? kPass : kCheckFailed;
}

inline int cmd_iterate(const IterateArgs& args, Json& report, std::optional<CsvTable>& csv,
                       bool want_csv) {
  require(args.mu > 0, ErrorKind::InvalidArgument, "mu must be positive");
  require(args.every >= 1, ErrorKind::InvalidArgument, "every must be >= 1");
  convexity::IterationOptions<double> opts;
  opts.nodes = args.nodes;
  opts.tolerance = args.tol;
  opts.max_steps = args.k_max;
  opts.record_history = want_csv;
  const auto result = convexity::run_iteration(args.mu, opts);

  report["mu"] = args.mu;
  report["nodes"] = args.nodes;
  report["tol"] = args.tol;
  report["verdict"] = std::string(to_string(result.verdict));
  report["k_final"] = result.k;
  report["last_gate"] = result.last_gate;
  report["last_increment"] = result.last_increment;
  if (result.verdict == convexity::Verdict::Converged && args.mu <= 0.125) {
    const double R = convexity::smallest_root_R(args.mu);
    const auto limit = convexity::limit_profile(args.mu, result.profile.grid());
    report["R"] = R;
    report["sup_error_vs_closed_form"] = convexity::sup_distance(result.profile.samples(), limit.samples());
  }

  if (want_csv) {
    std::vector<std::size_t> keep;
    for (std::size_t k = 0; k < result.history.size(); ++k) {
      if (k % args.every == 0 || k + 1 == result.history.size()) keep.push_back(k);
    }
    std::vector<std::string> header{"t"};
    for (auto k : keep) header.push_back("a_" + std::to_string(k + 1));
    csv.emplace(header);
    const auto& grid = result.profile.grid();
    for (int i = 0; i < grid.nodes; ++i) {
      std::vector<double> row{grid.t(i)};
      for (auto k : keep) row.push_back(result.history[k][i]);
      csv->add(std::move(row));
    }
  }
  return kPass;
}

inline int cmd_hardy(const HardyArgs& args, Json& report, std::optional<CsvTable>& csv) {
  require(args.alpha > 0 && args.beta > 0 && std::isfinite(args.alpha) && std::isfinite(args.beta),
          ErrorKind::InvalidArgument, "alpha and beta must be positive");
  require(args.nodes >= 2, ErrorKind::InvalidArgument, "nodes must be >= 2");
  const auto verdict = convexity::hardy_verdict(args.alpha, args.beta);
  report["alpha"] = args.alpha;
  report["beta"] = args.beta;
  report["mu"] = appell::mu_of({args.alpha, args.beta});
  report["verdict"] = verdict.must_vanish ? "MustVanish" : "Profile";
  // A vanishing verdict has no profile; its CSV is the header alone.
  csv.emplace(std::vector<std::string>{"t", "a"});
  if (verdict.profile) {
    const auto& a = *verdict.profile;
    report["R"] = a.R;
    report["a_endpoints"] = {a(0.0), a(1.0)};
    for (int i = 0; i < args.nodes; ++i) {
      const double t = static_cast<double>(i) / (args.nodes - 1);
      csv->add({t, a(t)});
    }
  }
  return kPass;
}

// Evolution presets shared by `evolve` and `convexity`.
struct EvolutionSetup {
  SampledWave initial;
  propagator::EvolutionPotentials potentials;
  propagator::GridSpec spec;
  std::function<double(double)> weight;
  bool closed_form = false;  // free evolution of the Gaussian with constant weight
};

inline EvolutionSetup evolution_setup(const EvolveArgs& args) {
  const auto grid = UniformGrid::checked(args.dim, args.L, args.N);
  require(args.t1 > args.t0, ErrorKind::InvalidArgument, "t1 must exceed t0");
  require(args.a0 > 0, ErrorKind::InvalidArgument, "a0 must be positive");
  require(args.mu >= 0, ErrorKind::InvalidArgument, "mu must be nonnegative");
  require(args.record_every >= 1, ErrorKind::InvalidArgument, "record-every must be >= 1");
  const double span = args.t1 - args.t0;
  const int steps = static_cast<int>(std::llround(span / args.dt));
  require(std::abs(steps * args.dt - span) <= 1e-9 * span, ErrorKind::InvalidArgument,
          "t1 - t0 must be a whole number of steps");
  EvolutionSetup setup{propagator::free_gaussian_wave(grid, args.a0, args.t0), {},
                       propagator::GridSpec::checked(grid, args.dt, steps), {}, false};

  const double c = args.c, m = args.m, b0 = args.b0;
  if (args.preset == "free-gaussian") {
    setup.closed_form = args.dim == 1 && args.weight == "constant";
  } else if (args.preset == "constant-potential") {
    setup.potentials.V = [c](double, double, double) { return Complex(c, 0.0); };
  } else if (args.preset == "absorbing") {
    setup.potentials.V = [m](double x, double y, double) {
      return Complex(0.0, -m * std::exp(-(x * x + y * y) / 4));
    };
  } else if (args.preset == "magnetic") {
    require(args.dim == 2, ErrorKind::InvalidArgument, "the magnetic preset needs dim = 2");
    // Symmetric gauge of a uniform field, cut off smoothly so A stays bounded.
    setup.potentials.A = [b0](double x, double y, double) {
      const double damp = std::exp(-(x * x + y * y) / 50);
      return std::array<double, 2>{-0.5 * b0 * y * damp, 0.5 * b0 * x * damp};
    };
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown evolution preset '" + args.preset + "'");
  }

  if (args.weight == "constant") {
    const double a = args.mu;
    setup.weight = [a](double) { return a; };
  } else if (args.weight == "limit") {
    // Limit profile of the iteration for rate mu, stretched over [t0, t1].
    const auto grid_w = convexity::NodeGrid<double>::symmetric(513);
    setup.weight = propagator::profile_weight(convexity::limit_profile(args.mu, grid_w), args.t0, args.t1);
  } else {
    throw Error(ErrorKind::InvalidArgument, "weight must be 'constant' or 'limit'");
  }
  return setup;
}

struct EvolutionRun {
  propagator::EvolutionTrace trace;
  double scan = 0;
};

inline EvolutionRun run_evolution(const EvolveArgs& args, Json& report, std::optional<CsvTable>& csv) {
  const auto setup = evolution_setup(args);
  propagator::EvolveOptions opts;
  opts.record_every = args.record_every;
  const auto family = propagator::evolve_cn(setup.initial, setup.potentials, setup.spec, opts);
  EvolutionRun run{propagator::trace_H(family, setup.weight, false), 0};
  const auto& tr = run.trace;
  run.scan = tr.H.size() >= 3 ? propagator::log_convexity_scan(tr) : 0.0;

  csv.emplace(std::vector<std::string>{"t", "H", "norm2", "admissible_flag"});
  bool all_admissible = true;
  double max_norm_drift = 0, max_closed_form = 0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    csv->add({tr.times[i], tr.H[i], tr.norm2[i], tr.admissible[i] ? 1.0 : 0.0});
    all_admissible = all_admissible && tr.admissible[i];
    max_norm_drift = std::max(max_norm_drift, std::abs(tr.norm2[i] - tr.norm2.front()) / tr.norm2.front());
    if (setup.closed_form && tr.admissible[i]) {
      const double exact = propagator::free_gaussian_H(args.a0, args.mu, tr.times[i]);
      max_closed_form = std::max(max_closed_form, std::abs(tr.H[i] - exact) / exact);
    }
  }
  report["preset"] = args.preset;
  report["dim"] = args.dim;
  report["L"] = args.L;
  report["N"] = args.N;
  report["dt"] = args.dt;
  report["steps"] = setup.spec.steps;
  report["a0"] = args.a0;
  report["weight"] = args.weight;
  report["mu"] = args.mu;
  report["samples"] = tr.times.size();
  report["min_second_difference"] = run.scan;
  report["all_admissible"] = all_admissible;
  report["max_norm2_change"] = max_norm_drift;
  if (setup.closed_form) report["max_rel_error_vs_closed_form"] = max_closed_form;
  return run;
}

inline int cmd_evolve(const EvolveArgs& args, Json& report, std::optional<CsvTable>& csv) {
  run_evolution(args, report, csv);
  return kPass;
}

/// Log-convexity along the trace plus the interpolation bound with
/// T = M = N = 0 and theta(t) = (t1 - t)/(t1 - t0).
inline int cmd_convexity(const EvolveArgs& args, Json& report, std::optional<CsvTable>& csv) {
  const auto run = run_evolution(args, report, csv);
  const auto& tr = run.trace;
  const std::size_t n = tr.times.size();
  std::vector<double> zeros(n, 0.0), th(n);
  for (std::size_t i = 0; i < n; ++i) th[i] = (tr.times.back() - tr.times[i]) / (tr.times.back() - tr.times.front());
  const double slack = convexity::convexity_bound_check(tr.H, zeros, zeros, 0.0, th, 0.0);
  const bool admissible = report["all_admissible"].get<bool>();
  const bool pass = admissible && run.scan >= -args.tol && slack >= -args.tol;
  report["interpolation_slack"] = slack;
  report["tol"] = args.tol;
  report["pass"] = pass;
  return pass ? kPass : kCheckFailed;
}

inline int cmd_gauge_check(const GaugeArgs& args, Json& report, std::optional<CsvTable>& csv) {
  require(args.samples >= 1, ErrorKind::InvalidArgument, "samples must be >= 1");
  require(args.half_width > 0, ErrorKind::InvalidArgument, "half-width must be positive");
  gauge::PotentialField field;
  bool off_axis_only = false;
  if (args.preset == "landau") {
    field = gauge::landau(args.b0);
  } else if (args.preset == "symmetric") {
    field = gauge::symmetric(args.b0);
  } else if (args.preset == "gradient") {
    field = gauge::gradient();
  } else if (args.preset == "theorem1-at-t") {
    example::ExampleParams::checked(args.k);
    field = gauge::example_at_time(args.t, args.k, parse_variant(args.variant));
    off_axis_only = true;
  } else if (args.preset == "random-quadratic") {
    require(args.dim >= 2 && args.dim <= 6, ErrorKind::InvalidArgument, "dim must lie in [2, 6]");
    field = gauge::random_quadratic(args.dim, args.seed);
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown gauge preset '" + args.preset + "'");
  }

  std::vector<gauge::Vector> samples;
  std::uint64_t draw_seed = args.seed;
  while (samples.size() < static_cast<std::size_t>(args.samples)) {
    for (auto& x : gauge::box_samples(field.dimension, args.half_width, args.samples, draw_seed++)) {
      // The singular example is sampled away from the z-axis.
      if (off_axis_only && std::hypot(x[0], x[1]) < 0.2) continue;
      if (samples.size() < static_cast<std::size_t>(args.samples)) samples.push_back(std::move(x));
    }
  }

  const auto transformed = gauge::cronstrom_field(field);
  const auto gr = gauge::verify_gauge(field, transformed, samples);
  double route_gap = 0;
  std::vector<std::string> header;
  for (int j = 0; j < field.dimension; ++j) header.push_back("x" + std::to_string(j + 1));
  for (int j = 0; j < field.dimension; ++j) header.push_back("A" + std::to_string(j + 1));
  header.push_back("x_dot_A");
  csv.emplace(header);
  for (const auto& x : samples) {
    const auto a = transformed(x);
    route_gap = std::max(route_gap, (a - gauge::cronstrom_via_phi(field, x)).lpNorm<Eigen::Infinity>());
    std::vector<double> row(x.data(), x.data() + x.size());
    row.insert(row.end(), a.data(), a.data() + a.size());
    row.push_back(x.dot(a));
    csv->add(std::move(row));
  }
  const bool pass = gr.max_radial_component < args.tol && gr.max_field_deviation < args.field_tol;
  report["preset"] = args.preset;
  report["dimension"] = field.dimension;
  report["samples"] = gr.samples;
  report["seed"] = args.seed;
  report["max_radial_component"] = gr.max_radial_component;
  report["max_field_deviation"] = gr.max_field_deviation;
  report["max_gradient_route_difference"] = route_gap;
  report["pass"] = pass;
  return pass ? kPass : kCheckFailed;
}

inline int cmd_appell_check(const AppellArgs& args, Json& report, std::optional<CsvTable>& csv) {
  const auto ab = appell::AlphaBeta::checked(args.alpha, args.beta);
  require(args.a0 > 0, ErrorKind::InvalidArgument, "a0 must be positive");
  require(args.samples >= 1, ErrorKind::InvalidArgument, "samples must be >= 1");
  double c = 0;
  if (args.preset == "free-gaussian") {
    c = 0;
  } else if (args.preset == "constant-potential") {
    c = args.c;
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown appell preset '" + args.preset + "'");
  }
  // Source: u(x, s) = e^{ics} times the free Gaussian, which solves
  // d_s u = i(u_xx + c u).
  const double a0 = args.a0;
  appell::WaveFunction u = [a0, c](const Eigen::VectorXd& x, double s) {
    return std::polar(1.0, c * s) * propagator::free_gaussian_oracle(a0, x[0], s);
  };
  const auto grid = UniformGrid::checked(1, args.L, args.N);
  auto slice = [&](double s) {
    return SampledWave::from_function(grid, s, [&](double x, double) { return u(Eigen::VectorXd::Constant(1, x), s); });
  };

  // Transformed slices against the pointwise transform, and the norm chain.
  const auto u_tilde = appell::appell_function(u, ab, 1);
  csv.emplace(std::vector<std::string>{"t", "s", "node_deviation", "norm_rel_diff"});
  double node_dev = 0, norm_dev = 0;
  for (int i = 0; i <= 10; ++i) {
    const double t = i / 10.0;
    const double s = ab.source_time(t);
    const auto src = slice(s);
    const auto out = appell::appell_wave(src, ab, t).wave;
    double dev = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const auto p = grid.position(j);
      dev = std::max(dev, std::abs(out.values[j] - u_tilde(Eigen::VectorXd::Constant(1, p[0]), t)));
    }
    const double nd = std::abs(weighted_norm(out) - weighted_norm(src)) / weighted_norm(src);
    node_dev = std::max(node_dev, dev);
    norm_dev = std::max(norm_dev, nd);
    csv->add({t, s, dev, nd});
  }
  const auto u0 = slice(0.0);
  const auto ut0 = appell::appell_wave(u0, ab).wave;
  const double w_lhs = weighted_norm(ut0, 1.0 / (ab.alpha * ab.beta));
  const double w_rhs = weighted_norm(u0, 1.0 / (ab.beta * ab.beta));
  const double weighted_dev = std::abs(w_lhs - w_rhs) / w_rhs;

  // The transformed closed form against the transformed equation.
  appell::Potentials src_pot;
  src_pot.A = [](const Eigen::VectorXd& x, double) { return Eigen::VectorXd::Zero(x.size()); };
  src_pot.V = [c](const Eigen::VectorXd&, double) { return Complex(c, 0.0); };
  src_pot.F = [](const Eigen::VectorXd&, double) { return Complex(0.0, 0.0); };
  const auto pot = appell::appell_potentials(src_pot, ab, 1);
  std::mt19937_64 rng(args.seed);
  std::uniform_real_distribution<double> xs(-3.0, 3.0), ts(0.05, 0.95);
  double max_residual = 0;
  for (int i = 0; i < args.samples; ++i) {
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, xs(rng));
    const double t = ts(rng);
    const double scale = std::abs(u_tilde(x, t)) + 1e-300;
    max_residual = std::max(max_residual, std::abs(appell::appell_residual(u_tilde, pot, x, t, args.h)) / scale);
  }
  const bool pass = weighted_dev < args.tol && norm_dev < args.tol && node_dev < args.tol;
  report["preset"] = args.preset;
  report["alpha"] = args.alpha;
  report["beta"] = args.beta;
  report["mu"] = appell::mu_of(ab);
  report["max_node_deviation"] = node_dev;
  report["max_norm_rel_diff"] = norm_dev;
  report["weighted_identity_rel_diff"] = weighted_dev;
  report["max_rel_residual"] = max_residual;
  report["h"] = args.h;
  report["pass"] = pass;
  return pass ? kPass : kCheckFailed;
}

// ---------------------------------------------------------------------------
// Entry point.

namespace detail {

inline bool flag_given(const std::vector<std::string>& args, const std::string& name) {
  const std::string flag = "--" + name;
  for (const auto& a : args) {
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  }
  return false;
}

/// Pulls `--config PATH` / `--config=PATH` out of the argument list.
inline std::optional<std::string> take_config(std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw Error(ErrorKind::InvalidArgument, "--config needs a path");
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      --i;
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      --i;
    }
  }
  return path;
}

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IterationBudgetExceeded: return kBudgetExceeded;
    case ErrorKind::InvalidArgument:
    case ErrorKind::UnknownPreset:
    case ErrorKind::OnAxis:
    case ErrorKind::OutOfDomain:
    case ErrorKind::NoRealRoot: return kBadInput;
    default: return kCheckFailed;
  }
}

}  // namespace detail

/// Runs one invocation. `argv`-style arguments exclude the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical laboratory for magnetic Schroedinger uniqueness estimates", "hardylab"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  Outputs outputs;
  auto add_outputs = [&](CLI::App* sub) {
    sub->add_option("--out", outputs.csv, "CSV output path");
    sub->add_option("--report", outputs.report, "JSON report path (default: stdout)");
  };

  VerifyExampleArgs ve;
  auto* s_ve = app.add_subcommand("verify-example", "Residual and critical norms of the closed-form example");
  s_ve->add_option("--k", ve.k, "Exponent k > 3/2");
  s_ve->add_option("--samples", ve.samples, "Random off-axis sample points");
  s_ve->add_option("--h", ve.h, "Finite-difference step");
  s_ve->add_option("--seed", ve.seed, "Sampling seed");
  s_ve->add_option("--threshold", ve.threshold, "Pass threshold for the relative residual");
  s_ve->add_option("--variant", ve.variant, "published | sign-consistent");
  add_outputs(s_ve);

  IterateArgs it;
  auto* s_it = app.add_subcommand("iterate", "Weight-profile fixed-point iteration");
  s_it->add_option("--mu", it.mu, "Starting constant profile");
  s_it->add_option("--nodes", it.nodes, "Odd node count on [-1, 1]");
  s_it->add_option("--tol", it.tol, "Sup-norm increment for convergence");
  s_it->add_option("--k-max", it.k_max, "Profile budget");
  s_it->add_option("--every", it.every, "Write every n-th profile to the CSV");
  add_outputs(s_it);

  HardyArgs hd;
  auto* s_hd = app.add_subcommand("hardy", "Verdict and weight profile for decay scales alpha, beta");
  s_hd->add_option("--alpha", hd.alpha, "Decay scale at t = 1");
  s_hd->add_option("--beta", hd.beta, "Decay scale at t = 0");
  s_hd->add_option("--nodes", hd.nodes, "Profile samples in the CSV");
  add_outputs(s_hd);

  EvolveArgs ev;
  auto add_evolve = [&](CLI::App* sub) {
    sub->add_option("--preset", ev.preset, "free-gaussian | constant-potential | absorbing | magnetic");
    sub->add_option("--dim", ev.dim, "Space dimension (1 or 2)");
    sub->add_option("--L", ev.L, "Grid half-extent");
    sub->add_option("--N", ev.N, "Points per axis");
    sub->add_option("--dt", ev.dt, "Time step");
    sub->add_option("--t0", ev.t0, "Start time");
    sub->add_option("--t1", ev.t1, "End time");
    sub->add_option("--record-every", ev.record_every, "Steps between trace samples");
    sub->add_option("--a0", ev.a0, "Initial Gaussian rate at t0");
    sub->add_option("--mu", ev.mu, "Weight exponent (constant) or profile rate (limit)");
    sub->add_option("--weight", ev.weight, "constant | limit");
    sub->add_option("--c", ev.c, "Constant potential value");
    sub->add_option("--m", ev.m, "Absorption strength");
    sub->add_option("--b0", ev.b0, "Magnetic field strength");
    sub->add_option("--tol", ev.tol, "Tolerance for the convexity checks");
    add_outputs(sub);
  };
  auto* s_ev = app.add_subcommand("evolve", "Crank-Nicolson evolution and weighted-norm trace");
  add_evolve(s_ev);
  auto* s_cv = app.add_subcommand("convexity", "Log-convexity checks on a weighted-norm trace");
  add_evolve(s_cv);

  GaugeArgs gg;
  auto* s_gg = app.add_subcommand("gauge-check", "Radial-gauge transform of a vector potential");
  s_gg->add_option("--preset", gg.preset, "landau | symmetric | gradient | theorem1-at-t | random-quadratic");
  s_gg->add_option("--b0", gg.b0, "Field strength");
  s_gg->add_option("--t", gg.t, "Time slice (theorem1-at-t)");
  s_gg->add_option("--k", gg.k, "Exponent (theorem1-at-t)");
  s_gg->add_option("--variant", gg.variant, "published | sign-consistent");
  s_gg->add_option("--samples", gg.samples, "Sample points");
  s_gg->add_option("--half-width", gg.half_width, "Sampling box half-width");
  s_gg->add_option("--seed", gg.seed, "Sampling and coefficient seed");
  s_gg->add_option("--dim", gg.dim, "Dimension (random-quadratic)");
  s_gg->add_option("--tol", gg.tol, "Pass threshold for max |x . A~|");
  s_gg->add_option("--field-tol", gg.field_tol, "Pass threshold for the field deviation");
  add_outputs(s_gg);

  AppellArgs ap;
  auto* s_ap = app.add_subcommand("appell-check", "Pseudoconformal transform identities");
  s_ap->add_option("--preset", ap.preset, "free-gaussian | constant-potential");
  s_ap->add_option("--alpha", ap.alpha, "alpha > 0");
  s_ap->add_option("--beta", ap.beta, "beta > 0");
  s_ap->add_option("--a0", ap.a0, "Gaussian rate of the source at s = 0");
  s_ap->add_option("--c", ap.c, "Constant potential value");
  s_ap->add_option("--L", ap.L, "Grid half-extent");
  s_ap->add_option("--N", ap.N, "Grid points");
  s_ap->add_option("--h", ap.h, "Finite-difference step for the residual");
  s_ap->add_option("--samples", ap.samples, "Residual sample points");
  s_ap->add_option("--seed", ap.seed, "Sampling seed");
  s_ap->add_option("--tol", ap.tol, "Pass threshold for the identities");
  add_outputs(s_ap);

  try {
    Eigen::setNbThreads(thread_cap());
    // Config entries go first so that explicit flags take precedence.
    if (const auto path = detail::take_config(args)) {
      CLI::App* sub = nullptr;
      for (const auto& a : args) {
        if (!a.empty() && a[0] != '-') {
          sub = app.get_subcommand_no_throw(a);
          if (sub != nullptr) break;
        }
      }
      if (sub == nullptr) throw Error(ErrorKind::InvalidArgument, "--config needs a subcommand");
      std::vector<std::string> injected;
      for (const auto& entry : read_config_file(*path)) {
        if (sub->get_option_no_throw("--" + entry.key) == nullptr) {
          throw Error(ErrorKind::InvalidArgument, "unknown config key '" + entry.key + "'");
        }
        if (!detail::flag_given(args, entry.key)) {
          injected.push_back("--" + entry.key);
          injected.push_back(entry.value);
        }
      }
      const auto pos = std::find(args.begin(), args.end(), sub->get_name());
      args.insert(pos + 1, injected.begin(), injected.end());
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }

  Json report;
  report["schema_version"] = kSchemaVersion;
  std::optional<CsvTable> csv;
  int code = kPass;
  try {
    if (s_ve->parsed()) {
      report["command"] = "verify-example";
      code = cmd_verify_example(ve, report, csv);
    } else if (s_it->parsed()) {
      report["command"] = "iterate";
      code = cmd_iterate(it, report, csv, !outputs.csv.empty());
    } else if (s_hd->parsed()) {
      report["command"] = "hardy";
      code = cmd_hardy(hd, report, csv);
    } else if (s_ev->parsed()) {
      report["command"] = "evolve";
      code = cmd_evolve(ev, report, csv);
    } else if (s_cv->parsed()) {
      report["command"] = "convexity";
      code = cmd_convexity(ev, report, csv);
    } else if (s_gg->parsed()) {
      report["command"] = "gauge-check";
      code = cmd_gauge_check(gg, report, csv);
    } else if (s_ap->parsed()) {
      report["command"] = "appell-check";
      code = cmd_appell_check(ap, report, csv);
    }
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return detail::exit_code_for(e.kind());
  }

  try {
    if (!outputs.csv.empty()) {
      if (!csv) throw Error(ErrorKind::InvalidArgument, "this command produces no CSV");
      csv->write_file(outputs.csv);
    }
    const std::string text = report.dump(2) + "\n";
    if (outputs.report.empty()) {
      out << text;
    } else {
      std::ofstream f(outputs.report, std::ios::binary);
      if (!f) throw Error(ErrorKind::InvalidArgument, "cannot open " + outputs.report + " for writing");
      f << text;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadInput;
  }
  return code;
}

}  // namespace hardylab::cli
