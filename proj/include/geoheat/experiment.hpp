#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "geoheat/oracle.hpp"
#include "geoheat/propagator.hpp"

namespace geoheat {

// ---------------------------------------------------------------------------
// Flat key=value configuration. Keys are namespaced with dots; '#' starts a
// comment. Every key must be consumed by the experiment that runs, otherwise
// finish() reports it as unknown.

class Config {
 public:
  Config() = default;

  static Config from_string(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) +
                                         ": empty key");
      c.kv_[key] = value;
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
  }

  void set(const std::string& key, const std::string& value) {
    kv_[key] = value;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
  }
  std::string require_string(const std::string& key) const {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing config key: " + key);
    return it->second;
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? parse_double(require_string(key), key) : (used_.insert(key), fallback);
  }
  double require_double(const std::string& key) const {
    return parse_double(require_string(key), key);
  }
  long get_long(const std::string& key, long fallback) const {
    return has(key) ? parse_long(require_string(key), key) : (used_.insert(key), fallback);
  }
  int get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_long(key, fallback));
  }
  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& tok : split_commas(require_string(key)))
      out.push_back(parse_double(tok, key));
    return out;
  }
  std::vector<long> get_long_list(const std::string& key) const {
    std::vector<long> out;
    for (const std::string& tok : split_commas(require_string(key)))
      out.push_back(parse_long(tok, key));
    return out;
  }

  /// Throws if any key was never consumed; unknown keys are hard errors.
  void finish() const {
    std::string unknown;
    for (const auto& [k, v] : kv_)
      if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    if (!unknown.empty()) throw ConfigError("unknown config keys: " + unknown);
  }

 private:
  static std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
  }
  static std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur += ch;
      }
    }
    out.push_back(trim(cur));
    return out;
  }
  static double parse_double(const std::string& s, const std::string& key) {
    try {
      size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not a number: " + s);
    }
  }
  static long parse_long(const std::string& s, const std::string& key) {
    try {
      size_t pos = 0;
      const long v = std::stol(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: " + s);
    }
  }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// CSV output with shortest round-trip doubles and LF line endings.

inline std::string csv_num(double v) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}
inline std::string csv_num(long v) { return std::to_string(v); }

class CsvWriter {
 public:
  void row(const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ += ',';
      out_ += cells[i];
    }
    out_ += '\n';
  }
  void comment(const std::string& text) { out_ += "# " + text + "\n"; }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

// ---------------------------------------------------------------------------
// Config -> domain objects.

inline Manifold manifold_from(const Config& cfg) {
  const std::string kind = cfg.require_string("manifold.kind");
  if (kind == "circle") return Manifold::circle(cfg.get_double("manifold.radius", 1.0));
  if (kind == "sphere") return Manifold::sphere(cfg.get_double("manifold.radius", 1.0));
  if (kind == "torus") {
    const std::vector<double> periods = cfg.get_double_list("manifold.periods");
    return Manifold::flat_torus(std::span<const double>(periods));
  }
  throw ConfigError("manifold.kind must be circle, torus, or sphere");
}

inline Bundle bundle_from(const Config& cfg, const Manifold& m) {
  const std::string pot_name = cfg.get_string("bundle.potential", "zero");
  const NamedPotential& pot = named_potential(pot_name);
  const int rank = cfg.get_int("bundle.rank", pot.rank);
  if (rank != pot.rank && pot.fn)
    throw ConfigError("bundle.rank conflicts with potential " + pot_name);
  return Bundle(m, rank, Field::Real, TrivialConnection{}, pot.fn);
}

inline KernelVariant variant_from_name(const std::string& name) {
  if (name == "cutoff-mu") return KernelVariant::CutoffMu;
  if (name == "plain") return KernelVariant::Plain;
  if (name == "lambda") return KernelVariant::Lambda;
  if (name == "endpoint-scal") return KernelVariant::EndpointScal;
  throw ConfigError("unknown kernel.variant: " + name);
}
inline std::string variant_name(KernelVariant v) {
  switch (v) {
    case KernelVariant::CutoffMu: return "cutoff-mu";
    case KernelVariant::Plain: return "plain";
    case KernelVariant::Lambda: return "lambda";
    case KernelVariant::EndpointScal: return "endpoint-scal";
  }
  return "?";
}

inline StepKernelConfig kernel_config_from(const Config& cfg, Bundle bundle) {
  const KernelVariant v =
      variant_from_name(cfg.get_string("kernel.variant", "cutoff-mu"));
  return make_step_config(std::move(bundle), v,
                          cfg.get_double("kernel.lambda", 0.0),
                          cfg.get_int("kernel.q", 4));
}

inline Partition partition_from(const Config& cfg, double total, int r) {
  const std::string kind = cfg.get_string("partition.kind", "uniform");
  if (kind == "uniform") return Partition::uniform(total, r);
  if (kind == "pinned-last")
    return Partition::with_pinned_last(total, r,
                                       cfg.require_double("partition.tlast"));
  if (kind == "list") return Partition(cfg.get_double_list("partition.steps"));
  throw ConfigError("partition.kind must be uniform, pinned-last, or list");
}

/// Named scalar test sections with their Laplace eigenvalues (when they are
/// eigenfunctions of the bare Laplacian on the configured manifold).
struct NamedSection {
  std::function<double(const Manifold&, const Point&)> fn;
  std::function<std::optional<double>(const Manifold&)> eigenvalue;
};

inline NamedSection named_section(const std::string& name) {
  if (name == "one")
    return NamedSection{[](const Manifold&, const Point&) { return 1.0; },
                        [](const Manifold&) { return std::optional<double>(0.0); }};
  if (name == "cos-theta")
    return NamedSection{
        [](const Manifold& m, const Point& p) {
          return std::cos(primary_angle(m, p));
        },
        [](const Manifold& m) -> std::optional<double> {
          if (m.kind() == ManifoldKind::Circle)
            return 1.0 / (m.radius() * m.radius());
          if (m.kind() == ManifoldKind::FlatTorus) {
            const double w = 2.0 * kPi / m.period(0);
            return w * w;
          }
          return std::nullopt;
        }};
  if (name == "y10")
    return NamedSection{
        [](const Manifold& m, const Point& p) {
          return std::sqrt(3.0 / (4.0 * kPi)) * p.c[2] / m.radius();
        },
        [](const Manifold& m) -> std::optional<double> {
          if (m.kind() == ManifoldKind::Sphere2)
            return 2.0 / (m.radius() * m.radius());
          return std::nullopt;
        }};
  throw ConfigError("unknown section name: " + name);
}

struct RunResult {
  std::string csv;
  bool pass = true;
};

// ---------------------------------------------------------------------------
// Experiment drivers.

/// Convergence ladder: sup error of the composed kernel (or of a propagated
/// section) against the spectral reference, one row per partition size.
inline RunResult run_converge(const Config& cfg) {
  const Manifold m = manifold_from(cfg);
  StepKernelConfig kc = kernel_config_from(cfg, bundle_from(cfg, m));
  const double t = cfg.require_double("time.t");
  const GridQuadrature grid = m.make_grid(cfg.get_int("grid.n", 256));
  const std::vector<long> ladder = cfg.has("partition.ladder")
                                       ? cfg.get_long_list("partition.ladder")
                                       : std::vector<long>{cfg.get_long("partition.r", 16)};
  const std::string target = cfg.get_string("converge.target", "kernel");
  const bool check_monotone = cfg.get_long("check.monotone", 1) != 0;
  const double final_err = cfg.get_double("check.final_rel_err", -1.0);

  NamedSection section;
  Eigen::VectorXd u, u_exact;
  if (target == "section") {
    section = named_section(cfg.get_string("section.u", "one"));
    if (kc.bundle.has_potential() || kc.bundle.rank() != 1)
      throw ConfigError("section convergence target needs a scalar V=0 setup");
    const auto ev = section.eigenvalue(m);
    if (!ev) throw ConfigError("section.u is not an eigenfunction here");
    u = scalar_section(grid, [&](const Point& p) { return section.fn(m, p); });
    u_exact = std::exp(-*ev * t) * u;
  } else if (target != "kernel") {
    throw ConfigError("converge.target must be kernel or section");
  }

  CsvWriter csv;
  csv.row({"r", "mesh", "sup_rel_err", "ratio"});
  RunResult out;
  double prev = -1.0;
  for (long r : ladder) {
    const Partition part = partition_from(cfg, t, int(r));
    double err = 0.0;
    if (target == "kernel") {
      if (kc.bundle.rank() != 1 || kc.bundle.has_potential())
        throw ConfigError("kernel convergence target needs a scalar V=0 setup");
      const KernelMatrix km = heat_kernel_matrix(kc, part, grid);
      double sup_diff = 0.0, sup_ref = 0.0;
      for (size_t i = 0; i < grid.size(); ++i)
        for (size_t j = 0; j < grid.size(); ++j) {
          const double ref =
              oracle::spectral_kernel(m, t, grid.nodes[i], grid.nodes[j]);
          sup_ref = std::max(sup_ref, std::abs(ref));
          sup_diff = std::max(sup_diff,
                              std::abs(km.kernel_value(int(i), int(j)) - ref));
        }
      err = sup_diff / sup_ref;
    } else {
      const Eigen::VectorXd v = compose_apply(kc, part, u, grid);
      const double sup_ref = std::max(1e-300, u_exact.cwiseAbs().maxCoeff());
      err = (v - u_exact).cwiseAbs().maxCoeff() / sup_ref;
    }
    csv.row({csv_num(r), csv_num(part.mesh()), csv_num(err),
             prev < 0 ? "" : csv_num(err / prev)});
    if (check_monotone && prev >= 0 && !(err < prev)) out.pass = false;
    prev = err;
  }
  if (final_err > 0 && !(prev <= final_err)) out.pass = false;
  cfg.finish();
  out.csv = csv.str();
  return out;
}

/// Kernel-domination ladder: max over node pairs of |k_T|_op - k~_T, one row
/// per partition size; passes when every violation stays at rounding level.
inline RunResult run_hsu(const Config& cfg) {
  const Manifold m = manifold_from(cfg);
  StepKernelConfig kc = kernel_config_from(cfg, bundle_from(cfg, m));
  const double t = cfg.require_double("time.t");
  const GridQuadrature grid = m.make_grid(cfg.get_int("grid.n", 256));
  const std::vector<long> ladder = cfg.has("partition.ladder")
                                       ? cfg.get_long_list("partition.ladder")
                                       : std::vector<long>{cfg.get_long("partition.r", 8)};
  const NamedPotential& bound =
      named_potential(cfg.get_string("hsu.bound", "matrix-demo-min"));
  const double max_violation = cfg.get_double("check.max_violation", 1e-10);

  CsvWriter csv;
  csv.row({"r", "max_violation"});
  RunResult out;
  for (long r : ladder) {
    const Partition part = partition_from(cfg, t, int(r));
    const double viol = hsu_compare(kc, bound.fn, part, grid);
    csv.row({csv_num(r), csv_num(viol)});
    if (!(viol <= max_violation)) out.pass = false;
  }
  cfg.finish();
  out.csv = csv.str();
  return out;
}

/// Heat-trace rows against the spectral trace.
inline RunResult run_trace(const Config& cfg) {
  const Manifold m = manifold_from(cfg);
  StepKernelConfig kc = kernel_config_from(cfg, bundle_from(cfg, m));
  const double t = cfg.require_double("time.t");
  const GridQuadrature grid = m.make_grid(cfg.get_int("grid.n", 256));
  const std::vector<long> ladder = cfg.has("partition.ladder")
                                       ? cfg.get_long_list("partition.ladder")
                                       : std::vector<long>{cfg.get_long("partition.r", 32)};
  const double tol = cfg.get_double("check.rel_err", -1.0);
  const double reference = oracle::spectral_trace(m, t) * kc.bundle.rank();

  CsvWriter csv;
  csv.row({"r", "trace_estimate", "spectral_trace", "rel_err"});
  RunResult out;
  for (long r : ladder) {
    const Partition part = partition_from(cfg, t, int(r));
    const double est = trace_estimate(kc, part, grid);
    const double rel = (est - reference) / reference;
    csv.row({csv_num(r), csv_num(est), csv_num(reference), csv_num(rel)});
    if (tol > 0 && !(std::abs(rel) <= tol)) out.pass = false;
  }
  cfg.finish();
  out.csv = csv.str();
  return out;
}

/// Gaussian second-moment identity over a ladder of times, with the fitted
/// log-log slope of |lhs-rhs| in the footer.
inline RunResult run_lemma_a(const Config& cfg) {
  const std::string which = cfg.get_string("lemma.case", "generic");
  std::vector<double> ts;
  if (cfg.has("lemma.t_values")) {
    ts = cfg.get_double_list("lemma.t_values");
  } else {
    for (int i = 0; i <= 8; ++i) ts.push_back(1e-3 * std::pow(10.0, 0.25 * i));
  }
  const double min_slope = cfg.get_double("check.min_slope", 1.4);

  const int dim = 2;
  std::function<double(int, int, double)> bform;
  std::function<double(double, const double*)> f;
  bool expect_slope = false;
  double direct_tol = -1.0;
  if (which == "generic") {
    bform = [](int i, int j, double) { return i == j ? (i == 0 ? 1.0 : -1.0) : 0.0; };
    f = [](double, const double* xi) {
      const double dx = xi[0] - 1.0, dy = xi[1];
      return 1.0 / (1.0 + dx * dx + dy * dy);
    };
    expect_slope = true;
  } else if (which == "constant-f") {
    bform = [](int i, int j, double) { return i == j ? 1.0 : 0.0; };
    f = [](double, const double*) { return 1.0; };
    direct_tol = 1e-12;
  } else if (which == "odd-f") {
    bform = [](int i, int j, double) { return i == j ? (i + 1.0) : 0.0; };
    f = [](double, const double* xi) {
      return xi[0] / (1.0 + xi[0] * xi[0] + xi[1] * xi[1]);
    };
    direct_tol = 1e-12;
  } else {
    throw ConfigError("lemma.case must be generic, constant-f, or odd-f");
  }

  CsvWriter csv;
  csv.row({"t", "lhs", "rhs", "abs_diff"});
  RunResult out;
  std::vector<double> logt, logd;
  for (double t : ts) {
    const auto res = oracle::gauss_moment_check(dim, bform, f, t);
    csv.row({csv_num(t), csv_num(res.lhs), csv_num(res.rhs),
             csv_num(res.abs_diff)});
    if (direct_tol > 0 &&
        res.abs_diff > direct_tol * (1.0 + std::abs(res.lhs)))
      out.pass = false;
    if (expect_slope && res.abs_diff > 0) {
      logt.push_back(std::log(t));
      logd.push_back(std::log(res.abs_diff));
    }
  }
  if (expect_slope) {
    double slope = 0.0;
    if (logt.size() >= 2) {
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = double(logt.size());
      for (size_t i = 0; i < logt.size(); ++i) {
        sx += logt[i];
        sy += logd[i];
        sxx += logt[i] * logt[i];
        sxy += logt[i] * logd[i];
      }
      slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    }
    csv.comment("slope," + csv_num(slope));
    if (!(slope >= min_slope)) out.pass = false;
  }
  cfg.finish();
  out.csv = csv.str();
  return out;
}

/// Dumps one row of the pinned kernel, one column per requested variant, with
/// the spectral reference alongside.
inline RunResult run_kernel_dump(const Config& cfg) {
  const Manifold m = manifold_from(cfg);
  const Bundle bundle = bundle_from(cfg, m);
  if (bundle.rank() != 1 || bundle.has_potential())
    throw ConfigError("kernel dump expects a scalar V=0 setup");
  const double t = cfg.require_double("time.t");
  const GridQuadrature grid = m.make_grid(cfg.get_int("grid.n", 256));
  const Partition part = partition_from(cfg, t, cfg.get_int("partition.r", 16));
  const size_t i0 = size_t(cfg.get_long("kernel.row_index", 0));
  if (i0 >= grid.size()) throw ConfigError("kernel.row_index out of range");
  const double max_rel = cfg.get_double("check.max_rel_err", -1.0);

  std::vector<std::string> names;
  {
    const std::string list = cfg.get_string("kernel.variants", "");
    if (list.empty()) {
      names.push_back(cfg.get_string("kernel.variant", "cutoff-mu"));
    } else {
      std::string cur;
      for (char ch : list + ",") {
        if (ch == ',') {
          if (!cur.empty()) names.push_back(cur);
          cur.clear();
        } else if (!isspace(static_cast<unsigned char>(ch))) {
          cur += ch;
        }
      }
    }
  }
  const double lambda = cfg.get_double("kernel.lambda", 0.0);
  const int q = cfg.get_int("kernel.q", 4);

  std::vector<std::vector<FiberMatrix>> rows;
  CutDiagnostics diag;
  for (const std::string& name : names) {
    StepKernelConfig kc =
        make_step_config(bundle, variant_from_name(name), lambda, q);
    rows.push_back(pinned_kernel_row(kc, part, grid.nodes[i0], grid, &diag));
  }
  std::vector<double> ref(grid.size());
  double sup_ref = 0.0;
  for (size_t j = 0; j < grid.size(); ++j) {
    ref[j] = oracle::spectral_kernel(m, t, grid.nodes[i0], grid.nodes[j]);
    sup_ref = std::max(sup_ref, std::abs(ref[j]));
  }

  CsvWriter csv;
  std::vector<std::string> header{"j", "distance"};
  for (const std::string& n : names) header.push_back("k_" + n);
  header.push_back("spectral");
  csv.row(header);
  RunResult out;
  std::vector<double> sup_diff(names.size(), 0.0);
  for (size_t j = 0; j < grid.size(); ++j) {
    std::vector<std::string> cells{
        csv_num(long(j)), csv_num(m.distance(grid.nodes[i0], grid.nodes[j]))};
    for (size_t v = 0; v < names.size(); ++v) {
      const double val = rows[v][j](0, 0).real();
      sup_diff[v] = std::max(sup_diff[v], std::abs(val - ref[j]));
      cells.push_back(csv_num(val));
    }
    cells.push_back(csv_num(ref[j]));
    csv.row(cells);
  }
  csv.comment("zeroed_cut_pairs," + csv_num(diag.zeroed_pairs));
  if (max_rel > 0)
    for (double d : sup_diff)
      if (!(d / sup_ref <= max_rel)) out.pass = false;
  cfg.finish();
  out.csv = csv.str();
  return out;
}

/// Applies the composed one-step operators to a named section (grid mode) or
/// runs the start-pinned Monte Carlo estimator (mc mode, mc.paths > 0).
inline RunResult run_propagate(const Config& cfg, uint64_t seed_override,
                               bool has_seed_override) {
  const Manifold m = manifold_from(cfg);
  StepKernelConfig kc = kernel_config_from(cfg, bundle_from(cfg, m));
  const double t = cfg.require_double("time.t");
  const Partition part = partition_from(cfg, t, cfg.get_int("partition.r", 16));
  const NamedSection section = named_section(cfg.get_string("section.u", "one"));
  const long paths = cfg.get_long("mc.paths", 0);
  RunResult out;
  CsvWriter csv;

  if (paths > 0) {
    const uint64_t seed =
        has_seed_override ? seed_override : uint64_t(cfg.get_long("mc.seed", 1));
    if (has_seed_override) (void)cfg.get_long("mc.seed", 1);
    const GridQuadrature grid = m.make_grid(cfg.get_int("grid.n", 2));
    const size_t i0 = size_t(cfg.get_long("mc.x0_index", 0));
    if (i0 >= grid.size()) throw ConfigError("mc.x0_index out of range");
    const Point x0 = grid.nodes[i0];
    const auto u_vec = [&](const Point& p) {
      FiberVector v = FiberVector::zero(kc.bundle.rank());
      v[0] = section.fn(m, p);
      return v;
    };
    const McEstimate est = compose_apply_mc(kc, part, u_vec, x0, paths, seed);
    std::optional<double> expected;
    const auto ev = section.eigenvalue(m);
    if (ev && !kc.bundle.has_potential() && kc.bundle.rank() == 1)
      expected = std::exp(-*ev * t) * section.fn(m, x0);
    csv.row({"component", "estimate", "stderr", "expected", "zero_fraction"});
    for (int i = 0; i < kc.bundle.rank(); ++i) {
      csv.row({csv_num(long(i)), csv_num(est.mean[i].real()),
               csv_num(est.stderr_per_component[size_t(i)]),
               expected && i == 0 ? csv_num(*expected) : "",
               csv_num(est.zero_weight_fraction)});
    }
    // paths truncated at the injectivity radius carry weight zero
    const double injrad = m.injectivity_radius();
    csv.comment("neglected_mass_bound," +
                csv_num(part.r() * std::exp(-injrad * injrad /
                                            (4.0 * part.mesh()))));
    if (expected) {
      const double dev = std::abs(est.mean[0].real() - *expected);
      if (!(dev <= 3.0 * est.stderr_per_component[0])) out.pass = false;
      const double max_stderr = cfg.get_double("check.max_stderr", -1.0);
      if (max_stderr > 0 && !(est.stderr_per_component[0] <= max_stderr))
        out.pass = false;
    }
  } else {
    if (kc.bundle.rank() != 1)
      throw ConfigError("grid propagate expects a scalar setup");
    const GridQuadrature grid = m.make_grid(cfg.get_int("grid.n", 256));
    const Eigen::VectorXd u =
        scalar_section(grid, [&](const Point& p) { return section.fn(m, p); });
    const Eigen::VectorXd v = compose_apply(kc, part, u, grid);
    const auto ev = section.eigenvalue(m);
    std::optional<Eigen::VectorXd> exact;
    if (ev && !kc.bundle.has_potential())
      exact = Eigen::VectorXd(std::exp(-*ev * t) * u);
    csv.row({"i", "u_in", "u_out", "expected"});
    double sup = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      csv.row({csv_num(long(i)), csv_num(u[idx]), csv_num(v[idx]),
               exact ? csv_num((*exact)[idx]) : ""});
      if (exact) sup = std::max(sup, std::abs(v[idx] - (*exact)[idx]));
    }
    const double sup_tol = cfg.get_double("check.sup_err", -1.0);
    if (exact && sup_tol > 0 && !(sup <= sup_tol)) out.pass = false;
  }
  cfg.finish();
  out.csv = csv.str();
  return out;
}

/// Dispatch by experiment name (the CLI subcommand).
inline RunResult run_experiment(const std::string& name, const Config& cfg,
                                uint64_t seed_override, bool has_seed_override) {
  if (cfg.has("experiment")) {
    const std::string declared = cfg.require_string("experiment");
    if (declared != name)
      throw ConfigError("config declares experiment '" + declared +
                        "' but '" + name + "' was requested");
  }
  if (name == "converge") return run_converge(cfg);
  if (name == "hsu") return run_hsu(cfg);
  if (name == "trace") return run_trace(cfg);
  if (name == "lemma-a") return run_lemma_a(cfg);
  if (name == "kernel") return run_kernel_dump(cfg);
  if (name == "propagate")
    return run_propagate(cfg, seed_override, has_seed_override);
  throw ConfigError("unknown experiment: " + name);
}

}  // namespace geoheat
