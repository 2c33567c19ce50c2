#include "fracsys/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "fracsys/error.hpp"
#include "fracsys/nonlocal.hpp"
#include "fracsys/solvers.hpp"
#include "fracsys/verification.hpp"

namespace fracsys {
namespace fs = std::filesystem;

namespace {

[[noreturn]] void schema(const std::string& msg) { throw ConfigError("schema violation: " + msg); }

void allow_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) schema(where + " must be an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) schema("unknown field '" + where + "." + it.key() + "'");
}

template <typename T>
void read(const Json& obj, const char* key, const std::string& where, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) schema(where + "." + key + " must be an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) schema(where + "." + key + " must be a number");
  }
  try {
    out = it->get<T>();
  } catch (const Json::exception&) {
    schema(where + "." + key + " has the wrong type");
  }
}

template <typename T>
void read(const Json& obj, const char* key, const std::string& where, std::optional<T>& out) {
  if (!obj.contains(key)) return;
  T v{};
  read(obj, key, where, v);
  out = v;
}

void check_order(double s, const std::string& where) {
  if (!(s > 0.0 && s < 1.0))
    throw ConfigError("order parameter out of range: " + where + " = " + format_double(s) + ", must lie in (0, 1)");
}

Eigen::MatrixXd read_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) schema("kernel.matrix must be a nonempty array of rows");
  const std::size_t n = j.size();
  Eigen::MatrixXd A(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    if (!j[r].is_array() || j[r].size() != n) schema("kernel.matrix must be square");
    for (std::size_t c = 0; c < n; ++c) {
      if (!j[r][c].is_number()) schema("kernel.matrix entries must be numbers");
      A(r, c) = j[r][c].get<double>();
    }
  }
  return A;
}

Json describe(const KernelSpec& k) {
  return Json{{"name", k.name()}, {"dim", k.dim()}, {"s", k.s()}, {"lambda", k.lambda()},
              {"Lambda", k.Lambda()}, {"c_ns", k.c_ns()}};
}

Json describe(const GridSpec& g) {
  return Json{{"dim", g.dim},       {"h", g.h},
              {"radius", g.radius}, {"truncation_radius", g.truncation_radius},
              {"periodic", g.periodic}, {"nodes_per_axis", g.nodes_per_axis}};
}

Json verdict(const std::string& name, double max_residual, double threshold, bool pass) {
  return Json{{"name", name}, {"max_residual", max_residual}, {"threshold", threshold}, {"pass", pass}};
}

ExteriorRule required_exterior(const ExperimentConfig& cfg) {
  if (!cfg.exterior) throw ConfigError("missing exterior rule: command '" + cfg.command + "' needs an 'exterior' entry");
  return parse_exterior(*cfg.exterior, cfg.grid.dim);
}

GridSpec ball_grid(const ExperimentConfig& cfg) {
  if (cfg.grid.layout != "ball") schema("command '" + cfg.command + "' needs grid.layout = \"ball\"");
  return build_grid(cfg.grid);
}

std::vector<double> ball_center(const ExperimentConfig& cfg) {
  std::vector<double> x0 = cfg.probe.x0;
  if (x0.empty()) x0.assign(cfg.grid.dim, 0.0);
  if (static_cast<int>(x0.size()) != cfg.grid.dim) schema("probe.x0 must have grid.dim entries");
  return x0;
}

void write_field(const fs::path& dir, const SampledField& u) {
  write_field_csv(dir / "field.csv", u);
  write_fsf1(dir / "field.fsf", u);
}

FlowOptions flow_options(const SolverConfig& s) {
  FlowOptions opt;
  if (s.steps > 0) opt.max_steps = s.steps;
  opt.step = s.step_size;
  opt.tolerance = s.tolerance;
  return opt;
}

// ---------------------------------------------------------------- commands

RunOutcome cmd_solve_linear(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  const GridSpec grid = ball_grid(cfg);
  const KernelSpec kernel = build_kernel(cfg.kernel, grid.dim);
  const ExteriorRule g = required_exterior(cfg);
  if (g.components() != 1) schema("solve-linear needs a scalar exterior rule");
  NonlocalOperator op(kernel, grid);
  const std::vector<double> rhs(op.size(), cfg.solver.rhs);
  const LinearSolution sol = solve_linear_dirichlet(op, rhs, g);

  const ExteriorCoupling ext = op.couple(g);
  write_field(dir, sol.v);
  write_point_values_csv(dir / "operator.csv", sol.v.lattice(), op.apply(sol.v, ext), ext.truncation);

  const bool pass = sol.report.converged;
  log << "solve-linear: " << (pass ? "converged" : "failed") << ", residual " << format_double(sol.report.final_residual)
      << ", rcond " << format_double(sol.report.rcond) << "\n";
  Json rep{{"kernel", describe(kernel)}, {"grid", describe(grid)}, {"exterior", g.name()},
           {"report", to_json(sol.report)}, {"pass", pass}};
  return {pass ? 0 : 1, rep};
}

RunOutcome flow_outcome(const std::string& name, const NonlocalOperator& op, const ExteriorRule& g,
                        const FlowResult& fr, const fs::path& dir, std::ostream& log, Json extra) {
  write_field(dir, fr.u);
  write_energy_csv(dir / "energy.csv", fr.report);
  const bool pass = fr.report.converged;
  log << name << ": " << (pass ? "converged" : "not converged") << " after " << fr.report.iterations
      << " steps, residual " << format_double(fr.report.final_residual) << ", constraint violation "
      << format_double(fr.report.constraint_violation) << "\n";
  extra["kernel"] = describe(op.kernel());
  extra["grid"] = describe(op.lattice().grid());
  extra["exterior"] = g.name();
  extra["report"] = to_json(fr.report);
  extra["pass"] = pass;
  return {pass ? 0 : 1, extra};
}

RunOutcome cmd_solve_harmonic(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  const GridSpec grid = ball_grid(cfg);
  const ExteriorRule g = required_exterior(cfg);
  if (g.components() < 2) schema("solve-harmonic needs a vector-valued exterior rule");
  NonlocalOperator op(build_kernel(cfg.kernel, grid.dim), grid);
  const FlowResult fr = gradient_flow_s_harmonic(op, g, flow_options(cfg.solver));
  const EnergyValue e = op.energy(fr.u, op.couple(g));
  return flow_outcome("solve-harmonic", op, g, fr, dir, log, Json{{"energy", to_json(e)}});
}

RunOutcome cmd_solve_gl(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  const GridSpec grid = ball_grid(cfg);
  const ExteriorRule g = required_exterior(cfg);
  if (g.components() < 2) schema("solve-gl needs a vector-valued exterior rule");
  NonlocalOperator op(build_kernel(cfg.kernel, grid.dim), grid);
  GLConfig gl;
  gl.epsilon = cfg.solver.epsilon;
  gl.step = cfg.solver.step_size;
  if (cfg.solver.steps > 0) gl.max_steps = cfg.solver.steps;
  gl.tolerance = cfg.solver.tolerance;
  gl.validate();
  const FlowResult fr = ginzburg_landau_solve(op, gl, g);
  return flow_outcome("solve-gl", op, g, fr, dir, log, Json{{"epsilon", gl.epsilon}});
}

SampledField probe_field(const ExperimentConfig& cfg, const NonlocalOperator& op) {
  const std::string& kind = cfg.probe.field;
  if (kind == "harmonic") {
    const ExteriorRule g = required_exterior(cfg);
    const FlowResult fr = gradient_flow_s_harmonic(op, g, flow_options(cfg.solver));
    if (!fr.report.converged) throw SolverError("harmonic field did not converge: " + fr.report.message);
    return fr.u;
  }
  if (kind == "smoothed_sign") {
    if (cfg.grid.dim != 1) schema("probe.field = \"smoothed_sign\" needs grid.dim = 1");
    if (cfg.probe.n_smooth < 1) schema("probe.n_smooth must be positive");
    return smoothed_sign_field(SmoothedSign{cfg.probe.n_smooth}, op.lattice().grid());
  }
  if (kind == "file") {
    if (cfg.probe.file.empty()) schema("probe.field = \"file\" needs probe.file");
    const fs::path p = cfg.base_dir / cfg.probe.file;
    if (!fs::exists(p)) throw ConfigError("referenced file not found: " + p.string());
    return field_from_file(read_fsf1(p), op.lattice().grid(), required_exterior(cfg));
  }
  schema("probe.field must be harmonic, smoothed_sign or file");
}

RunOutcome cmd_probe_decay(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  const GridSpec grid = ball_grid(cfg);
  NonlocalOperator op(build_kernel(cfg.kernel, grid.dim), grid);
  SampledField u = probe_field(cfg, op);
  if (cfg.probe.mu != 1.0 || cfg.probe.t != 1.0) u = restrict_rescale(u, cfg.probe.mu, cfg.probe.t);

  GrowthBounds bounds;
  if (cfg.bounds) {
    bounds = *cfg.bounds;
  } else {
    double M = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      double r2 = 0.0;
      for (int c = 0; c < u.components(); ++c) r2 += u.value(c, i) * u.value(c, i);
      M = std::max(M, std::sqrt(r2));
    }
    bounds.M = M;
  }
  const std::vector<double> x0 = ball_center(cfg);
  LedgerOptions lo;
  lo.base_radius = cfg.probe.ball_radius;
  lo.s = cfg.kernel.s;
  const DecayLedger ledger = dyadic_ledger(u, x0, cfg.probe.levels, bounds, lo);
  const Ball ball{x0, cfg.probe.ball_radius};
  // The contraction step needs l < 1; borderline bounds only get the ledger.
  const bool contracts = bounds.l() < 1.0;
  std::optional<ContractionReport> step;
  if (contracts) step = contraction_step(u, bounds, ball);

  Json sweep = Json::array();
  for (double l : cfg.probe.l_values) {
    GrowthBounds b = bounds;
    b.l_override = l;
    const ContractionReport r = contraction_step(u, b, ball);
    sweep.push_back(Json{{"l", l}, {"delta_observed", r.delta_observed}, {"delta_cap", r.delta_cap}});
  }

  write_ledger_csv(dir / "ledger.csv", ledger);
  write_field(dir, u);
  const bool pass = ledger.delta_fit > 0.0 && ledger.containment && step && step->delta_observed > 0.0;
  log << "probe-decay: delta_fit " << format_double(ledger.delta_fit) << ", alpha_fit "
      << format_double(ledger.alpha_fit) << ", delta_observed "
      << (step ? format_double(step->delta_observed) : std::string("n/a (l >= 1)")) << "\n";
  Json rep{{"grid", describe(grid)},
           {"field", cfg.probe.field},
           {"bounds", to_json(bounds)},
           {"audit", to_json(structural_audit(bounds))},
           {"ledger", to_json(ledger)},
           {"contraction", step ? to_json(*step) : Json(nullptr)},
           {"l_sweep", sweep},
           {"pass", pass}};
  return {pass ? 0 : 1, rep};
}

RunOutcome cmd_probe_harnack(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  const GridSpec grid = ball_grid(cfg);
  std::vector<double> s_values = cfg.probe.s_values;
  if (s_values.empty()) s_values.push_back(cfg.kernel.s);
  const Ball ball{ball_center(cfg), cfg.probe.ball_radius};
  auto lattice = std::make_shared<const Lattice>(grid);
  // h = -v for the barrier v: nonnegative, vanishing outside, -L h = 1 inside.
  auto build = [&](double s) {
    NonlocalOperator op(build_kernel(cfg.kernel, grid.dim, s), lattice);
    const BarrierReport b = barrier_bound(op);
    std::vector<double> vals(b.v.values().begin(), b.v.values().end());
    for (double& x : vals) x = -x;
    SampledField h(lattice, 1, std::move(vals), ExteriorRule::zero());
    return std::make_pair(std::move(op), std::move(h));
  };
  const HarnackReport rep = harnack_sweep(s_values, build, ball);
  const auto [lo, hi] = std::minmax_element(rep.ratios_by_s.begin(), rep.ratios_by_s.end());
  const double spread = *hi / *lo;
  const double threshold = 2.0;
  const bool pass = spread <= threshold;
  write_harnack_csv(dir / "harnack.csv", rep);
  log << "probe-harnack: worst ratio " << format_double(rep.ratio) << ", spread across s " << format_double(spread) << "\n";
  Json out{{"grid", describe(grid)}, {"harnack", to_json(rep)}, {"spread", spread}, {"threshold", threshold}, {"pass", pass}};
  return {pass ? 0 : 1, out};
}

RunOutcome cmd_audit(const ExperimentConfig& cfg, const fs::path&, std::ostream& log) {
  if (!cfg.bounds) schema("audit needs a 'bounds' entry");
  const StructuralAudit a = structural_audit(*cfg.bounds);
  Json rep = to_json(a);
  rep["bounds"] = to_json(*cfg.bounds);
  if (cfg.probe.mu != 1.0 || cfg.probe.t != 1.0) {
    const GrowthBounds scaled = scaling_ledger(*cfg.bounds, cfg.probe.mu, cfg.probe.t, cfg.kernel.s);
    rep["scaled"] = to_json(scaled);
    rep["scaled_audit"] = to_json(structural_audit(scaled));
  }
  rep["pass"] = a.satisfied;
  log << "audit: aM + a* = " << format_double(a.structural) << (a.satisfied ? " < 2" : " >= 2") << "\n";
  return {a.satisfied ? 0 : 1, rep};
}

Json verify_square_identity(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<std::pair<KernelSpec, GridSpec>> cases;
  const GridSpec line = GridSpec::ball(1, 1.0, 128);
  for (double s : {0.3, 0.5, 0.7, 0.9}) cases.emplace_back(make_fractional_kernel(1, s), line);
  Eigen::MatrixXd A(2, 2);
  A << 1.5, 0.3, 0.3, 1.0;
  cases.emplace_back(make_anisotropic_kernel(A, 0.6), GridSpec::ball(2, 1.0, 20));
  const double c = normalization_constant(1, 0.4).value;
  cases.emplace_back(make_custom_kernel(1, 0.4, [c](double r) { return c * (0.5 + std::exp(-r * r)); },
                                        0.5 * c / 0.6, 1.5 * c / 0.6, "bump"),
                     line);
  double worst = 0.0;
  for (const auto& [kernel, grid] : cases) {
    NonlocalOperator op(kernel, grid);
    for (int f = 0; f < 3; ++f) {
      const SampledField v = SampledField::from_function(
          grid, 1, [&](auto, auto out) { out[0] = normal(rng); }, ExteriorRule::constant({normal(rng)}));
      worst = std::max(worst, square_identity_check(op, v).relative);
    }
  }
  return verdict("square_identity", worst, 1e-12, worst <= 1e-12);
}

Json verify_sign_algebra() {
  double worst = 0.0;
  Json patterns = Json::array();
  for (double x : {-0.5, 0.5})
    for (double y : {-0.3, 0.3}) {
      const SignAlgebraReport r = sign_algebra_check(x, y);
      const double d = r.phi_x - r.phi_y;
      worst = std::max({worst, std::abs(d * d - 2.0 * r.phi_x * d), std::abs(r.phi_x * d * d - 2.0 * d)});
      patterns.push_back(to_json(r));
    }
  Json v = verdict("sign_algebra", worst, 0.0, worst == 0.0);
  v["patterns"] = patterns;
  return v;
}

Json verify_counterexample() {
  const std::vector<int> ns = {8, 16, 32, 64};
  const double threshold = 0.6;
  double finest = 0.0;
  double worst_ratio = 0.0;
  Json runs = Json::array();
  for (double s : {0.5, 0.8}) {
    double prev = 0.0;
    for (int n : ns) {
      const CounterexampleReport r = counterexample_residual(n, s, 0.2, 1.0);
      if (prev > 0.0) worst_ratio = std::max(worst_ratio, r.max_residual / prev);
      prev = r.max_residual;
      if (n == ns.back()) finest = std::max(finest, r.max_residual);
      runs.push_back(to_json(r));
    }
  }
  GrowthBounds b;
  b.a = 1.0;
  b.a_star = 1.0;
  b.M = 1.0;
  Json v = verdict("counterexample", finest, threshold, worst_ratio <= threshold);
  v["convergence_ratio"] = worst_ratio;
  v["structural"] = structural_audit(b).structural;
  v["runs"] = runs;
  return v;
}

SampledField cosine_field(const GridSpec& grid, std::vector<double> k) {
  return SampledField::from_function(
      grid, 1,
      [k](auto x, auto out) {
        double phase = 0.0;
        for (std::size_t a = 0; a < k.size(); ++a) phase += k[a] * x[a];
        out[0] = std::cos(phase);
      },
      ExteriorRule::periodic());
}

Json verify_s_limit() {
  const GridSpec grid = GridSpec::periodic_box(1, 1024, 2.0 * M_PI, 16);
  const LimitReport r = s_limit_isotropic(cosine_field(grid, {2.0}), {0.9, 0.95, 0.99});
  const double dev = std::abs(r.fitted_rate - 1.0);
  Json v = verdict("s_limit", dev, 0.2, dev <= 0.2);
  v["fitted_rate"] = r.fitted_rate;
  return v;
}

RunOutcome cmd_verify(const ExperimentConfig& cfg, const fs::path&, std::ostream& log) {
  Json verdicts = Json::array({verify_square_identity(cfg.seed), verify_sign_algebra(), verify_counterexample(),
                               verify_s_limit()});
  bool pass = true;
  for (const Json& v : verdicts) {
    pass = pass && v["pass"].get<bool>();
    log << (v["pass"].get<bool>() ? "PASS " : "FAIL ") << v["name"].get<std::string>() << " max_residual "
        << format_double(v["max_residual"].get<double>()) << " threshold " << format_double(v["threshold"].get<double>())
        << "\n";
  }
  return {pass ? 0 : 1, Json{{"seed", cfg.seed}, {"verdicts", verdicts}, {"pass", pass}}};
}

RunOutcome cmd_limit(const ExperimentConfig& cfg, const fs::path& dir, std::ostream& log) {
  if (cfg.grid.layout != "periodic") schema("limit needs grid.layout = \"periodic\"");
  const GridSpec grid = build_grid(cfg.grid);
  std::vector<double> k = cfg.probe.wavevector;
  if (k.empty()) k = grid.dim == 1 ? std::vector<double>{2.0} : std::vector<double>{1.0, 0.0};
  if (static_cast<int>(k.size()) != grid.dim) schema("probe.wavevector must have grid.dim entries");
  std::vector<double> s_values = cfg.probe.s_values;
  if (s_values.empty()) s_values = {0.9, 0.95, 0.99};
  for (double s : s_values)
    if (!(s > 0.5)) schema("limit needs probe.s_values above 1/2");

  const SampledField v = cosine_field(grid, k);
  const bool aniso = cfg.kernel.kind == "anisotropic";
  const LimitReport r = aniso ? s_limit_anisotropic(v, *cfg.kernel.matrix, s_values) : s_limit_isotropic(v, s_values);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.s_values.size(); ++i) rows.push_back({r.s_values[i], r.errors[i], r.quadrature_errors[i]});
  write_csv(dir / "limit.csv", {"s", "error", "quadrature_error"}, rows);

  const double relative = r.errors.back() / r.limit_scale;
  Json rep{{"grid", describe(grid)}, {"limit", to_json(r)}, {"relative_error", relative}};
  bool pass;
  if (aniso) {
    pass = relative <= 0.03;
    rep["threshold"] = 0.03;
  } else {
    pass = r.fitted_rate >= 0.8 && r.fitted_rate <= 1.2;
    rep["rate_window"] = {0.8, 1.2};
  }
  rep["pass"] = pass;
  log << "limit: fitted rate " << format_double(r.fitted_rate) << ", relative error at s = "
      << format_double(r.s_values.back()) << ": " << format_double(relative) << "\n";
  return {pass ? 0 : 1, rep};
}

}  // namespace

const std::vector<std::string>& known_commands() {
  static const std::vector<std::string> names = {"solve-linear",  "solve-harmonic", "solve-gl", "probe-decay",
                                                 "probe-harnack", "audit",          "verify",   "limit"};
  return names;
}

ExperimentConfig parse_config(const Json& j) {
  ExperimentConfig cfg;
  allow_keys(j, "config",
             {"schema_version", "command", "kernel", "grid", "exterior", "bounds", "solver", "probe", "seed", "output_dir"});
  read(j, "schema_version", "config", cfg.schema_version);
  if (cfg.schema_version != kSchemaVersion)
    schema("unsupported schema_version " + std::to_string(cfg.schema_version) + " (expected " +
           std::to_string(kSchemaVersion) + ")");
  read(j, "command", "config", cfg.command);
  read(j, "seed", "config", cfg.seed);
  std::string out;
  read(j, "output_dir", "config", out);
  if (!out.empty()) cfg.output_dir = out;

  if (j.contains("kernel")) {
    const Json& k = j["kernel"];
    allow_keys(k, "kernel", {"kind", "s", "matrix", "lambda", "Lambda", "profile"});
    read(k, "kind", "kernel", cfg.kernel.kind);
    read(k, "s", "kernel", cfg.kernel.s);
    read(k, "lambda", "kernel", cfg.kernel.lambda);
    read(k, "Lambda", "kernel", cfg.kernel.Lambda);
    if (k.contains("matrix")) cfg.kernel.matrix = read_matrix(k["matrix"]);
    if (k.contains("profile")) {
      const Json& p = k["profile"];
      allow_keys(p, "kernel.profile", {"type", "factor", "low", "high", "width"});
      read(p, "type", "kernel.profile", cfg.kernel.profile);
      read(p, "factor", "kernel.profile", cfg.kernel.factor);
      read(p, "low", "kernel.profile", cfg.kernel.low);
      read(p, "high", "kernel.profile", cfg.kernel.high);
      read(p, "width", "kernel.profile", cfg.kernel.width);
    }
  }
  check_order(cfg.kernel.s, "kernel.s");
  const std::string& kind = cfg.kernel.kind;
  if (kind != "fractional" && kind != "anisotropic" && kind != "custom")
    schema("kernel.kind must be fractional, anisotropic or custom");
  if (kind == "anisotropic" && !cfg.kernel.matrix) schema("anisotropic kernel needs kernel.matrix");
  if (kind == "custom" && cfg.kernel.profile != "scaled" && cfg.kernel.profile != "bump")
    schema("kernel.profile.type must be scaled or bump");

  if (j.contains("grid")) {
    const Json& g = j["grid"];
    allow_keys(g, "grid",
               {"dim", "layout", "radius", "nodes_across", "truncation_factor", "nodes", "period", "periods"});
    read(g, "dim", "grid", cfg.grid.dim);
    read(g, "layout", "grid", cfg.grid.layout);
    read(g, "radius", "grid", cfg.grid.radius);
    read(g, "nodes_across", "grid", cfg.grid.nodes_across);
    read(g, "truncation_factor", "grid", cfg.grid.truncation_factor);
    read(g, "nodes", "grid", cfg.grid.nodes);
    read(g, "period", "grid", cfg.grid.period);
    read(g, "periods", "grid", cfg.grid.periods);
  } else if (cfg.kernel.matrix) {
    cfg.grid.dim = static_cast<int>(cfg.kernel.matrix->rows());
  }
  if (cfg.grid.dim != 1 && cfg.grid.dim != 2) schema("grid.dim must be 1 or 2");
  if (cfg.grid.layout != "ball" && cfg.grid.layout != "periodic") schema("grid.layout must be ball or periodic");
  if (cfg.kernel.matrix && cfg.kernel.matrix->rows() != cfg.grid.dim) schema("kernel.matrix size must equal grid.dim");

  if (j.contains("exterior")) {
    if (!j["exterior"].is_string()) schema("exterior must be a string");
    cfg.exterior = j["exterior"].get<std::string>();
  }

  if (j.contains("bounds")) {
    const Json& b = j["bounds"];
    allow_keys(b, "bounds", {"a", "b", "a_star", "b_star", "M"});
    GrowthBounds gb;
    read(b, "a", "bounds", gb.a);
    read(b, "b", "bounds", gb.b);
    read(b, "a_star", "bounds", gb.a_star);
    read(b, "b_star", "bounds", gb.b_star);
    read(b, "M", "bounds", gb.M);
    try {
      gb.validate();
    } catch (const DomainError& e) {
      schema(std::string("bounds: ") + e.what());
    }
    cfg.bounds = gb;
  }

  if (j.contains("solver")) {
    const Json& s = j["solver"];
    allow_keys(s, "solver", {"steps", "step_size", "tolerance", "epsilon", "rhs"});
    read(s, "steps", "solver", cfg.solver.steps);
    read(s, "step_size", "solver", cfg.solver.step_size);
    read(s, "tolerance", "solver", cfg.solver.tolerance);
    read(s, "epsilon", "solver", cfg.solver.epsilon);
    read(s, "rhs", "solver", cfg.solver.rhs);
    if (!(cfg.solver.tolerance > 0.0)) schema("solver.tolerance must be positive");
    if (cfg.solver.steps < 0 || cfg.solver.step_size < 0.0) schema("solver.steps and solver.step_size must be nonnegative");
  }

  if (j.contains("probe")) {
    const Json& p = j["probe"];
    allow_keys(p, "probe",
               {"x0", "levels", "ball_radius", "mu", "t", "s_values", "l_values", "field", "n_smooth", "file", "wavevector"});
    read(p, "x0", "probe", cfg.probe.x0);
    read(p, "levels", "probe", cfg.probe.levels);
    read(p, "ball_radius", "probe", cfg.probe.ball_radius);
    read(p, "mu", "probe", cfg.probe.mu);
    read(p, "t", "probe", cfg.probe.t);
    read(p, "s_values", "probe", cfg.probe.s_values);
    read(p, "l_values", "probe", cfg.probe.l_values);
    read(p, "field", "probe", cfg.probe.field);
    read(p, "n_smooth", "probe", cfg.probe.n_smooth);
    read(p, "file", "probe", cfg.probe.file);
    read(p, "wavevector", "probe", cfg.probe.wavevector);
    for (double s : cfg.probe.s_values) check_order(s, "probe.s_values");
    if (cfg.probe.levels < 0) schema("probe.levels must be nonnegative");
    if (!(cfg.probe.ball_radius > 0.0)) schema("probe.ball_radius must be positive");
    if (!(cfg.probe.t > 0.0)) schema("probe.t must be positive");
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("referenced file not found: cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("schema violation: config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg = parse_config(j);
  cfg.base_dir = path.parent_path().empty() ? fs::path(".") : path.parent_path();
  return cfg;
}

KernelSpec build_kernel(const KernelConfig& k, int dim) { return build_kernel(k, dim, k.s); }

KernelSpec build_kernel(const KernelConfig& k, int dim, double s) {
  check_order(s, "kernel.s");
  if (k.kind == "fractional") return make_fractional_kernel(dim, s);
  if (k.kind == "anisotropic") {
    if (!k.matrix || k.matrix->rows() != dim) schema("kernel.matrix size must equal grid.dim");
    return make_anisotropic_kernel(*k.matrix, s);
  }
  if (k.kind != "custom") schema("kernel.kind must be fractional, anisotropic or custom");
  const double c = normalization_constant(dim, s).value;
  std::function<double(double)> profile;
  double lo, hi;
  if (k.profile == "scaled") {
    const double f = k.factor;
    profile = [c, f](double) { return c * f; };
    lo = hi = f;
  } else {
    const double a = k.low, b = k.high, w = k.width;
    if (!(w > 0.0)) schema("kernel.profile.width must be positive");
    profile = [c, a, b, w](double r) { return c * (a + (b - a) * std::exp(-(r / w) * (r / w))); };
    lo = std::min(a, b);
    hi = std::max(a, b);
  }
  if (!(lo > 0.0)) schema("custom kernel profile must be positive");
  // Class bounds: profile between (1-s) lambda and (1-s) Lambda.
  const double lambda = k.lambda.value_or(lo * c / (1.0 - s));
  const double Lambda = k.Lambda.value_or(hi * c / (1.0 - s));
  return make_custom_kernel(dim, s, profile, lambda, Lambda, k.profile);
}

GridSpec build_grid(const GridConfig& g) {
  try {
    if (g.layout == "periodic") {
      const int periods = g.periods > 0 ? g.periods : (g.dim == 1 ? 16 : 2);
      return GridSpec::periodic_box(g.dim, g.nodes, g.period, periods);
    }
    return GridSpec::ball(g.dim, g.radius, g.nodes_across, g.truncation_factor);
  } catch (const DomainError& e) {
    schema(std::string("grid: ") + e.what());
  }
}

ExteriorRule parse_exterior(const std::string& text, int dim) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  auto need_arg = [&] {
    if (arg.empty()) schema("exterior rule '" + name + "' needs an argument");
  };
  try {
    if (name == "zero") return ExteriorRule::zero();
    if (name == "sign") {
      if (dim != 1) schema("exterior rule 'sign' needs grid.dim = 1");
      return ExteriorRule::sign();
    }
    if (name == "radial_projection") return ExteriorRule::radial_projection(dim);
    if (name == "twist") {
      need_arg();
      if (dim != 1) schema("exterior rule 'twist' needs grid.dim = 1");
      return ExteriorRule::twist(std::stod(arg));
    }
    if (name == "constant") {
      need_arg();
      const Json v = Json::parse(arg);
      if (v.is_number()) return ExteriorRule::constant({v.get<double>()});
      return ExteriorRule::constant(v.get<std::vector<double>>());
    }
  } catch (const Json::exception&) {
    schema("cannot parse the argument of exterior rule '" + text + "'");
  } catch (const std::invalid_argument&) {
    schema("cannot parse the argument of exterior rule '" + text + "'");
  } catch (const DomainError& e) {
    schema("exterior rule '" + text + "': " + e.what());
  }
  throw ConfigError("unknown exterior rule '" + text + "' (expected zero, constant:[..], sign, radial_projection or twist:beta)");
}

RunOutcome run(const ExperimentConfig& cfg, std::ostream& log) {
  using Handler = RunOutcome (*)(const ExperimentConfig&, const fs::path&, std::ostream&);
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"solve-linear", cmd_solve_linear},   {"solve-harmonic", cmd_solve_harmonic},
      {"solve-gl", cmd_solve_gl},           {"probe-decay", cmd_probe_decay},
      {"probe-harnack", cmd_probe_harnack}, {"audit", cmd_audit},
      {"verify", cmd_verify},               {"limit", cmd_limit}};
  auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == cfg.command; });
  if (it == table.end()) {
    std::string list;
    for (const auto& e : table) list += (list.empty() ? "" : ", ") + e.first;
    throw ConfigError("unknown command '" + cfg.command + "' (expected one of " + list + ")");
  }
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  RunOutcome out;
  try {
    out = it->second(cfg, dir, log);
  } catch (const DomainError& e) {
    const std::string what = e.what();
    if (what.rfind("order parameter out of range", 0) == 0) throw ConfigError(what);
    throw ConfigError("invalid configuration: " + what);
  }
  out.report["command"] = cfg.command;
  out.report["schema_version"] = cfg.schema_version;
  out.report["exit_code"] = out.exit_code;
  emit_report(out.report, dir / "report.json");
  return out;
}

int run_cli(const std::string& command, const fs::path& config_path, const std::optional<fs::path>& out_dir,
            std::ostream& log, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (!command.empty()) cfg.command = command;
    if (out_dir) cfg.output_dir = *out_dir;
    return run(cfg, log).exit_code;
  } catch (const ConfigError& e) {
    err << "fracsys: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    err << "fracsys: solver failed: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "fracsys: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace fracsys
