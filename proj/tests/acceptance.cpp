// Acceptance suite: one PASS/FAIL line per criterion.
//   acceptance              run all criteria
//   acceptance --criterion N

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fracsys/regularity.hpp"
#include "fracsys/solvers.hpp"
#include "fracsys/verification.hpp"

using namespace fracsys;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%s", ok ? "" : " [FAILED]");
    if (!detail.empty()) detail += "; ";
    detail += what + buf;
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

SampledField negated(const SampledField& v) {
  std::vector<double> vals(v.values().begin(), v.values().end());
  for (double& x : vals) x = -x;
  return SampledField(v.lattice_ptr(), 1, std::move(vals), ExteriorRule::zero());
}

Verdict square_identity() {
  std::mt19937_64 rng(20);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd A(2, 2);
  A << 1.5, 0.3, 0.3, 1.0;
  const double c = normalization_constant(1, 0.4).value;
  std::vector<std::pair<KernelSpec, GridSpec>> cases;
  for (double s : {0.3, 0.5, 0.7, 0.9}) cases.emplace_back(make_fractional_kernel(1, s), GridSpec::ball(1, 1.0, 128));
  cases.emplace_back(make_anisotropic_kernel(A, 0.6), GridSpec::ball(2, 1.0, 20));
  cases.emplace_back(make_custom_kernel(
                         1, 0.4, [c](double r) { return c * (1.5 - 0.5 * std::exp(-r)); }, c, 1.5 * c, "bump"),
                     GridSpec::ball(1, 1.0, 128));
  double worst = 0.0;
  for (const auto& [k, g] : cases) {
    const NonlocalOperator op(k, g);
    for (int trial = 0; trial < 20; ++trial) {
      const double ext = nd(rng);
      const auto v = SampledField::from_function(g, 1, [&](auto, auto o) { o[0] = nd(rng); },
                                                 ExteriorRule::constant({ext}));
      worst = std::max(worst, square_identity_check(op, v).relative);
    }
  }
  Verdict v;
  v.require(worst <= 1e-12, fmt("max relative residual %.3e over 120 fields", worst));
  return v;
}

Verdict spectral_cross_check() {
  const int N = 2048, K = 32;
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  std::vector<double> a(K + 1), b(K + 1);
  for (int k = 0; k <= K; ++k) a[k] = nd(rng) / (1 + k), b[k] = nd(rng) / (1 + k);
  const auto u = SampledField::from_function(
      GridSpec::periodic_box(1, N, 2 * std::numbers::pi, 16), 1,
      [&](auto x, auto o) {
        double sum = 0.0;
        for (int k = 0; k <= K; ++k) sum += a[k] * std::cos(k * x[0]) + b[k] * std::sin(k * x[0]);
        o[0] = sum;
      },
      ExteriorRule::periodic());
  Verdict v;
  for (double s : {0.3, 0.5, 0.7, 0.9}) {
    const SampledField spec = spectral_apply(u, s);
    const NonlocalOperator op(make_fractional_kernel(1, s), u.lattice_ptr());
    const std::vector<double> quad = fractional_laplacian(op, u);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(quad[i] - spec.value(0, i)));
    // the pointwise entry point agrees with the batched one
    for (std::size_t i = 0; i < u.size(); i += 256)
      err = std::max(err, std::abs(apply_fractional_laplacian(u, s, i).value - spec.value(0, i)));
    const double rel = err / max_abs(spec.values());
    v.require(rel <= 0.01, fmt("s=%.1f rel %.2e", s, rel));
  }
  return v;
}

Verdict counterexample() {
  Verdict v;
  for (double s : {0.5, 0.8}) {
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double last = 0.0;
    for (int n : {8, 16, 32, 64}) {
      const CounterexampleReport r = counterexample_residual(n, s, 0.2, 1.0);
      decreasing = decreasing && r.max_residual < prev;
      prev = last = r.max_residual;
    }
    v.require(decreasing, fmt("s=%.1f residual decreasing in n", s));
    v.require(last < 1e-2, fmt("s=%.1f residual at n=64 %.3e < 1e-2", s, last));
  }
  const StructuralAudit audit = structural_audit({.a = 1, .a_star = 1, .M = 1});
  v.require(audit.structural == 2.0, fmt("aM + a* = %g", audit.structural));
  const SampledField phi = smoothed_sign_field(SmoothedSign{64}, GridSpec::ball(1, 1.0, 4096));
  const double x0[1] = {0.0};
  const DecayLedger led = dyadic_ledger(phi, x0, 5, {.a = 1, .a_star = 1, .M = 1});
  v.require(led.alpha_fit <= 0.05, fmt("ledger alpha %.3e", led.alpha_fit));
  return v;
}

Verdict s_limit() {
  Verdict v;
  const auto cos2 = SampledField::from_function(
      GridSpec::periodic_box(1, 2048, 2 * std::numbers::pi, 16), 1, [](auto x, auto o) { o[0] = std::cos(2 * x[0]); },
      ExteriorRule::periodic());
  const LimitReport iso = s_limit_isotropic(cos2, {0.9, 0.95, 0.99});
  v.require(iso.fitted_rate >= 0.8 && iso.fitted_rate <= 1.2, fmt("isotropic rate %.4f", iso.fitted_rate));

  Eigen::MatrixXd A(2, 2);
  A << 2, 0, 0, 1;
  const auto w = SampledField::from_function(
      GridSpec::periodic_box(2, 64, 2 * std::numbers::pi, 2), 1,
      [](auto x, auto o) { o[0] = std::cos(x[0]) + 0.5 * std::sin(x[1]); }, ExteriorRule::periodic());
  const LimitReport an = s_limit_anisotropic(w, A, {0.95, 0.99});
  const double rel = an.errors.back() / an.limit_scale;
  v.require(rel <= 0.03, fmt("diag(2,1) at s=0.99 rel %.3e", rel));
  return v;
}

Verdict barrier() {
  Verdict v;
  std::vector<double> L;
  bool nonpositive = true;
  for (double s : {0.5, 0.7, 0.9}) {
    const BarrierReport b = barrier_bound(NonlocalOperator(make_fractional_kernel(1, s), GridSpec::ball(1, 2.0, 512)));
    for (double x : b.v.values()) nonpositive = nonpositive && x <= 0.0;
    L.push_back(b.L_bound);
  }
  v.require(nonpositive, "v <= 0 at every node");
  const auto [lo, hi] = std::minmax_element(L.begin(), L.end());
  v.require(*hi <= 2 * *lo, fmt("L in [%.4f, %.4f]", *lo, *hi));
  return v;
}

Verdict harnack() {
  auto lattice = std::make_shared<const Lattice>(GridSpec::ball(1, 2.0, 512));
  const HarnackReport rep = harnack_sweep(
      {0.5, 0.7, 0.9, 0.95},
      [&](double s) {
        NonlocalOperator op(make_fractional_kernel(1, s), lattice);
        SampledField h = negated(barrier_bound(op).v);
        return std::make_pair(std::move(op), std::move(h));
      },
      Ball{{0.0}, 1.0});
  const auto [lo, hi] = std::minmax_element(rep.ratios_by_s.begin(), rep.ratios_by_s.end());
  Verdict v;
  v.require(*hi <= 2 * *lo, fmt("ratios in [%.4f, %.4f]", *lo, *hi));
  return v;
}

Verdict sphere_solver() {
  const NonlocalOperator op(make_fractional_kernel(1, 0.5), GridSpec::ball(1, 1.0, 128));
  const ExteriorRule g = ExteriorRule::twist(1.2);
  const FlowResult fr = gradient_flow_s_harmonic(op, g, {.max_steps = 100000, .tolerance = 1e-7});
  Verdict v;
  const double el = max_abs(euler_lagrange_residual(op, fr.u));
  const double scale = max_abs(fractional_laplacian(op, fr.u));
  v.require(el <= 1e-5 * scale, fmt("EL residual %.3e vs scale %.3e", el, scale));
  double modulus = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i)
    modulus = std::max(modulus, std::abs(std::hypot(fr.u.value(0, i), fr.u.value(1, i)) - 1.0));
  v.require(modulus <= 1e-12, fmt("||u| - 1| %.2e", modulus));
  const auto& E = fr.report.energy_trace;
  bool monotone = true;
  for (std::size_t k = 1; k < E.size(); ++k) monotone = monotone && E[k] <= E[k - 1] + 1e-10 * E.front();
  v.require(monotone, "energy nonincreasing");

  const FlowResult gl = ginzburg_landau_solve(op, {.epsilon = 1e-3, .tolerance = 1e-7}, g);
  double dist = 0.0;
  for (std::size_t i = 0; i < op.size(); ++i) {
    if (std::abs(op.lattice().coord(i, 0)) > 0.5) continue;
    dist = std::max(dist, std::hypot(gl.u.value(0, i) - fr.u.value(0, i), gl.u.value(1, i) - fr.u.value(1, i)));
  }
  v.require(dist <= 0.02, fmt("GL eps=1e-3 distance %.3e", dist));
  return v;
}

Verdict regularity_probe() {
  const NonlocalOperator op(make_fractional_kernel(1, 0.5), GridSpec::ball(1, 1.0, 128));
  const FlowResult fr = gradient_flow_s_harmonic(op, ExteriorRule::twist(1.2), {.max_steps = 100000, .tolerance = 1e-7});
  const SampledField w = restrict_rescale(fr.u, 0.8, 1.0);
  const GrowthBounds bounds{.a = 1, .a_star = 0, .M = 0.9};
  Verdict v;
  v.require(structural_audit(bounds).margin > 0.0, "structural margin > 0");
  const double x0[1] = {0.0};
  const DecayLedger led = dyadic_ledger(w, x0, 5, bounds);
  v.require(led.levels.size() == 6, "levels 0..5 resolved");
  v.require(led.delta_fit > 0.0, fmt("delta_fit %.4f", led.delta_fit));
  v.require(led.alpha_fit > 0.1, fmt("alpha_fit %.4f", led.alpha_fit));
  v.require(led.containment, "containment");
  double prev = std::numeric_limits<double>::infinity();
  bool positive = true, monotone = true;
  std::string sweep = "delta_observed";
  for (double l : {0.3, 0.5, 0.7, 0.9}) {
    GrowthBounds b = bounds;
    b.l_override = l;
    const ContractionReport c = contraction_step(w, b, Ball{{0.0}, 1.0});
    positive = positive && c.delta_observed > 0.0;
    monotone = monotone && c.delta_observed <= prev;
    prev = c.delta_observed;
    sweep += fmt(" %.4f", c.delta_observed);
  }
  v.require(positive && monotone, sweep + " positive and nonincreasing in l");
  return v;
}

Verdict scaling() {
  Verdict v;
  const GrowthBounds g{.a = 0.75, .b = 0.5, .a_star = 0.625, .b_star = 0.25, .M = 1.5};
  struct Case {
    double mu, t, s, t2s;
  };
  bool exact = true;
  for (const Case& c : {Case{2.0, 1.0, 0.3, 1.0}, Case{1.0, 0.5, 0.5, 0.5}, Case{0.5, 0.25, 0.5, 0.25},
                        Case{4.0, 0.25, 0.25, 0.5}, Case{1.0, 1.0, 0.7, 1.0}}) {
    const GrowthBounds out = scaling_ledger(g, c.mu, c.t, c.s);
    exact = exact && out.M == c.mu * g.M && out.a == c.mu * g.a && out.a_star == c.mu * c.mu * g.a_star &&
            out.b == c.mu * c.t2s * g.b && out.b_star == c.mu * c.mu * c.t2s * g.b_star;
  }
  v.require(exact, "dyadic transformations bitwise exact");

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> U(0.1, 4.0), S(0.05, 0.95);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GrowthBounds b{.a = U(rng), .b = U(rng), .a_star = U(rng), .b_star = U(rng), .M = U(rng)};
    const double mu = U(rng), t = U(rng), s = S(rng);
    const double lhs = structural_audit(scaling_ledger(b, mu, t, s)).structural;
    const double rhs = mu * mu * structural_audit(b).structural;
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  v.require(worst <= 4 * eps, fmt("homogeneity worst relative gap %.2e (%.1f ulp)", worst, worst / eps));
  return v;
}

Verdict known_profile() {
  Verdict v;
  LinearProblem p{make_fractional_kernel(1, 0.5), GridSpec::ball(1, 1.0, 2048), ExteriorRule::zero(),
                  [](auto) { return 1.0; }};
  const LinearSolution sol = solve_linear_dirichlet(p);
  double s1 = 0.0, s2 = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < sol.v.size(); ++i) {
    const double x = sol.v.lattice().coord(i, 0);
    if (std::abs(x) > 0.8) continue;
    const double r = sol.v.value(0, i) / std::sqrt(1 - x * x);
    s1 += r, s2 += r * r, ++count;
  }
  const double mean = s1 / count;
  const double cv = std::sqrt(std::max(0.0, s2 / count - mean * mean)) / mean;
  v.require(cv <= 0.02, fmt("std/mean %.3e (mean ratio %.5f)", cv, mean));

  // Oracle: quadrature of -L on the closed form (1 - x^2)_+^(1/2) on an 8x finer grid.
  const GridSpec fine = GridSpec::ball(1, 1.0, 8 * 2048);
  const NonlocalOperator op(make_fractional_kernel(1, 0.5), fine);
  const auto profile = SampledField::from_function(
      fine, 1, [](auto x, auto o) { o[0] = std::sqrt(std::max(0.0, 1 - x[0] * x[0])); }, ExteriorRule::zero());
  const ExteriorCoupling ext = op.couple(profile.exterior());
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < op.size(); i += 256) {
    if (std::abs(op.lattice().coord(i, 0)) > 0.8) continue;
    const double val = -op.apply_at(profile.component(0), ext, 0, i);
    lo = std::min(lo, val), hi = std::max(hi, val);
  }
  v.require(hi / lo - 1.0 <= 0.02, fmt("oracle -L profile in [%.4f, %.4f]", lo, hi));
  // v = profile / oracle value when the profile is the solution shape
  const double predicted = 2.0 / (lo + hi);
  v.require(std::abs(mean / predicted - 1.0) <= 0.02, fmt("mean ratio vs oracle %.4f", mean / predicted));
  return v;
}

const std::vector<std::pair<std::string, std::function<Verdict()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Verdict()>>> list = {
      {"square identity", square_identity},
      {"spectral cross-validation", spectral_cross_check},
      {"counterexample residual", counterexample},
      {"s -> 1 limit", s_limit},
      {"barrier maximum principle", barrier},
      {"Harnack uniformity", harnack},
      {"sphere-valued solver", sphere_solver},
      {"regularity probe", regularity_probe},
      {"scaling ledger", scaling},
      {"known-profile linear solve", known_profile},
  };
  return list;
}

bool run_one(int n) {
  const auto& [name, fn] = criteria()[n - 1];
  Verdict v;
  try {
    v = fn();
  } catch (const std::exception& e) {
    v.require(false, std::string("exception: ") + e.what());
  }
  std::printf("%s criterion %d (%s): %s\n", v.pass ? "PASS" : "FAIL", n, name.c_str(), v.detail.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "run a single criterion (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);
  bool ok = true;
  if (criterion) {
    ok = run_one(criterion);
  } else {
    for (int n = 1; n <= static_cast<int>(criteria().size()); ++n) ok = run_one(n) && ok;
  }
  return ok ? 0 : 1;
}
