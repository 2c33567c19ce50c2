#include "fracsys/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fracsys/error.hpp"
#include "fracsys/solvers.hpp"

namespace fracsys {

void GrowthBounds::validate() const {
  for (double v : {a, b, a_star, b_star})
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("growth constants a, b, a*, b* must be finite and >= 0");
  if (!(M > 0.0) || !std::isfinite(M)) throw DomainError("bound M must be positive");
  if (l_override && !std::isfinite(*l_override)) throw DomainError("l must be finite");
}

StructuralAudit structural_audit(const GrowthBounds& bounds) {
  bounds.validate();
  StructuralAudit r;
  r.structural = bounds.structural();
  r.satisfied = r.structural < 2.0;
  r.margin = 2.0 - r.structural;
  return r;
}

GrowthBounds scaling_ledger(const GrowthBounds& bounds, double mu, double t, double s) {
  if (!(mu > 0.0) || !(t > 0.0)) throw DomainError("scaling needs mu > 0 and t > 0");
  const double t2s = std::pow(t, 2.0 * s);
  GrowthBounds out = bounds;
  out.M = mu * bounds.M;
  out.b_star = mu * mu * t2s * bounds.b_star;
  out.b = mu * t2s * bounds.b;
  out.a_star = mu * mu * bounds.a_star;
  out.a = mu * bounds.a;
  out.l_override.reset();
  return out;
}

HarnackReport harnack_probe(const NonlocalOperator& op, const SampledField& h, const Ball& ball, double tol) {
  if (h.components() != 1) throw DomainError("Harnack probe needs a scalar field");
  if (!(h.grid() == op.lattice().grid())) throw DomainError("field and operator live on different grids");
  const std::size_t n = h.size();
  for (std::size_t i = 0; i < n; ++i)
    if (h.value(0, i) < 0.0) throw DomainError("Harnack probe needs h >= 0; negative at node " + std::to_string(i));
  if (!op.periodic()) {
    // Exterior data on the collar reached by the stencil and in the far field.
    const Lattice& lat = op.lattice();
    const int dim = lat.dim();
    int half = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (int a = 0; a < dim; ++a) half = std::max(half, std::abs(lat.index(i)[a]));
    half += 4;
    for (int j = (dim == 2 ? -half : 0); j <= (dim == 2 ? half : 0); ++j)
      for (int i = -half; i <= half; ++i)
        if (!lat.interior({i, j}) && h.node_value(0, {i, j}) < 0.0)
          throw DomainError("Harnack probe needs h >= 0 on the exterior");
    double far = 0.0;
    for (const TailDirection& t : op.scheme().tail()) {
      h.exterior().far_field(std::span<const double>(t.dir.data(), dim), std::span<double>(&far, 1));
      if (far < 0.0) throw DomainError("Harnack probe needs h >= 0 in the far field");
    }
  }
  const std::vector<double> Lh = op.apply(h, op.couple(h.exterior()));
  double hmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) hmax = std::max(hmax, h.value(0, i));
  const double scale = std::max(hmax * op.max_row_mass(), std::numeric_limits<double>::min());
  HarnackReport rep;
  std::size_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = -Lh[i] / scale;
    if (d < rep.worst_supersolution_defect) rep.worst_supersolution_defect = d, worst = i;
  }
  if (rep.worst_supersolution_defect < -tol) {
    std::ostringstream msg;
    msg << "supersolution check failed: -L h = " << -Lh[worst] << " at node " << worst << " (x = "
        << op.lattice().coord(worst, 0) << ")";
    throw DomainError(msg.str());
  }
  const std::vector<std::size_t> nodes = nodes_in_ball(op.lattice(), ball);
  if (nodes.empty()) throw DomainError("Harnack ball contains no grid nodes");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i : nodes) lo = std::min(lo, h.value(0, i)), hi = std::max(hi, h.value(0, i));
  rep.ratio = hi == lo ? 1.0 : (lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity());
  return rep;
}

HarnackReport harnack_sweep(const std::vector<double>& s_values,
                            const std::function<std::pair<NonlocalOperator, SampledField>(double)>& build,
                            const Ball& ball, double tol) {
  HarnackReport rep;
  rep.ratio = 1.0;
  for (double s : s_values) {
    const auto [op, h] = build(s);
    const HarnackReport one = harnack_probe(op, h, ball, tol);
    rep.s_values.push_back(s);
    rep.ratios_by_s.push_back(one.ratio);
    rep.ratio = std::max(rep.ratio, one.ratio);
    rep.worst_supersolution_defect = std::min(rep.worst_supersolution_defect, one.worst_supersolution_defect);
  }
  return rep;
}

ContractionReport contraction_step(const SampledField& u, const GrowthBounds& bounds, const Ball& ball) {
  bounds.validate();
  const double l = bounds.l();
  if (!(l < 1.0)) throw DomainError("contraction step needs l < 1");
  const double M = bounds.M;
  const int m = u.components();
  const std::vector<double> pts = image_points(u, ball);
  const std::size_t count = pts.size() / m;
  double max_norm = 0.0;
  for (std::size_t p = 0; p < count; ++p) {
    double r2 = 0.0;
    for (int c = 0; c < m; ++c) r2 += pts[p * m + c] * pts[p * m + c];
    const double r = std::sqrt(r2);
    if (r > M * (1.0 + 1e-12)) throw DomainError("|u| <= M violated on the ball");
    max_norm = std::max(max_norm, r);
  }

  ContractionReport rep;
  rep.mean = field_average(u, ball);
  // f(delta) = max |u - delta ubar| + M delta - M is convex with f(0) <= 0, so the
  // feasible deltas form an interval [0, delta_geometric].
  auto f = [&](double delta) {
    double worst = 0.0;
    for (std::size_t p = 0; p < count; ++p) {
      double r2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double d = pts[p * m + c] - delta * rep.mean[c];
        r2 += d * d;
      }
      worst = std::max(worst, r2);
    }
    return std::sqrt(worst) + M * delta - M;
  };
  const double tol = 1e-13 * M;
  rep.at_boundary = max_norm >= M * (1.0 - 1e-12);
  if (f(1.0) <= tol) {
    rep.delta_geometric = 1.0;
  } else {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) <= tol ? lo : hi) = mid;
    }
    rep.delta_geometric = lo;
  }
  rep.delta_cap = 0.5 * (1.0 - l) / (M + 1.0 - l);
  rep.delta_observed = std::min(rep.delta_geometric, rep.delta_cap);
  rep.contained = rep.delta_observed > 0.0;
  rep.new_center = rep.mean;
  for (double& c : rep.new_center) c *= rep.delta_observed;
  return rep;
}

DecayLedger dyadic_ledger(const SampledField& u, std::span<const double> x0, int levels, const GrowthBounds& bounds,
                          const LedgerOptions& opt) {
  bounds.validate();
  if (static_cast<int>(x0.size()) != u.grid().dim) throw DomainError("ledger center has the wrong dimension");
  if (levels < 0) throw DomainError("ledger needs a nonnegative level count");
  DecayLedger led;
  const int m = u.components();
  const double h = u.grid().h;
  for (int k = 0; k <= levels; ++k) {
    const double r = opt.base_radius * std::ldexp(1.0, -k);
    if (r < opt.min_cells * h) break;
    const BallStat st = ball_image_stats(u, Ball{std::vector<double>(x0.begin(), x0.end()), r});
    led.levels.push_back(k);
    led.ball_radii.push_back(r);
    led.centers.push_back(st.enclosing_center);
    led.radii.push_back(st.enclosing_radius);
    led.osc.push_back(st.osc);
    double mn = 0.0;
    for (double v : st.mean) mn += v * v;
    led.finest_mean_norm = std::sqrt(mn);
  }
  const int K = static_cast<int>(led.levels.size());
  if (K < 3) throw DomainError("fewer than 3 dyadic levels are resolvable on this grid");

  // Least squares of log M_k on k over k >= 1.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const int cnt = K - 1;
  for (int k = 1; k < K; ++k) {
    const double y = std::log(std::max(led.radii[k], 1e-300));
    sx += k, sy += y, sxx += double(k) * k, sxy += k * y;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  led.delta_fit = 1.0 - std::exp(slope);
  led.alpha_fit = -slope / std::numbers::ln2 + 0.0;  // no negative zero in reports

  const double l = bounds.l();
  const double M = bounds.M;
  double budget = 0.0;
  for (int k = 0; k < K; ++k) {
    if (k > 0) budget += (1.0 - l) * std::pow(2.0, -opt.s * k);
    led.shift_budget.push_back(budget);
    double rho = 0.0;
    for (double c : led.centers[k]) rho += c * c;
    rho = std::sqrt(rho);
    const double tiny = 1e-12 * M;
    if (rho + led.radii[k] > M + budget + tiny) led.shift_bound_holds = false;
    if (k >= 1 && led.radii[k] > M * (1.0 - 0.5 * led.delta_fit) + tiny) led.radius_bound_flat = false;
    if (led.radii[k] > M * std::pow(1.0 - led.delta_fit / std::pow(2.0, opt.s), k) + tiny)
      led.radius_bound_geometric = false;
    if (k + 1 < K) {
      led.slack = std::max(led.slack, led.radii[k + 1] - led.radii[k] * (1.0 - led.delta_fit));
      const std::vector<double> inner =
          image_points(u, Ball{std::vector<double>(x0.begin(), x0.end()), led.ball_radii[k + 1]});
      for (std::size_t p = 0; p < inner.size() / m; ++p) {
        double d2 = 0.0;
        for (int c = 0; c < m; ++c) {
          const double d = inner[p * m + c] - led.centers[k][c];
          d2 += d * d;
        }
        if (std::sqrt(d2) > led.radii[k] * (1.0 + 1e-10) + 1e-10) led.containment = false;
      }
    }
  }
  return led;
}

BarrierReport barrier_bound(const NonlocalOperator& op) {
  if (op.periodic()) throw DomainError("barrier needs a ball grid");
  const std::vector<double> rhs(op.size(), -1.0);
  LinearSolution sol = solve_linear_dirichlet(op, rhs, ExteriorRule::zero());
  double L = 0.0;
  const int dim = op.lattice().dim();
  for (std::size_t i = 0; i < op.size(); ++i) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += op.lattice().coord(i, a) * op.lattice().coord(i, a);
    if (r2 <= 1.0) L = std::max(L, std::abs(sol.v.value(0, i)));
  }
  return {std::move(sol.v), L, 2.0 * L};
}

int head_start_level(const GrowthBounds& bounds, double tau, double delta, double s) {
  bounds.validate();
  const double lhs = bounds.b * tau * (1.0 + bounds.M);
  if (lhs == 0.0) return 0;
  const double two_s = std::pow(2.0, s);
  const double rhs = std::min(1.0 - bounds.l(), (two_s - 1.0) / two_s * bounds.M * delta);
  if (!(rhs > 0.0)) throw DomainError("head-start level needs l < 1 and delta > 0");
  int d = std::max(0, static_cast<int>(std::ceil(std::log2(lhs / rhs))));
  while (std::ldexp(lhs, -d) > rhs) ++d;
  while (d > 0 && std::ldexp(lhs, -(d - 1)) <= rhs) --d;
  return d;
}

}  // namespace fracsys
