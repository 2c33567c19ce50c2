#pragma once

// Numerical probes of the regularity argument: structural condition, Harnack
// ratios, the one-step contraction of the image ball, the dyadic oscillation
// ledger and the scaling of the growth constants.

#include <functional>
#include <optional>
#include <vector>

#include "fracsys/grid.hpp"
#include "fracsys/nonlocal.hpp"

namespace fracsys {

/// Growth constants of the right-hand side F(x, u) of the system:
///   |F| <= a B(u,u) + b          (small 2s growth)
///   u . F <= a* B(u,u) + b*      (one-sided growth)
///   |u| <= M.
struct GrowthBounds {
  double a = 1.0;
  double b = 0.0;
  double a_star = 0.0;
  double b_star = 0.0;
  double M = 1.0;
  /// Replaces the derived l for synthetic sweeps.
  std::optional<double> l_override;

  /// l = (a* + M) / 2.
  double l() const { return l_override ? *l_override : 0.5 * (a_star + M); }
  double structural() const { return a * M + a_star; }
  void validate() const;
};

struct StructuralAudit {
  double structural = 0.0;
  bool satisfied = false;
  double margin = 0.0;
};

StructuralAudit structural_audit(const GrowthBounds& bounds);

/// M -> mu M, b* -> mu^2 t^{2s} b*, b -> mu t^{2s} b, a* -> mu^2 a*, a -> mu a.
GrowthBounds scaling_ledger(const GrowthBounds& bounds, double mu, double t, double s);

struct HarnackReport {
  double ratio = 1.0;
  std::vector<double> s_values;
  std::vector<double> ratios_by_s;
  /// Most negative -L h seen in the supersolution check, relative to scale.
  double worst_supersolution_defect = 0.0;
};

/// sup / inf of h over the nodes of `ball`. h must be nonnegative at the nodes and
/// on its exterior, and satisfy -L h >= -tol * scale at interior nodes, where
/// scale = ||h||_inf * (largest row mass).
HarnackReport harnack_probe(const NonlocalOperator& op, const SampledField& h, const Ball& ball, double tol = 1e-6);

/// Runs `build(s)` for each s and probes the returned supersolution.
HarnackReport harnack_sweep(const std::vector<double>& s_values,
                            const std::function<std::pair<NonlocalOperator, SampledField>(double)>& build,
                            const Ball& ball, double tol = 1e-6);

struct ContractionReport {
  /// min(delta_geometric, delta_cap).
  double delta_observed = 0.0;
  /// Largest delta in [0, 1] with every value of u on the ball inside B_{M(1-delta)}(delta ubar).
  double delta_geometric = 0.0;
  /// Ceiling from the contraction estimate with unit Harnack constant:
  /// (1 - l) / (2 (M + 1 - l)); nonincreasing in l.
  double delta_cap = 0.0;
  std::vector<double> mean;
  std::vector<double> new_center;
  bool contained = false;
  /// max |u| reaches M, so containment at delta = 0 is an equality.
  bool at_boundary = false;
};

ContractionReport contraction_step(const SampledField& u, const GrowthBounds& bounds, const Ball& ball);

struct DecayLedger {
  std::vector<int> levels;
  std::vector<double> ball_radii;
  std::vector<std::vector<double>> centers;
  std::vector<double> radii;
  std::vector<double> osc;
  double delta_fit = 0.0;
  double alpha_fit = 0.0;
  /// max over k of M_{k+1} - M_k (1 - delta_fit), clipped at 0.
  double slack = 0.0;
  bool containment = true;
  /// (1 - l) sum_{i <= k} 2^{-s i} per level.
  std::vector<double> shift_budget;
  /// |rho_k| + M_k <= M + shift_budget_k at every level.
  bool shift_bound_holds = true;
  /// M_k <= M (1 - delta_fit / 2) at every level (radius bound without exponent).
  bool radius_bound_flat = true;
  /// M_k <= M (1 - delta_fit / 2^s)^k at every level.
  bool radius_bound_geometric = true;
  /// |mean of u| on the finest ball.
  double finest_mean_norm = 0.0;
};

struct LedgerOptions {
  double base_radius = 1.0;
  /// Order used for the 2^{-s i} shift budget.
  double s = 0.5;
  /// A level is resolvable when its ball radius is at least this many cells.
  double min_cells = 2.0;
};

/// Enclosing balls of u(B_{2^{-k} r}(x0)) for k = 0..levels with a least-squares fit of
/// log M_k against k over k >= 1: delta = 1 - exp(slope), alpha = -slope / ln 2.
DecayLedger dyadic_ledger(const SampledField& u, std::span<const double> x0, int levels, const GrowthBounds& bounds,
                          const LedgerOptions& opt = {});

struct BarrierReport {
  SampledField v;
  double L_bound = 0.0;
  /// Shift constant entering the contracted radius M (1 - delta) + tau b; tau = 2 L.
  double tau = 0.0;
};

/// Solves -L v = -1 in the grid's ball with zero exterior data; L = max |v| on B_1.
BarrierReport barrier_bound(const NonlocalOperator& op);

/// Smallest d >= 0 with 2^{-d} b tau (1 + M) <= min{1 - l, ((2^s - 1)/2^s) M delta}.
int head_start_level(const GrowthBounds& bounds, double tau, double delta, double s);

}  // namespace fracsys
