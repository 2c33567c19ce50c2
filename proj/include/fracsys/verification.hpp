#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fracsys/grid.hpp"
#include "fracsys/nonlocal.hpp"

namespace fracsys {

/// Odd C^2 approximation of sign(x): equal to sign(x) for |x| >= 1/n and to the
/// quintic (15 t - 10 t^3 + 3 t^5) / 8, t = n x, inside.
struct SmoothedSign {
  int n_smooth = 8;
  double operator()(double x) const;
};

/// The smoothed sign sampled on a 1D ball grid, with sign(x) as exterior data.
SampledField smoothed_sign_field(const SmoothedSign& phi, const GridSpec& grid);

struct SquareIdentityReport {
  /// max over nodes of |-L(v^2) + 2 v L v + 2 B(v, v)|
  double max_residual = 0.0;
  /// max over nodes of |L(v^2)| + 2 |v L v| + 2 B(v, v)
  double scale = 0.0;
  double relative = 0.0;
};

SquareIdentityReport square_identity_check(const NonlocalOperator& op, const SampledField& v);

struct SignAlgebraReport {
  double phi_x = 0.0, phi_y = 0.0;
  /// Phi(x)(Phi(x) - Phi(y))^2 and 2 Phi(x)(Phi(x) - Phi(y)).
  double lhs = 0.0, rhs = 0.0;
  /// lhs == rhs.
  bool literal_holds = false;
  /// (Phi(x) - Phi(y))^2 == 2 Phi(x)(Phi(x) - Phi(y)).
  bool square_form_holds = false;
  /// Phi(x)(Phi(x) - Phi(y))^2 == 2 (Phi(x) - Phi(y)).
  bool weighted_form_holds = false;
  /// Both identities that use Phi^2 = 1 hold.
  bool holds = false;
};

SignAlgebraReport sign_algebra_check(double x, double y);

struct CounterexampleOptions {
  /// Interior radius of the 1D grid.
  double radius = 2.0;
  /// Grid cells per smoothing half-width 1/n.
  int cells_per_width = 16;
};

struct CounterexampleReport {
  int n_smooth = 0;
  double s = 0.0;
  /// max over the band of |(-Delta)^s Phi_n - Phi_n B(Phi_n, Phi_n)|
  double max_residual = 0.0;
  /// max over the band of |(-Delta)^s Phi_n|
  double scale = 0.0;
  double worst_x = 0.0;
  double h = 0.0;
  /// r_min > 2/n, i.e. the band also avoids the doubled smoothing interval.
  bool band_clear = false;
};

/// Band r_min <= |x| <= r_max; the band must avoid the smoothing interval |x| < 1/n.
CounterexampleReport counterexample_residual(int n_smooth, double s, double r_min, double r_max,
                                             const CounterexampleOptions& opt = {});

struct LimitReport {
  std::vector<double> s_values;
  /// max |L_s v - sum a_ij d_ij v| per s.
  std::vector<double> errors;
  /// max |quadrature - spectral| at the same s, isolating the discretization error.
  std::vector<double> quadrature_errors;
  /// Slope of log(error) against log(1 - s).
  double fitted_rate = 0.0;
  /// max |sum a_ij d_ij v|
  double limit_scale = 0.0;
};

/// v periodic and smooth; s values in (0.5, 1).
LimitReport s_limit_isotropic(const SampledField& v, const std::vector<double>& s_values);
LimitReport s_limit_anisotropic(const SampledField& v, const Eigen::MatrixXd& A, const std::vector<double>& s_values);

}  // namespace fracsys
