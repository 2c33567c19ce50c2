#include "fracsys/verification.hpp"

#include <algorithm>
#include <cmath>

#include "fracsys/error.hpp"

namespace fracsys {

double SmoothedSign::operator()(double x) const {
  const double t = n_smooth * x;
  if (t >= 1.0) return 1.0;
  if (t <= -1.0) return -1.0;
  const double t2 = t * t;
  return t * (15.0 - 10.0 * t2 + 3.0 * t2 * t2) / 8.0;
}

SampledField smoothed_sign_field(const SmoothedSign& phi, const GridSpec& grid) {
  if (grid.dim != 1 || grid.periodic) throw DomainError("the smoothed sign lives on a 1D ball grid");
  if (grid.radius < 1.0 / phi.n_smooth) throw DomainError("grid must contain the smoothing interval");
  return SampledField::from_function(
      grid, 1, [&](std::span<const double> x, std::span<double> out) { out[0] = phi(x[0]); }, ExteriorRule::sign());
}

SquareIdentityReport square_identity_check(const NonlocalOperator& op, const SampledField& v) {
  if (v.components() != 1) throw DomainError("square identity is checked on scalar fields");
  const std::size_t n = v.size();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = v.value(0, i) * v.value(0, i);
  const SampledField v2(v.lattice_ptr(), 1, std::move(sq), v.exterior().squared());
  const ExteriorCoupling ev = op.couple(v.exterior());
  const ExteriorCoupling ev2 = op.couple(v2.exterior());
  const std::vector<double> Lv = op.apply(v, ev);
  const std::vector<double> Lv2 = op.apply(v2, ev2);
  const std::vector<double> B = op.bilinear_self(v, ev);
  SquareIdentityReport r;
  for (std::size_t i = 0; i < n; ++i) {
    const double vl = v.value(0, i) * Lv[i];
    r.max_residual = std::max(r.max_residual, std::abs(-Lv2[i] + 2.0 * vl + 2.0 * B[i]));
    r.scale = std::max(r.scale, std::abs(Lv2[i]) + 2.0 * std::abs(vl) + 2.0 * B[i]);
  }
  r.relative = r.scale > 0.0 ? r.max_residual / r.scale : 0.0;
  return r;
}

SignAlgebraReport sign_algebra_check(double x, double y) {
  if (x == 0.0 || y == 0.0) throw DomainError("sign identities need nonzero arguments");
  SignAlgebraReport r;
  r.phi_x = x > 0.0 ? 1.0 : -1.0;
  r.phi_y = y > 0.0 ? 1.0 : -1.0;
  const double d = r.phi_x - r.phi_y;
  r.lhs = r.phi_x * d * d;
  r.rhs = 2.0 * r.phi_x * d;
  r.literal_holds = r.lhs == r.rhs;
  r.square_form_holds = d * d == 2.0 * r.phi_x * d;
  r.weighted_form_holds = r.phi_x * d * d == 2.0 * d;
  r.holds = r.square_form_holds && r.weighted_form_holds;
  return r;
}

CounterexampleReport counterexample_residual(int n_smooth, double s, double r_min, double r_max,
                                             const CounterexampleOptions& opt) {
  if (n_smooth < 1) throw DomainError("smoothing index must be positive");
  if (!(r_min >= 1.0 / n_smooth)) throw DomainError("residual band intersects the smoothing interval |x| < 1/n");
  if (!(r_max > r_min) || r_max >= opt.radius) throw DomainError("residual band must lie inside the grid");
  if (opt.cells_per_width < 1) throw DomainError("cells_per_width must be positive");
  const double h = 1.0 / (double(n_smooth) * opt.cells_per_width);
  const int cells = static_cast<int>(std::lround(2.0 * opt.radius / h));
  const GridSpec grid = GridSpec::ball(1, opt.radius, cells);
  const SampledField phi = smoothed_sign_field(SmoothedSign{n_smooth}, grid);
  const NonlocalOperator op(make_fractional_kernel(1, s), phi.lattice_ptr());
  const ExteriorCoupling ext = op.couple(phi.exterior());
  const std::vector<double> Lphi = op.apply(phi, ext);
  const std::vector<double> B = op.bilinear_self(phi, ext);
  CounterexampleReport r;
  r.n_smooth = n_smooth;
  r.s = s;
  r.h = grid.h;
  r.band_clear = r_min > 2.0 / n_smooth;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double x = phi.lattice().coord(i, 0);
    if (std::abs(x) < r_min || std::abs(x) > r_max) continue;
    const double d = -Lphi[i];
    const double res = std::abs(d - phi.value(0, i) * B[i]);
    r.scale = std::max(r.scale, std::abs(d));
    if (res > r.max_residual) r.max_residual = res, r.worst_x = x;
  }
  return r;
}

namespace {

LimitReport run_limit(const SampledField& v, const Eigen::MatrixXd* A, const std::vector<double>& s_values) {
  if (!v.grid().periodic) throw DomainError("s -> 1 studies need a periodic field");
  if (v.components() != 1) throw DomainError("s -> 1 studies use scalar fields");
  if (s_values.size() < 2) throw DomainError("s -> 1 study needs at least two values of s");
  const int dim = v.grid().dim;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd& mat = A ? *A : I;
  // sum (A A^T)_ij d_ij v has symbol -|A^T xi|^2.
  const SampledField limit = spectral_multiplier(v, mat, 2.0);
  LimitReport r;
  for (std::size_t i = 0; i < v.size(); ++i) r.limit_scale = std::max(r.limit_scale, std::abs(limit.value(0, i)));
  for (double s : s_values) {
    if (!(s > 0.5 && s < 1.0)) throw DomainError("s -> 1 study needs s in (0.5, 1)");
    const KernelSpec K = A ? make_anisotropic_kernel(*A, s) : make_fractional_kernel(dim, s);
    const NonlocalOperator op(K, v.lattice_ptr());
    const std::vector<double> Lv = op.apply(v, op.couple(v.exterior()));
    const SampledField spec = spectral_apply(v, K);
    double err = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      err = std::max(err, std::abs(Lv[i] + limit.value(0, i)));
      quad = std::max(quad, std::abs(-Lv[i] - spec.value(0, i)));
    }
    r.s_values.push_back(s);
    r.errors.push_back(err);
    r.quadrature_errors.push_back(quad);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double k = static_cast<double>(r.s_values.size());
  for (std::size_t i = 0; i < r.s_values.size(); ++i) {
    const double x = std::log(1.0 - r.s_values[i]);
    const double y = std::log(std::max(r.errors[i], 1e-300));
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  r.fitted_rate = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return r;
}

}  // namespace

LimitReport s_limit_isotropic(const SampledField& v, const std::vector<double>& s_values) {
  return run_limit(v, nullptr, s_values);
}

LimitReport s_limit_anisotropic(const SampledField& v, const Eigen::MatrixXd& A, const std::vector<double>& s_values) {
  if (v.grid().dim != 2) throw DomainError("anisotropic limit study is two-dimensional");
  return run_limit(v, &A, s_values);
}

}  // namespace fracsys
