#include "fracsys/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fracsys/error.hpp"
#include "fracsys/gauss.hpp"

namespace fracsys {
namespace {

void check_order(double s) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("order parameter out of range: s must lie in (0,1)");
}

double norm(std::span<const double> y) {
  double acc = 0.0;
  for (double v : y) acc += v * v;
  return std::sqrt(acc);
}

}  // namespace

NormalizationConstant normalization_constant(int n, double s) {
  check_order(s);
  if (n < 1) throw DomainError("dimension must be at least 1");
  NormalizationConstant c;
  c.n = n;
  c.s = s;
  // s 4^s Gamma(n/2 + s) / (pi^{n/2} Gamma(1 - s)), evaluated in logs for small 1-s.
  const double log_value = std::log(s) + s * std::log(4.0) + std::lgamma(0.5 * n + s) -
                           0.5 * n * std::log(std::numbers::pi) - std::lgamma(1.0 - s);
  c.value = std::exp(log_value);
  return c;
}

double KernelSpec::profile(std::span<const double> y) const {
  switch (kind_) {
    case KernelKind::fractional:
      return c_ns_;
    case KernelKind::anisotropic: {
      double z2 = 0.0;
      for (int i = 0; i < dim_; ++i) {
        double zi = 0.0;
        for (int j = 0; j < dim_; ++j) zi += A_inv_(i, j) * y[j];
        z2 += zi * zi;
      }
      const double ratio = norm(y) / std::sqrt(z2);
      return c_ns_ / std::abs(det_) * std::pow(ratio, dim_ + 2.0 * s_);
    }
    case KernelKind::custom:
      return radial_profile_(norm(y));
  }
  return 0.0;
}

double KernelSpec::operator()(std::span<const double> y) const {
  const double r = norm(y);
  if (r == 0.0) throw DomainError("kernel evaluated at the origin");
  return profile(y) * std::pow(r, -(dim_ + 2.0 * s_));
}

double KernelSpec::radial_integral(std::span<const double> theta, double p, double r0,
                                   double r1) const {
  const bool infinite = std::isinf(r1);
  if (infinite && !(p < -1.0)) throw DomainError("radial integral diverges at infinity");
  if (r0 == 0.0 && !(p > -1.0)) throw DomainError("radial integral diverges at the origin");
  if (homogeneous()) {
    const double q = p + 1.0;
    const double upper = infinite ? 0.0 : std::pow(r1, q);
    return profile(theta) * (upper - std::pow(r0, q)) / q;
  }
  const GaussRule& g = gauss_legendre(48);
  double acc = 0.0;
  if (r0 == 0.0 || infinite) {
    // r = r_ref t^{1/(p+1)} maps t in (0,1] onto the interval and absorbs r^p dr.
    const double q = p + 1.0;
    const double r_ref = infinite ? r0 : r1;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double t = 0.5 * (g.nodes[i] + 1.0);
      acc += 0.5 * g.weights[i] * radial_profile_(r_ref * std::pow(t, 1.0 / q));
    }
    return acc * std::pow(r_ref, q) / std::abs(q);
  }
  const double mid = 0.5 * (r0 + r1), half = 0.5 * (r1 - r0);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double r = mid + half * g.nodes[i];
    acc += g.weights[i] * radial_profile_(r) * std::pow(r, p);
  }
  return acc * half;
}

KernelSpec make_fractional_kernel(int n, double s) {
  const NormalizationConstant c = normalization_constant(n, s);
  KernelSpec k;
  k.kind_ = KernelKind::fractional;
  k.dim_ = n;
  k.s_ = s;
  k.c_ns_ = c.value;
  k.lambda_ = k.Lambda_ = c.c_n();
  k.name_ = "fractional";
  k.A_ = Eigen::MatrixXd::Identity(n, n);
  k.A_inv_ = k.A_;
  return k;
}

KernelSpec make_anisotropic_kernel(const Eigen::MatrixXd& A, double s) {
  if (A.rows() != A.cols() || A.rows() < 1) throw DomainError("anisotropic kernel needs a square matrix");
  const int n = static_cast<int>(A.rows());
  const NormalizationConstant c = normalization_constant(n, s);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const double sigma_max = svd.singularValues()(0);
  const double sigma_min = svd.singularValues()(n - 1);
  if (!(sigma_min > 1e-14 * sigma_max)) throw DomainError("anisotropic kernel matrix is singular");
  KernelSpec k;
  k.kind_ = KernelKind::anisotropic;
  k.dim_ = n;
  k.s_ = s;
  k.c_ns_ = c.value;
  k.A_ = A;
  k.A_inv_ = A.inverse();
  k.det_ = A.determinant();
  // |y| / |A^{-1} y| ranges over [sigma_min, sigma_max].
  const double e = n + 2.0 * s;
  k.lambda_ = c.c_n() * std::pow(sigma_min, e) / std::abs(k.det_);
  k.Lambda_ = c.c_n() * std::pow(sigma_max, e) / std::abs(k.det_);
  k.name_ = "anisotropic";
  return k;
}

KernelSpec make_custom_kernel(int n, double s, std::function<double(double)> profile, double lambda,
                              double Lambda, std::string name) {
  check_order(s);
  if (n < 1) throw DomainError("dimension must be at least 1");
  if (!(lambda > 0.0 && lambda <= Lambda)) throw DomainError("custom kernel needs 0 < lambda <= Lambda");
  if (!profile) throw DomainError("custom kernel needs a profile");
  KernelSpec k;
  k.kind_ = KernelKind::custom;
  k.dim_ = n;
  k.s_ = s;
  k.c_ns_ = normalization_constant(n, s).value;
  k.lambda_ = lambda;
  k.Lambda_ = Lambda;
  k.radial_profile_ = std::move(profile);
  k.name_ = std::move(name);
  k.A_ = Eigen::MatrixXd::Identity(n, n);
  k.A_inv_ = k.A_;
  return k;
}

BoundsReport kernel_bounds_check(const KernelSpec& kernel, std::span<const double> points) {
  const auto n = static_cast<std::size_t>(kernel.dim());
  if (points.empty() || points.size() % n != 0) throw DomainError("bounds check needs a nonempty sample set");
  BoundsReport report;
  const double lower = (1.0 - kernel.s()) * kernel.lambda();
  const double upper = (1.0 - kernel.s()) * kernel.Lambda();
  std::vector<double> neg(n);
  for (std::size_t i = 0; i < points.size(); i += n) {
    const auto y = points.subspan(i, n);
    for (std::size_t d = 0; d < n; ++d) neg[d] = -y[d];
    const double k_pos = kernel(y);
    const double k_neg = kernel(neg);
    if (k_pos != k_neg) report.symmetric = false;
    const double p = kernel.profile(y);
    report.worst_ratio = std::max({report.worst_ratio, p / upper, lower / p});
  }
  // Profiles built from closed forms may round a hair past an equality bound.
  report.within_bounds = report.worst_ratio <= 1.0 + 1e-12;
  return report;
}

}  // namespace fracsys
