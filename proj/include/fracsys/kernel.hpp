#pragma once

// Translation-invariant symmetric kernels of order 2s in the class K(lambda, Lambda):
//
//   (1-s) lambda |y|^{-(n+2s)} <= K(y) <= (1-s) Lambda |y|^{-(n+2s)},   K(y) = K(-y).
//
// Every kernel is stored as K(y) = profile(y) |y|^{-(n+2s)}, which keeps the
// singular factor explicit for the quadrature.

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fracsys {

enum class KernelKind { fractional, anisotropic, custom };

/// Normalization of the fractional Laplacian. `value` is c_{n,s} = (1-s) c_n, the
/// constant multiplying |y|^{-(n+2s)}; it makes the Fourier symbol exactly |xi|^{2s}.
struct NormalizationConstant {
  int n = 1;
  double s = 0.5;
  double value = 0.0;
  /// c_n = value / (1-s).
  double c_n() const { return value / (1.0 - s); }
};

NormalizationConstant normalization_constant(int n, double s);

class KernelSpec {
 public:
  KernelKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double s() const { return s_; }
  double lambda() const { return lambda_; }
  double Lambda() const { return Lambda_; }
  /// c_{n,s} for this (n, s).
  double c_ns() const { return c_ns_; }
  const std::string& name() const { return name_; }
  /// The matrix A of an anisotropic kernel (identity for the other kinds).
  const Eigen::MatrixXd& matrix() const { return A_; }

  /// K(y) |y|^{n+2s}. Bounded between (1-s) lambda and (1-s) Lambda.
  double profile(std::span<const double> y) const;
  /// K(y); y must be nonzero.
  double operator()(std::span<const double> y) const;
  /// True when the profile depends on the direction of y only.
  bool homogeneous() const { return kind_ != KernelKind::custom; }

  /// Integral of profile(r theta) r^p over r in [r0, r1]; r1 may be +infinity
  /// (requires p < -1) and r0 may be 0 (requires p > -1). `theta` is a unit vector.
  double radial_integral(std::span<const double> theta, double p, double r0, double r1) const;

 private:
  friend KernelSpec make_fractional_kernel(int n, double s);
  friend KernelSpec make_anisotropic_kernel(const Eigen::MatrixXd& A, double s);
  friend KernelSpec make_custom_kernel(int n, double s, std::function<double(double)> profile,
                                       double lambda, double Lambda, std::string name);

  KernelKind kind_ = KernelKind::fractional;
  int dim_ = 1;
  double s_ = 0.5;
  double lambda_ = 1.0;
  double Lambda_ = 1.0;
  double c_ns_ = 0.0;
  std::string name_;
  Eigen::MatrixXd A_;
  Eigen::MatrixXd A_inv_;
  double det_ = 1.0;
  std::function<double(double)> radial_profile_;
};

/// K(y) = c_{n,s} |y|^{-(n+2s)}; lambda = Lambda = c_n.
KernelSpec make_fractional_kernel(int n, double s);

/// K(z) = c_{n,s} / (|det A| |A^{-1} z|^{n+2s}). lambda and Lambda follow from the
/// extreme singular values of A.
KernelSpec make_anisotropic_kernel(const Eigen::MatrixXd& A, double s);

/// Radial kernel K(y) = profile(|y|) |y|^{-(n+2s)}. lambda and Lambda are the claimed
/// class bounds; they are checked by kernel_bounds_check, not enforced here.
KernelSpec make_custom_kernel(int n, double s, std::function<double(double)> profile, double lambda,
                              double Lambda, std::string name = "custom");

struct BoundsReport {
  bool symmetric = true;
  bool within_bounds = true;
  /// max over samples of max(K |y|^{n+2s} / ((1-s) Lambda), (1-s) lambda / (K |y|^{n+2s})).
  double worst_ratio = 0.0;
};

/// `points` holds samples row by row, dim() coordinates each; none may be the origin.
BoundsReport kernel_bounds_check(const KernelSpec& kernel, std::span<const double> points);

}  // namespace fracsys
