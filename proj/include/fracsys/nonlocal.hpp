#pragma once

// Discrete L_K, (-Delta)^s, B_K and E_s on a lattice.
//
// With the lattice weights w_k of a QuadratureScheme:
//
//   L u(x)    = sum_k w_k (u(x + h k) - u(x))
//   B(u,w)(x) = 1/2 sum_k w_k (u(x) - u(x + h k)) . (w(x) - w(x + h k))
//
// L and B share their weights, so -L(v^2) + 2 v L v + 2 B(v, v) = 0 holds node by
// node up to rounding. Offsets that leave the interior read the exterior rule;
// the contribution of the exterior is condensed per node into an ExteriorCoupling.

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "fracsys/grid.hpp"
#include "fracsys/kernel.hpp"
#include "fracsys/quadrature.hpp"

namespace fracsys {

/// Exterior data seen from each interior node:
///   mass   = sum over exterior offsets of w_k, plus the tail mass
///   first  = sum w_k g(x + h k) + tail integral of K g_far      (per component)
///   second = sum w_k |g(x + h k)|^2 + tail integral of K |g_far|^2
struct ExteriorCoupling {
  int m = 1;
  std::vector<double> mass;
  std::vector<double> first;  ///< component-major, m * nodes
  std::vector<double> second;
  /// Per node bound on the error of replacing g by its far-field limit beyond the truncation box.
  std::vector<double> truncation;
  /// The data value when the rule is constant (empty otherwise); lets constant
  /// data cancel exactly.
  std::vector<double> constant;

  std::span<const double> first_component(int c) const {
    return std::span<const double>(first).subspan(static_cast<std::size_t>(c) * mass.size(), mass.size());
  }
};

struct EnergyValue {
  double interior_part = 0.0;
  double tail_part = 0.0;
  double total = 0.0;
};

struct PointValue {
  double value = 0.0;
  double truncation_error = 0.0;
};

class NonlocalOperator {
 public:
  NonlocalOperator(KernelSpec kernel, std::shared_ptr<const Lattice> lattice);
  NonlocalOperator(KernelSpec kernel, const GridSpec& grid);

  const KernelSpec& kernel() const { return kernel_; }
  const Lattice& lattice() const { return *lattice_; }
  std::shared_ptr<const Lattice> lattice_ptr() const { return lattice_; }
  const QuadratureScheme& scheme() const { return scheme_; }
  bool periodic() const { return lattice_->grid().periodic; }
  std::size_t size() const { return lattice_->size(); }

  /// Sum of weights towards other interior nodes.
  double interior_mass(std::size_t node) const { return interior_mass_[node]; }
  /// Largest total weight seen by a node (interior plus exterior plus tail).
  double max_row_mass() const { return max_row_mass_; }

  ExteriorCoupling couple(const ExteriorRule& g) const;
  /// Per node sum w_k g_a(x + h k) . g_b(x + h k) over the exterior, tail included.
  std::vector<double> cross_second(const ExteriorRule& a, const ExteriorRule& b) const;

  /// L u at one node for component c (u_c is that component's interior values).
  double apply_at(std::span<const double> u_c, const ExteriorCoupling& ext, int c, std::size_t node) const;
  /// L u at every node, component-major.
  std::vector<double> apply(const SampledField& u, const ExteriorCoupling& ext) const;
  /// B(u, u) at every node (summed over components).
  std::vector<double> bilinear_self(const SampledField& u, const ExteriorCoupling& ext) const;
  /// B(u, w) at every node; `cross` comes from cross_second(u rule, w rule).
  std::vector<double> bilinear(const SampledField& u, const ExteriorCoupling& eu, const SampledField& w,
                               const ExteriorCoupling& ew, std::span<const double> cross) const;
  /// Interior-only part 1/2 sum over interior j of w (u_x - u_j)^2 at each node.
  std::vector<double> bilinear_interior(const SampledField& u) const;

  EnergyValue energy(const SampledField& u, const ExteriorCoupling& ext) const;
  /// h^n (-L u): the gradient of energy() with respect to the nodal values.
  std::vector<double> energy_gradient(const SampledField& u, const ExteriorCoupling& ext) const;

  /// Matrix A of -L on the interior: -L u = A u - first.
  Eigen::MatrixXd assemble() const;

 private:
  template <typename RowFn>
  void for_each_row(std::size_t node, RowFn&& fn) const;
  std::vector<double> periodic_row(int t1) const;

  KernelSpec kernel_;
  std::shared_ptr<const Lattice> lattice_;
  QuadratureScheme scheme_;
  std::vector<double> folded_;  ///< periodic layout: N rows of 2N doubled weights
  std::vector<double> interior_mass_;
  double max_row_mass_ = 0.0;
};

/// Reach (in cells) of the truncation box for a grid.
int truncation_reach(const GridSpec& grid);

// Pointwise entry points. The (field, kernel) overloads build a NonlocalOperator per
// call; reuse an operator for repeated evaluation.

/// L_K u(x) at an interior node for one component.
PointValue apply_LK(const NonlocalOperator& op, const SampledField& u, std::size_t node, int component = 0);
PointValue apply_LK(const SampledField& u, const KernelSpec& kernel, std::size_t node, int component = 0);

/// Same value computed offset by offset straight from the exterior rule; the
/// reference the condensed path is tested against.
PointValue apply_LK_reference(const NonlocalOperator& op, const SampledField& u, std::size_t node,
                              int component = 0);

/// (-Delta)^s u(x) = -L u(x) with the fractional kernel.
PointValue apply_fractional_laplacian(const SampledField& u, double s, std::size_t node, int component = 0);
/// (-Delta)^s u at every node, component-major.
std::vector<double> fractional_laplacian(const NonlocalOperator& op, const SampledField& u);

double bilinear_form(const NonlocalOperator& op, const SampledField& u, const SampledField& w, std::size_t node);
double bilinear_form(const SampledField& u, const SampledField& w, const KernelSpec& kernel, std::size_t node);

EnergyValue s_energy(const NonlocalOperator& op, const SampledField& u);
EnergyValue s_energy(const SampledField& u, double s);

/// Fourier multiplier |xi|^{2s} on a periodic field (componentwise).
SampledField spectral_apply(const SampledField& u, double s);
/// Multiplier |A^T xi|^{2s}: the exact symbol of -L for an anisotropic kernel
/// (the fractional kernel is the case A = I).
SampledField spectral_apply(const SampledField& u, const KernelSpec& kernel);
/// General multiplier |A^T xi|^p on a periodic field; p = 2 gives -sum (A A^T)_ij d_ij u.
SampledField spectral_multiplier(const SampledField& u, const Eigen::MatrixXd& A, double p);

}  // namespace fracsys
