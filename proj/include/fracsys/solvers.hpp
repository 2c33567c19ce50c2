#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracsys/grid.hpp"
#include "fracsys/kernel.hpp"
#include "fracsys/nonlocal.hpp"

namespace fracsys {

struct SolveReport {
  int iterations = 0;
  /// Max-norm residual of the equation being solved.
  double final_residual = 0.0;
  /// Residual that the stopping rule is measured against (initial residual for flows, ||rhs|| for linear).
  double residual_scale = 0.0;
  std::vector<double> energy_trace;
  /// max over interior nodes of ||u(x)| - 1| (flows only).
  double constraint_violation = 0.0;
  double truncation_estimate = 0.0;
  /// Reciprocal condition estimate of the dense system (linear solves).
  double rcond = 0.0;
  bool converged = false;
  std::string message;
};

struct LinearProblem {
  KernelSpec kernel;
  GridSpec domain;
  ExteriorRule exterior = ExteriorRule::zero();
  /// Right-hand side f of -L v = f, evaluated at interior nodes.
  std::function<double(std::span<const double>)> rhs;
};

struct LinearSolution {
  SampledField v;
  SolveReport report;
};

/// Dense assembly and LU factorization of -L_K v = rhs on the interior with the
/// exterior contribution moved to the right side.
LinearSolution solve_linear_dirichlet(const LinearProblem& p);
LinearSolution solve_linear_dirichlet(const NonlocalOperator& op, std::span<const double> rhs,
                                      const ExteriorRule& exterior);

struct FlowOptions {
  int max_steps = 20000;
  /// Pseudo-time step; 0 picks 0.5 / (largest row mass).
  double step = 0.0;
  /// Stop when the residual drops below tolerance * initial residual.
  double tolerance = 1e-6;
  /// Allowed energy increase per step, relative to the initial energy.
  double energy_slack = 1e-10;
};

struct FlowResult {
  SampledField u;
  SolveReport report;
};

/// Projected gradient flow for unit-vector-valued u with exterior data g, |g| = 1:
///   u <- P(u - tau T_u (-Delta)^s u),
/// where T_u removes the component along u and P normalizes each node. The
/// residual is the tangential Euler-Lagrange residual max_x |(-Delta)^s u - u B(u,u)|.
FlowResult gradient_flow_s_harmonic(const NonlocalOperator& op, const ExteriorRule& g, const FlowOptions& opt = {});

struct GLConfig {
  double epsilon = 1e-2;
  /// 0 picks the stability bound 1 / (2 row mass + 3 / epsilon); larger values are rejected.
  double step = 0.0;
  int max_steps = 200000;
  double tolerance = 1e-6;
  void validate() const;
};

/// Explicit gradient flow of E_s + (1/(4 eps)) sum (1 - |v|^2)^2, i.e. the relaxed
/// system (-Delta)^s v = (1/eps)(1 - |v|^2) v in the interior, v = g outside.
FlowResult ginzburg_landau_solve(const NonlocalOperator& op, const GLConfig& cfg, const ExteriorRule& g);

/// Starting point of both flows: the componentwise harmonic extension of g,
/// normalized at every node.
SampledField harmonic_initial_guess(const NonlocalOperator& op, const ExteriorRule& g);

/// |(-Delta)^s u - u B(u, u)| per node; u must satisfy ||u| - 1| <= 1e-8 at every node.
std::vector<double> euler_lagrange_residual(const NonlocalOperator& op, const SampledField& u);
std::vector<double> euler_lagrange_residual(const SampledField& u, double s);

/// Throws DomainError unless |g| = 1 (within 1e-12) on the exterior collar and in the far field.
void check_unit_exterior(const NonlocalOperator& op, const ExteriorRule& g);

}  // namespace fracsys
