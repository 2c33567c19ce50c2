#include "fracsys/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracsys/error.hpp"

namespace fracsys {
namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double max_of(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

double node_norm(const SampledField& u, std::size_t i) {
  double r2 = 0.0;
  for (int c = 0; c < u.components(); ++c) r2 += u.value(c, i) * u.value(c, i);
  return std::sqrt(r2);
}

double modulus_violation(const SampledField& u) {
  double worst = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) worst = std::max(worst, std::abs(node_norm(u, i) - 1.0));
  return worst;
}

// Normalizes every node of a component-major array in place.
void project_to_sphere(std::vector<double>& values, std::size_t n, int m) {
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < m; ++c) r2 += values[c * n + i] * values[c * n + i];
    if (!(r2 > 0.0)) {
      std::ostringstream msg;
      msg << "cannot project the zero vector onto the sphere at node " << i;
      throw SolverError(msg.str());
    }
    const double inv = 1.0 / std::sqrt(r2);
    for (int c = 0; c < m; ++c) values[c * n + i] *= inv;
  }
}

}  // namespace

LinearSolution solve_linear_dirichlet(const NonlocalOperator& op, std::span<const double> rhs,
                                      const ExteriorRule& exterior) {
  if (op.periodic()) throw DomainError("the Dirichlet problem needs a ball grid");
  const std::size_t n = op.size();
  if (rhs.size() != n) throw DomainError("right-hand side does not match the grid");
  for (double f : rhs)
    if (!std::isfinite(f)) throw DomainError("right-hand side must be finite");
  if (exterior.components() != 1) throw DomainError("the linear problem is scalar");
  const ExteriorCoupling ext = op.couple(exterior);

  const Eigen::MatrixXd A = op.assemble();
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i)
    b(i) = rhs[i] + (ext.constant.empty() ? ext.first[i] : ext.mass[i] * ext.constant[0]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-13)) {
    std::ostringstream msg;
    msg << "Dirichlet system is singular or ill-conditioned (rcond estimate " << rcond << ")";
    throw SolverError(msg.str());
  }
  Eigen::VectorXd x = lu.solve(b);
  x += lu.solve(b - A * x);

  SampledField v(op.lattice_ptr(), 1, std::vector<double>(x.data(), x.data() + n), exterior);
  const std::vector<double> Lv = op.apply(v, ext);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(Lv[i] + rhs[i]));

  SolveReport r;
  r.iterations = 1;
  r.final_residual = res;
  r.residual_scale = max_abs(rhs);
  r.rcond = rcond;
  r.truncation_estimate = max_of(ext.truncation);
  r.converged = res <= 1e-8 * std::max(r.residual_scale, 1e-300) || res == 0.0;
  r.message = r.converged ? "direct solve" : "direct solve above residual target";
  return {std::move(v), std::move(r)};
}

LinearSolution solve_linear_dirichlet(const LinearProblem& p) {
  if (!p.rhs) throw DomainError("linear problem needs a right-hand side");
  NonlocalOperator op(p.kernel, p.domain);
  std::vector<double> f(op.size());
  for (std::size_t i = 0; i < op.size(); ++i) {
    const auto x = op.lattice().position(i);
    f[i] = p.rhs(std::span<const double>(x.data(), op.lattice().dim()));
  }
  return solve_linear_dirichlet(op, f, p.exterior);
}

void check_unit_exterior(const NonlocalOperator& op, const ExteriorRule& g) {
  const Lattice& lat = op.lattice();
  const int dim = lat.dim();
  int half = 0;
  for (std::size_t i = 0; i < lat.size(); ++i)
    for (int a = 0; a < dim; ++a) half = std::max(half, std::abs(lat.index(i)[a]));
  half += 4;
  std::vector<double> val(g.components());
  auto check = [&](double r2, const char* where) {
    if (std::abs(std::sqrt(r2) - 1.0) > 1e-12)
      throw DomainError(std::string("exterior data is not unit length ") + where);
  };
  const double h = lat.grid().h;
  for (int j = (dim == 2 ? -half : 0); j <= (dim == 2 ? half : 0); ++j)
    for (int i = -half; i <= half; ++i) {
      if (lat.interior({i, j})) continue;
      const double x[2] = {i * h, j * h};
      g.evaluate(std::span<const double>(x, dim), val);
      double r2 = 0.0;
      for (double v : val) r2 += v * v;
      check(r2, "near the domain");
    }
  for (const TailDirection& t : op.scheme().tail()) {
    g.far_field(std::span<const double>(t.dir.data(), dim), val);
    double r2 = 0.0;
    for (double v : val) r2 += v * v;
    check(r2, "in the far field");
  }
}

SampledField harmonic_initial_guess(const NonlocalOperator& op, const ExteriorRule& g) {
  const std::size_t n = op.size();
  const int m = g.components();
  std::vector<double> values(static_cast<std::size_t>(m) * n);
  const std::vector<double> zero(n, 0.0);
  for (int c = 0; c < m; ++c) {
    const LinearSolution sol = solve_linear_dirichlet(op, zero, g.component(c));
    std::copy(sol.v.values().begin(), sol.v.values().end(), values.begin() + static_cast<std::ptrdiff_t>(c * n));
  }
  project_to_sphere(values, n, m);
  return SampledField(op.lattice_ptr(), m, std::move(values), g);
}

FlowResult gradient_flow_s_harmonic(const NonlocalOperator& op, const ExteriorRule& g, const FlowOptions& opt) {
  if (op.periodic()) throw DomainError("the constrained flow needs a ball grid");
  check_unit_exterior(op, g);
  SampledField u = harmonic_initial_guess(op, g);
  const ExteriorCoupling ext = op.couple(g);
  const std::size_t n = op.size();
  const int m = g.components();
  const double tau = opt.step > 0.0 ? opt.step : 0.5 / op.max_row_mass();

  SolveReport rep;
  rep.truncation_estimate = max_of(ext.truncation);
  double r0 = 0.0, e0 = 0.0;
  int rises = 0;
  for (int k = 0;; ++k) {
    const std::vector<double> Lu = op.apply(u, ext);
    const std::vector<double> B = op.bilinear_self(u, ext);
    double r = 0.0;
    std::vector<double> next(u.values().begin(), u.values().end());
    for (std::size_t i = 0; i < n; ++i) {
      double ud = 0.0, res2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double d = -Lu[c * n + i];
        ud += u.value(c, i) * d;
        const double e = d - u.value(c, i) * B[i];
        res2 += e * e;
      }
      r = std::max(r, std::sqrt(res2));
      for (int c = 0; c < m; ++c) {
        const double tangential = -Lu[c * n + i] - ud * u.value(c, i);
        next[c * n + i] -= tau * tangential;
      }
    }
    const double energy = op.energy(u, ext).total;
    if (k == 0) r0 = r, e0 = energy;
    if (!rep.energy_trace.empty() && energy > rep.energy_trace.back() + opt.energy_slack * e0) {
      if (++rises >= 3) {
        std::ostringstream msg;
        msg << "energy increased on 3 consecutive steps (step " << k << ", E = " << energy << ", tau = " << tau
            << "); reduce the step size";
        throw SolverError(msg.str());
      }
    } else {
      rises = 0;
    }
    rep.energy_trace.push_back(energy);
    rep.iterations = k;
    rep.final_residual = r;
    if (r <= opt.tolerance * r0 || r == 0.0) {
      rep.converged = true;
      break;
    }
    if (k >= opt.max_steps) break;
    project_to_sphere(next, n, m);
    u = SampledField(op.lattice_ptr(), m, std::move(next), g);
  }
  rep.residual_scale = r0;
  rep.constraint_violation = modulus_violation(u);
  rep.message = rep.converged ? "tangential residual below tolerance" : "step limit reached";
  return {std::move(u), std::move(rep)};
}

void GLConfig::validate() const {
  if (!(epsilon > 0.0)) throw DomainError("Ginzburg-Landau epsilon must be positive");
  if (step < 0.0) throw DomainError("Ginzburg-Landau step must be nonnegative");
  if (max_steps < 1) throw DomainError("Ginzburg-Landau needs at least one step");
}

FlowResult ginzburg_landau_solve(const NonlocalOperator& op, const GLConfig& cfg, const ExteriorRule& g) {
  cfg.validate();
  if (op.periodic()) throw DomainError("the relaxed flow needs a ball grid");
  check_unit_exterior(op, g);
  SampledField v = harmonic_initial_guess(op, g);
  const ExteriorCoupling ext = op.couple(g);
  const std::size_t n = op.size();
  const int m = g.components();
  // Lipschitz bound of the gradient: 2 (row mass) from the nonlocal part and
  // about 3 / eps from the penalty near the sphere.
  const double stable = 1.0 / (2.0 * op.max_row_mass() + 3.0 / cfg.epsilon);
  if (cfg.step > stable) throw DomainError("Ginzburg-Landau step exceeds the explicit stability bound");
  const double tau = cfg.step > 0.0 ? cfg.step : stable;
  const double hn = std::pow(op.lattice().grid().h, op.lattice().dim());

  SolveReport rep;
  rep.truncation_estimate = max_of(ext.truncation);
  double r0 = 0.0, e0 = 0.0;
  int rises = 0;
  for (int k = 0;; ++k) {
    const std::vector<double> Lv = op.apply(v, ext);
    std::vector<double> next(v.values().begin(), v.values().end());
    double r = 0.0, penalty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double v2 = 0.0;
      for (int c = 0; c < m; ++c) v2 += v.value(c, i) * v.value(c, i);
      penalty += (1.0 - v2) * (1.0 - v2);
      double res2 = 0.0;
      for (int c = 0; c < m; ++c) {
        const double grad = -Lv[c * n + i] - (1.0 - v2) * v.value(c, i) / cfg.epsilon;
        res2 += grad * grad;
        next[c * n + i] -= tau * grad;
      }
      r = std::max(r, std::sqrt(res2));
    }
    const double energy = op.energy(v, ext).total + hn * penalty / (4.0 * cfg.epsilon);
    if (k == 0) r0 = r, e0 = energy;
    if (!rep.energy_trace.empty() && energy > rep.energy_trace.back() + 1e-10 * e0) {
      if (++rises >= 3) throw SolverError("Ginzburg-Landau energy increased on 3 consecutive steps");
    } else {
      rises = 0;
    }
    rep.energy_trace.push_back(energy);
    rep.iterations = k;
    rep.final_residual = r;
    if (r <= cfg.tolerance * r0 || r == 0.0) {
      rep.converged = true;
      break;
    }
    if (k >= cfg.max_steps) break;
    v = SampledField(op.lattice_ptr(), m, std::move(next), g);
  }
  rep.residual_scale = r0;
  rep.constraint_violation = modulus_violation(v);
  rep.message = rep.converged ? "relaxed residual below tolerance" : "step limit reached";
  return {std::move(v), std::move(rep)};
}

std::vector<double> euler_lagrange_residual(const NonlocalOperator& op, const SampledField& u) {
  if (modulus_violation(u) > 1e-8) throw DomainError("Euler-Lagrange residual needs |u| = 1 at every node");
  const ExteriorCoupling ext = op.couple(u.exterior());
  const std::vector<double> Lu = op.apply(u, ext);
  const std::vector<double> B = op.bilinear_self(u, ext);
  const std::size_t n = op.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (int c = 0; c < u.components(); ++c) {
      const double e = -Lu[c * n + i] - u.value(c, i) * B[i];
      r2 += e * e;
    }
    out[i] = std::sqrt(r2);
  }
  return out;
}

std::vector<double> euler_lagrange_residual(const SampledField& u, double s) {
  return euler_lagrange_residual(NonlocalOperator(make_fractional_kernel(u.grid().dim, s), u.lattice_ptr()), u);
}

}  // namespace fracsys
