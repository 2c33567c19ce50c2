#include "fracsys/nonlocal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <unsupported/Eigen/FFT>

#include "fracsys/error.hpp"
#include "fracsys/simd.hpp"

namespace fracsys {
namespace {

int floor_mod(int a, int n) {
  const int r = a % n;
  return r < 0 ? r + n : r;
}

// Exterior rule sampled on the index box reached from any interior node, plus
// its far-field values along the tail directions.
struct ExteriorCache {
  int dim = 1;
  int m = 1;
  int lo = 0;  // smallest index per axis
  int side = 0;
  std::vector<double> values;  // point-major, m per point
  std::vector<char> interior;
  std::vector<double> far;  // m per tail direction

  std::size_t point(int i0, int i1) const {
    return static_cast<std::size_t>(dim == 2 ? i1 - lo : 0) * side + (i0 - lo);
  }
};

ExteriorCache sample_exterior(const Lattice& lat, const QuadratureScheme& q, const ExteriorRule& g) {
  ExteriorCache c;
  c.dim = lat.dim();
  c.m = g.components();
  int half = 0;
  for (std::size_t i = 0; i < lat.size(); ++i)
    for (int a = 0; a < c.dim; ++a) half = std::max(half, std::abs(lat.index(i)[a]));
  c.lo = -(q.reach() + half);
  c.side = 2 * (q.reach() + half) + 1;
  const std::size_t count = c.dim == 2 ? static_cast<std::size_t>(c.side) * c.side : c.side;
  c.values.assign(count * c.m, 0.0);
  c.interior.assign(count, 0);
  const double h = lat.grid().h;
  const int rows = c.dim == 2 ? c.side : 1;
  for (int r = 0; r < rows; ++r)
    for (int i = 0; i < c.side; ++i) {
      const NodeIndex idx{c.lo + i, c.dim == 2 ? c.lo + r : 0};
      const std::size_t p = c.point(idx[0], idx[1]);
      if (lat.interior(idx)) {
        c.interior[p] = 1;
        continue;
      }
      const double x[2] = {idx[0] * h, idx[1] * h};
      g.evaluate(std::span<const double>(x, c.dim), std::span<double>(c.values.data() + p * c.m, c.m));
    }
  c.far.assign(q.tail().size() * c.m, 0.0);
  for (std::size_t t = 0; t < q.tail().size(); ++t)
    g.far_field(std::span<const double>(q.tail()[t].dir.data(), c.dim),
                std::span<double>(c.far.data() + t * c.m, c.m));
  return c;
}

// |g(x + r dir) - g_far(dir)| sampled beyond the truncation box, weighted by the tail masses.
double truncation_estimate(const QuadratureScheme& q, const ExteriorRule& g, const ExteriorCache& c,
                           std::array<double, 2> x) {
  double est = 0.0;
  std::vector<double> val(c.m);
  const double T = q.truncation();
  for (std::size_t t = 0; t < q.tail().size(); ++t) {
    const auto& d = q.tail()[t];
    double worst = 0.0;
    for (double f : {1.0, 2.0, 4.0, 8.0}) {
      const double rho = f * T / std::max(std::abs(d.dir[0]), std::abs(d.dir[1]));
      const double y[2] = {x[0] + rho * d.dir[0], x[1] + rho * d.dir[1]};
      g.evaluate(std::span<const double>(y, c.dim), val);
      double e2 = 0.0;
      for (int k = 0; k < c.m; ++k) e2 += (val[k] - c.far[t * c.m + k]) * (val[k] - c.far[t * c.m + k]);
      worst = std::max(worst, std::sqrt(e2));
    }
    est += d.mass * worst;
  }
  return est;
}

}  // namespace

int truncation_reach(const GridSpec& grid) {
  return static_cast<int>(std::ceil(grid.truncation_radius / grid.h - 1e-9));
}

NonlocalOperator::NonlocalOperator(KernelSpec kernel, const GridSpec& grid)
    : NonlocalOperator(std::move(kernel), std::make_shared<const Lattice>(grid)) {}

NonlocalOperator::NonlocalOperator(KernelSpec kernel, std::shared_ptr<const Lattice> lattice)
    : kernel_(std::move(kernel)), lattice_(std::move(lattice)) {
  const GridSpec& g = lattice_->grid();
  if (kernel_.dim() != g.dim) throw DomainError("kernel and grid dimensions differ");
  scheme_ = QuadratureScheme::build(kernel_, g.h, truncation_reach(g));
  const std::size_t n = size();
  interior_mass_.assign(n, 0.0);
  if (g.periodic) {
    const int N = g.nodes_per_axis;
    const int R = scheme_.reach();
    const int rows = g.dim == 2 ? N : 1;
    std::vector<double> wp(static_cast<std::size_t>(rows) * N, 0.0);
    const double share = scheme_.tail_mass() / (g.dim == 2 ? double(N) * N : double(N));
    for (int k1 = (g.dim == 2 ? -R : 0); k1 <= (g.dim == 2 ? R : 0); ++k1) {
      const double* w = scheme_.row(k1);
      const int t1 = g.dim == 2 ? floor_mod(k1, N) : 0;
      for (int k0 = -R; k0 <= R; ++k0) wp[static_cast<std::size_t>(t1) * N + floor_mod(k0, N)] += w[k0 + R];
    }
    for (double& w : wp) w += share;
    wp[0] = 0.0;
    folded_.assign(static_cast<std::size_t>(rows) * 2 * N, 0.0);
    for (int t1 = 0; t1 < rows; ++t1)
      for (int j = 0; j < 2 * N; ++j) folded_[static_cast<std::size_t>(t1) * 2 * N + j] = wp[t1 * N + j % N];
    const double row_total = std::accumulate(wp.begin(), wp.end(), 0.0);
    interior_mass_.assign(n, row_total);
    max_row_mass_ = row_total;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for_each_row(i, [&](const double* w, std::size_t, std::size_t len) {
        for (std::size_t j = 0; j < len; ++j) acc += w[j];
      });
      interior_mass_[i] = acc;
    }
    max_row_mass_ = scheme_.total_mass();
  }
}

template <typename RowFn>
void NonlocalOperator::for_each_row(std::size_t node, RowFn&& fn) const {
  const GridSpec& g = lattice_->grid();
  const NodeIndex x = lattice_->index(node);
  if (g.periodic) {
    const int N = g.nodes_per_axis;
    const int rows = g.dim == 2 ? N : 1;
    for (int r = 0; r < rows; ++r) {
      const int t1 = g.dim == 2 ? floor_mod(r - x[1], N) : 0;
      fn(folded_.data() + static_cast<std::size_t>(t1) * 2 * N + (N - x[0]), static_cast<std::size_t>(r) * N,
         static_cast<std::size_t>(N));
    }
    return;
  }
  const int R = scheme_.reach();
  for (const Lattice::Run& run : lattice_->runs()) {
    const int k1 = g.dim == 2 ? run.row - x[1] : 0;
    fn(scheme_.row(k1) + (run.begin - x[0] + R), run.offset, static_cast<std::size_t>(run.end - run.begin));
  }
}

ExteriorCoupling NonlocalOperator::couple(const ExteriorRule& g) const {
  const std::size_t n = size();
  ExteriorCoupling e;
  e.m = g.components();
  e.mass.assign(n, 0.0);
  e.first.assign(static_cast<std::size_t>(e.m) * n, 0.0);
  e.second.assign(n, 0.0);
  e.truncation.assign(n, 0.0);
  if (periodic()) {
    if (g.kind() != ExteriorRule::Kind::periodic) throw DomainError("periodic grid needs the periodic rule");
    return e;
  }
  if (g.kind() == ExteriorRule::Kind::periodic) throw DomainError("exterior rule undefined outside the ball");
  if (g.constant_valued()) {
    const auto& c = g.constant_value();
    double c2 = 0.0;
    for (double v : c) c2 += v * v;
    for (std::size_t i = 0; i < n; ++i) {
      e.mass[i] = scheme_.total_mass() - interior_mass_[i];
      for (int k = 0; k < e.m; ++k) e.first[k * n + i] = c[k] * e.mass[i];
      e.second[i] = c2 * e.mass[i];
    }
    e.constant = c;
    return e;
  }
  const ExteriorCache cache = sample_exterior(*lattice_, scheme_, g);
  const int R = scheme_.reach();
  const int dim = lattice_->dim();
  const int m = e.m;
  std::vector<double> f(m);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeIndex x = lattice_->index(i);
    double mass = 0.0, second = 0.0;
    std::fill(f.begin(), f.end(), 0.0);
    for (int k1 = (dim == 2 ? -R : 0); k1 <= (dim == 2 ? R : 0); ++k1) {
      const double* w = scheme_.row(k1);
      const std::size_t base = cache.point(x[0] - R, x[1] + k1);
      for (int k0 = 0; k0 <= 2 * R; ++k0) {
        const std::size_t p = base + k0;
        if (cache.interior[p] || w[k0] == 0.0) continue;
        const double* gv = cache.values.data() + p * m;
        mass += w[k0];
        double g2 = 0.0;
        for (int c = 0; c < m; ++c) f[c] += w[k0] * gv[c], g2 += gv[c] * gv[c];
        second += w[k0] * g2;
      }
    }
    for (std::size_t t = 0; t < scheme_.tail().size(); ++t) {
      const double tm = scheme_.tail()[t].mass;
      const double* gv = cache.far.data() + t * m;
      mass += tm;
      double g2 = 0.0;
      for (int c = 0; c < m; ++c) f[c] += tm * gv[c], g2 += gv[c] * gv[c];
      second += tm * g2;
    }
    e.mass[i] = mass;
    e.second[i] = second;
    for (int c = 0; c < m; ++c) e.first[c * n + i] = f[c];
    e.truncation[i] = truncation_estimate(scheme_, g, cache, lattice_->position(i));
  }
  return e;
}

std::vector<double> NonlocalOperator::cross_second(const ExteriorRule& a, const ExteriorRule& b) const {
  const std::size_t n = size();
  std::vector<double> out(n, 0.0);
  if (periodic()) return out;
  if (a.components() != b.components()) throw DomainError("exterior rules have different component counts");
  const int m = a.components();
  if (a.constant_valued() && b.constant_valued()) {
    double ab = 0.0;
    for (int c = 0; c < m; ++c) ab += a.constant_value()[c] * b.constant_value()[c];
    for (std::size_t i = 0; i < n; ++i) out[i] = ab * (scheme_.total_mass() - interior_mass_[i]);
    return out;
  }
  const ExteriorCache ca = sample_exterior(*lattice_, scheme_, a);
  const ExteriorCache cb = sample_exterior(*lattice_, scheme_, b);
  const int R = scheme_.reach();
  const int dim = lattice_->dim();
  for (std::size_t i = 0; i < n; ++i) {
    const NodeIndex x = lattice_->index(i);
    double acc = 0.0;
    for (int k1 = (dim == 2 ? -R : 0); k1 <= (dim == 2 ? R : 0); ++k1) {
      const double* w = scheme_.row(k1);
      const std::size_t base = ca.point(x[0] - R, x[1] + k1);
      for (int k0 = 0; k0 <= 2 * R; ++k0) {
        const std::size_t p = base + k0;
        if (ca.interior[p] || w[k0] == 0.0) continue;
        double d = 0.0;
        for (int c = 0; c < m; ++c) d += ca.values[p * m + c] * cb.values[p * m + c];
        acc += w[k0] * d;
      }
    }
    for (std::size_t t = 0; t < scheme_.tail().size(); ++t) {
      double d = 0.0;
      for (int c = 0; c < m; ++c) d += ca.far[t * m + c] * cb.far[t * m + c];
      acc += scheme_.tail()[t].mass * d;
    }
    out[i] = acc;
  }
  return out;
}

namespace {

// Exterior part of L for one component: sum_ext w (g - u_x), written per kind so
// that constant data cancels exactly.
double exterior_L(const ExteriorCoupling& e, int c, std::size_t i, double ux) {
  if (!e.constant.empty()) return e.mass[i] * (e.constant[c] - ux);
  return e.first[c * e.mass.size() + i] - e.mass[i] * ux;
}

}  // namespace

double NonlocalOperator::apply_at(std::span<const double> u_c, const ExteriorCoupling& ext, int c,
                                  std::size_t node) const {
  const simd::KernelTable& kt = simd::active();
  const double ux = u_c[node];
  double acc = 0.0;
  for_each_row(node, [&](const double* w, std::size_t off, std::size_t len) {
    acc += kt.weighted_diff(w, u_c.data() + off, ux, len);
  });
  if (!periodic()) acc += exterior_L(ext, c, node, ux);
  return acc;
}

std::vector<double> NonlocalOperator::apply(const SampledField& u, const ExteriorCoupling& ext) const {
  const std::size_t n = size();
  const int m = u.components();
  if (&u.lattice() != lattice_.get() && !(u.grid() == lattice_->grid()))
    throw DomainError("field and operator live on different grids");
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  for (int c = 0; c < m; ++c) {
    const auto uc = u.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      out[c * n + i] = apply_at(uc, ext, c, i);
    }
  }
  return out;
}

std::vector<double> NonlocalOperator::bilinear_interior(const SampledField& u) const {
  const std::size_t n = size();
  const simd::KernelTable& kt = simd::active();
  std::vector<double> out(n, 0.0);
  for (int c = 0; c < u.components(); ++c) {
    const auto uc = u.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for_each_row(i, [&](const double* w, std::size_t off, std::size_t len) {
        acc += kt.weighted_sq_diff(w, uc.data() + off, uc[i], len);
      });
      out[i] += 0.5 * acc;
    }
  }
  return out;
}

namespace {

double exterior_B_self(const ExteriorCoupling& e, const SampledField& u, std::size_t i) {
  const int m = u.components();
  if (!e.constant.empty()) {
    double d2 = 0.0;
    for (int c = 0; c < m; ++c) {
      const double d = u.value(c, i) - e.constant[c];
      d2 += d * d;
    }
    return 0.5 * e.mass[i] * d2;
  }
  const std::size_t n = e.mass.size();
  double uu = 0.0, uf = 0.0;
  for (int c = 0; c < m; ++c) {
    uu += u.value(c, i) * u.value(c, i);
    uf += u.value(c, i) * e.first[c * n + i];
  }
  return std::max(0.0, 0.5 * (e.mass[i] * uu - 2.0 * uf + e.second[i]));
}

}  // namespace

std::vector<double> NonlocalOperator::bilinear_self(const SampledField& u, const ExteriorCoupling& ext) const {
  std::vector<double> out = bilinear_interior(u);
  if (periodic()) return out;
  for (std::size_t i = 0; i < size(); ++i) out[i] += exterior_B_self(ext, u, i);
  return out;
}

std::vector<double> NonlocalOperator::bilinear(const SampledField& u, const ExteriorCoupling& eu,
                                               const SampledField& w, const ExteriorCoupling& ew,
                                               std::span<const double> cross) const {
  if (u.components() != w.components() || u.size() != w.size() || !(u.grid() == w.grid()))
    throw DomainError("bilinear form needs fields on the same grid with the same target dimension");
  const std::size_t n = size();
  const int m = u.components();
  const simd::KernelTable& kt = simd::active();
  std::vector<double> out(n, 0.0);
  for (int c = 0; c < m; ++c) {
    const auto uc = u.component(c);
    const auto wc = w.component(c);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for_each_row(i, [&](const double* wt, std::size_t off, std::size_t len) {
        acc += kt.weighted_cross_diff(wt, uc.data() + off, uc[i], wc.data() + off, wc[i], len);
      });
      out[i] += 0.5 * acc;
    }
  }
  if (periodic()) return out;
  for (std::size_t i = 0; i < n; ++i) {
    // Every branch is written so that swapping (u, eu) with (w, ew) gives the
    // same floating-point operations, and constant data cancels exactly.
    double ext = 0.0;
    if (!eu.constant.empty() && !ew.constant.empty()) {
      for (int c = 0; c < m; ++c) ext += (u.value(c, i) - eu.constant[c]) * (w.value(c, i) - ew.constant[c]);
      ext *= eu.mass[i];
    } else if (!eu.constant.empty() || !ew.constant.empty()) {
      const bool u_const = !eu.constant.empty();
      const SampledField& a = u_const ? u : w;  // the side with constant data
      const SampledField& b = u_const ? w : u;
      const ExteriorCoupling& ea = u_const ? eu : ew;
      const ExteriorCoupling& eb = u_const ? ew : eu;
      for (int c = 0; c < m; ++c)
        ext += (a.value(c, i) - ea.constant[c]) * (eb.mass[i] * b.value(c, i) - eb.first[c * n + i]);
    } else {
      double uw = 0.0, uf = 0.0, wf = 0.0;
      for (int c = 0; c < m; ++c) {
        uw += u.value(c, i) * w.value(c, i);
        uf += u.value(c, i) * ew.first[c * n + i];
        wf += w.value(c, i) * eu.first[c * n + i];
      }
      ext = eu.mass[i] * uw - (uf + wf) + cross[i];
    }
    out[i] += 0.5 * ext;
  }
  return out;
}

EnergyValue NonlocalOperator::energy(const SampledField& u, const ExteriorCoupling& ext) const {
  const double hn = std::pow(lattice_->grid().h, lattice_->dim());
  const std::vector<double> b_int = bilinear_interior(u);
  EnergyValue e;
  for (double b : b_int) e.interior_part += 0.5 * b;
  if (!periodic())
    for (std::size_t i = 0; i < size(); ++i) e.tail_part += exterior_B_self(ext, u, i);
  e.interior_part *= hn;
  e.tail_part *= hn;
  e.total = e.interior_part + e.tail_part;
  return e;
}

std::vector<double> NonlocalOperator::energy_gradient(const SampledField& u, const ExteriorCoupling& ext) const {
  const double hn = std::pow(lattice_->grid().h, lattice_->dim());
  std::vector<double> g = apply(u, ext);
  for (double& v : g) v *= -hn;
  return g;
}

Eigen::MatrixXd NonlocalOperator::assemble() const {
  const std::size_t n = size();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for_each_row(i, [&](const double* w, std::size_t off, std::size_t len) {
      for (std::size_t j = 0; j < len; ++j) A(i, off + j) -= w[j];
    });
    A(i, i) = 0.0;
    A(i, i) = periodic() ? interior_mass_[i] : scheme_.total_mass();
  }
  return A;
}

// ---------------------------------------------------------------- pointwise

namespace {

void check_node(const SampledField& u, std::size_t node, int component) {
  if (node >= u.size()) throw DomainError("evaluation point is not an interior node");
  if (component < 0 || component >= u.components()) throw DomainError("component out of range");
}

double field_osc(std::span<const double> v) {
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

PointValue apply_LK(const NonlocalOperator& op, const SampledField& u, std::size_t node, int component) {
  check_node(u, node, component);
  if (!(u.grid() == op.lattice().grid())) throw DomainError("field and operator live on different grids");
  const ExteriorRule rule = u.exterior().component(component);
  const ExteriorCoupling e = op.couple(rule);
  PointValue pv;
  pv.value = op.apply_at(u.component(component), e, 0, node);
  pv.truncation_error =
      op.periodic() ? op.scheme().tail_mass() * field_osc(u.component(component)) : e.truncation[node];
  return pv;
}

PointValue apply_LK(const SampledField& u, const KernelSpec& kernel, std::size_t node, int component) {
  return apply_LK(NonlocalOperator(kernel, u.lattice_ptr()), u, node, component);
}

PointValue apply_LK_reference(const NonlocalOperator& op, const SampledField& u, std::size_t node, int component) {
  check_node(u, node, component);
  const QuadratureScheme& q = op.scheme();
  const int R = q.reach();
  const int dim = op.lattice().dim();
  const NodeIndex x = op.lattice().index(node);
  const double ux = u.value(component, node);
  double acc = 0.0;
  for (int k1 = (dim == 2 ? -R : 0); k1 <= (dim == 2 ? R : 0); ++k1)
    for (int k0 = -R; k0 <= R; ++k0) {
      const double w = q.weight(k0, k1);
      if (w == 0.0) continue;
      acc += w * (u.node_value(component, {x[0] + k0, x[1] + k1}) - ux);
    }
  PointValue pv;
  if (op.periodic()) {
    const auto uc = u.component(component);
    const double mean = std::accumulate(uc.begin(), uc.end(), 0.0) / uc.size();
    acc += q.tail_mass() * (mean - ux);
    pv.truncation_error = q.tail_mass() * field_osc(uc);
  } else {
    std::vector<double> far(u.components());
    for (const TailDirection& t : q.tail()) {
      u.exterior().far_field(std::span<const double>(t.dir.data(), dim), far);
      acc += t.mass * (far[component] - ux);
    }
  }
  pv.value = acc;
  return pv;
}

PointValue apply_fractional_laplacian(const SampledField& u, double s, std::size_t node, int component) {
  PointValue pv = apply_LK(u, make_fractional_kernel(u.grid().dim, s), node, component);
  pv.value = -pv.value;
  return pv;
}

std::vector<double> fractional_laplacian(const NonlocalOperator& op, const SampledField& u) {
  std::vector<double> v = op.apply(u, op.couple(u.exterior()));
  for (double& x : v) x = -x;
  return v;
}

double bilinear_form(const NonlocalOperator& op, const SampledField& u, const SampledField& w, std::size_t node) {
  check_node(u, node, 0);
  if (!(u.grid() == w.grid()) || u.components() != w.components())
    throw DomainError("bilinear form needs fields on the same grid with the same target dimension");
  const ExteriorCoupling eu = op.couple(u.exterior());
  const ExteriorCoupling ew = op.couple(w.exterior());
  const std::vector<double> cross = op.cross_second(u.exterior(), w.exterior());
  return op.bilinear(u, eu, w, ew, cross)[node];
}

double bilinear_form(const SampledField& u, const SampledField& w, const KernelSpec& kernel, std::size_t node) {
  return bilinear_form(NonlocalOperator(kernel, u.lattice_ptr()), u, w, node);
}

EnergyValue s_energy(const NonlocalOperator& op, const SampledField& u) {
  return op.energy(u, op.couple(u.exterior()));
}

EnergyValue s_energy(const SampledField& u, double s) {
  return s_energy(NonlocalOperator(make_fractional_kernel(u.grid().dim, s), u.lattice_ptr()), u);
}

// ---------------------------------------------------------------- spectral

namespace {

std::vector<double> spectral_component(std::span<const double> v, const GridSpec& g, const Eigen::MatrixXd& A,
                                       double p) {
  const int N = g.nodes_per_axis;
  const double dk = 2.0 * std::numbers::pi / g.period();
  auto freq = [&](int j) { return dk * (j <= N / 2 ? j : j - N); };
  Eigen::FFT<double> fft;
  if (g.dim == 1) {
    std::vector<double> in(v.begin(), v.end());
    std::vector<std::complex<double>> spec;
    fft.fwd(spec, in);
    for (int j = 0; j < N; ++j) spec[j] *= std::pow(std::abs(A(0, 0) * freq(j)), p);
    std::vector<double> out;
    fft.inv(out, spec);
    return out;
  }
  // Rows, then columns.
  std::vector<std::complex<double>> grid(static_cast<std::size_t>(N) * N), line_in(N), line_out(N);
  for (int r = 0; r < N; ++r) {
    for (int i = 0; i < N; ++i) line_in[i] = v[static_cast<std::size_t>(r) * N + i];
    fft.fwd(line_out, line_in);
    for (int i = 0; i < N; ++i) grid[static_cast<std::size_t>(r) * N + i] = line_out[i];
  }
  for (int i = 0; i < N; ++i) {
    for (int r = 0; r < N; ++r) line_in[r] = grid[static_cast<std::size_t>(r) * N + i];
    fft.fwd(line_out, line_in);
    for (int r = 0; r < N; ++r) {
      const double x0 = freq(i), x1 = freq(r);
      const double a0 = A(0, 0) * x0 + A(1, 0) * x1, a1 = A(0, 1) * x0 + A(1, 1) * x1;
      line_out[r] *= std::pow(std::hypot(a0, a1), p);
    }
    fft.inv(line_in, line_out);
    for (int r = 0; r < N; ++r) grid[static_cast<std::size_t>(r) * N + i] = line_in[r];
  }
  std::vector<double> out(static_cast<std::size_t>(N) * N);
  for (int r = 0; r < N; ++r) {
    for (int i = 0; i < N; ++i) line_in[i] = grid[static_cast<std::size_t>(r) * N + i];
    fft.inv(line_out, line_in);
    for (int i = 0; i < N; ++i) out[static_cast<std::size_t>(r) * N + i] = line_out[i].real();
  }
  return out;
}

}  // namespace

SampledField spectral_multiplier(const SampledField& u, const Eigen::MatrixXd& A, double p) {
  const GridSpec& g = u.grid();
  if (!g.periodic) throw DomainError("spectral evaluation needs a periodic field");
  if (A.rows() != g.dim || A.cols() != g.dim) throw DomainError("multiplier matrix has the wrong size");
  std::vector<double> values;
  values.reserve(u.values().size());
  for (int c = 0; c < u.components(); ++c) {
    const std::vector<double> v = spectral_component(u.component(c), g, A, p);
    values.insert(values.end(), v.begin(), v.end());
  }
  return SampledField(u.lattice_ptr(), u.components(), std::move(values), u.exterior());
}

SampledField spectral_apply(const SampledField& u, const KernelSpec& kernel) {
  if (kernel.kind() == KernelKind::custom) throw DomainError("custom kernels have no closed-form symbol");
  if (kernel.dim() != u.grid().dim) throw DomainError("kernel and grid dimensions differ");
  return spectral_multiplier(u, kernel.matrix(), 2.0 * kernel.s());
}

SampledField spectral_apply(const SampledField& u, double s) {
  return spectral_apply(u, make_fractional_kernel(u.grid().dim, s));
}

}  // namespace fracsys
