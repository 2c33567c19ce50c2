#include "fracsys/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fracsys/error.hpp"

namespace fracsys {
namespace {

void dump(const Json& v, std::string& out, int depth) {
  const std::string pad(2 * (depth + 1), ' ');
  const std::string close(2 * depth, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map order: sorted
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(v[i], out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_double(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

void open_check(const std::ofstream& f, const std::filesystem::path& path) {
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

template <typename T>
void put(std::ofstream& f, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    f.write(reinterpret_cast<const char*>(b), sizeof(T));
  } else {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
}

template <typename T>
T get(std::ifstream& f) {
  unsigned char b[sizeof(T)];
  if (!f.read(reinterpret_cast<char*>(b), sizeof(T))) throw std::runtime_error("truncated FSF1 file");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

std::vector<double> coords_of(const Lattice& lat, std::size_t i) {
  std::vector<double> x;
  for (int a = 0; a < lat.dim(); ++a) x.push_back(lat.coord(i, a));
  return x;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical_json(const Json& value) {
  std::string out;
  dump(value, out, 0);
  return out;
}

void emit_report(const Json& value, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  open_check(f, path);
  f << canonical_json(value) << '\n';
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path, std::ios::binary);
  open_check(f, path);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
  f << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_double(row[i]);
    f << '\n';
  }
}

void write_field_csv(const std::filesystem::path& path, const SampledField& u) {
  std::vector<std::string> header = {"x"};
  if (u.grid().dim == 2) header.push_back("y");
  for (int c = 0; c < u.components(); ++c) header.push_back("u" + std::to_string(c));
  std::vector<std::vector<double>> rows;
  rows.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::vector<double> row = coords_of(u.lattice(), i);
    for (int c = 0; c < u.components(); ++c) row.push_back(u.value(c, i));
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_point_values_csv(const std::filesystem::path& path, const Lattice& lattice,
                            const std::vector<double>& values, const std::vector<double>& truncation) {
  if (values.size() != lattice.size() || truncation.size() != lattice.size())
    throw DomainError("point values do not match the lattice");
  std::vector<std::string> header = {"x"};
  if (lattice.dim() == 2) header.push_back("y");
  header.push_back("value");
  header.push_back("truncation_error_estimate");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    std::vector<double> row = coords_of(lattice, i);
    row.push_back(values[i]);
    row.push_back(truncation[i]);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

FieldFile field_file(const SampledField& u) {
  const Lattice& lat = u.lattice();
  const int dim = lat.dim();
  FieldFile f;
  f.n = dim;
  f.m = u.components();
  f.h = u.grid().h;
  std::array<int, 2> lo{0, 0}, hi{0, 0};
  for (int a = 0; a < dim; ++a) {
    lo[a] = hi[a] = lat.index(0)[a];
    for (std::size_t i = 0; i < lat.size(); ++i)
      lo[a] = std::min(lo[a], lat.index(i)[a]), hi[a] = std::max(hi[a], lat.index(i)[a]);
    f.dims.push_back(hi[a] - lo[a] + 1);
  }
  for (int j = lo[1]; j <= hi[1]; ++j)
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int c = 0; c < f.m; ++c) f.values.push_back(u.node_value(c, {i, j}));
  return f;
}

void write_fsf1(const std::filesystem::path& path, const FieldFile& f) {
  std::ofstream out(path, std::ios::binary);
  open_check(out, path);
  out.write("FSF1", 4);
  put<std::int32_t>(out, f.n);
  put<std::int32_t>(out, f.m);
  for (std::int32_t d : f.dims) put<std::int32_t>(out, d);
  put<double>(out, f.h);
  for (double v : f.values) put<double>(out, v);
}

void write_fsf1(const std::filesystem::path& path, const SampledField& u) { write_fsf1(path, field_file(u)); }

FieldFile read_fsf1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "FSF1", 4) != 0) throw std::runtime_error("not an FSF1 file");
  FieldFile f;
  f.n = get<std::int32_t>(in);
  f.m = get<std::int32_t>(in);
  if (f.n < 1 || f.n > 3 || f.m < 1) throw std::runtime_error("malformed FSF1 header");
  std::size_t count = static_cast<std::size_t>(f.m);
  for (int a = 0; a < f.n; ++a) {
    f.dims.push_back(get<std::int32_t>(in));
    if (f.dims.back() < 1) throw std::runtime_error("malformed FSF1 header");
    count *= static_cast<std::size_t>(f.dims.back());
  }
  f.h = get<double>(in);
  f.values.resize(count);
  for (double& v : f.values) v = get<double>(in);
  return f;
}

SampledField field_from_file(const FieldFile& f, const GridSpec& grid, ExteriorRule exterior) {
  auto lat = std::make_shared<const Lattice>(grid);
  if (f.n != grid.dim || static_cast<int>(f.dims.size()) != grid.dim) throw DomainError("field file dimension does not match the grid");
  if (f.m != exterior.components()) throw DomainError("field file component count does not match the exterior rule");
  if (std::abs(f.h - grid.h) > 1e-12 * grid.h) throw DomainError("field file spacing does not match the grid");
  std::array<int, 2> lo{0, 0};
  std::array<int, 2> extent{1, 1};
  for (int a = 0; a < grid.dim; ++a) {
    int hi = lat->index(0)[a];
    lo[a] = hi;
    for (std::size_t i = 0; i < lat->size(); ++i) lo[a] = std::min(lo[a], lat->index(i)[a]), hi = std::max(hi, lat->index(i)[a]);
    extent[a] = hi - lo[a] + 1;
    if (extent[a] != f.dims[a]) throw DomainError("field file extent does not match the grid");
  }
  std::vector<double> values(f.m * lat->size());
  for (std::size_t i = 0; i < lat->size(); ++i) {
    const NodeIndex idx = lat->index(i);
    const std::size_t flat = static_cast<std::size_t>(idx[0] - lo[0]) +
                             static_cast<std::size_t>(idx[1] - lo[1]) * static_cast<std::size_t>(extent[0]);
    for (int c = 0; c < f.m; ++c) values[c * lat->size() + i] = f.values[flat * f.m + c];
  }
  return SampledField(lat, f.m, std::move(values), std::move(exterior));
}

// ---------------------------------------------------------------- reports

Json to_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"final_residual", r.final_residual},
              {"residual_scale", r.residual_scale},
              {"energy_trace", r.energy_trace},
              {"constraint_violation", r.constraint_violation},
              {"truncation_estimate", r.truncation_estimate},
              {"rcond", r.rcond},
              {"converged", r.converged},
              {"message", r.message}};
}

Json to_json(const EnergyValue& e) {
  return Json{{"interior_part", e.interior_part}, {"tail_part", e.tail_part}, {"total", e.total}};
}

Json to_json(const GrowthBounds& b) {
  return Json{{"a", b.a}, {"b", b.b}, {"a_star", b.a_star}, {"b_star", b.b_star},
              {"M", b.M}, {"l", b.l()}, {"structural", b.structural()}};
}

Json to_json(const StructuralAudit& a) {
  return Json{{"structural", a.structural}, {"satisfied", a.satisfied}, {"margin", a.margin}};
}

Json to_json(const HarnackReport& r) {
  return Json{{"ratio", r.ratio},
              {"s_values", r.s_values},
              {"ratios_by_s", r.ratios_by_s},
              {"worst_supersolution_defect", r.worst_supersolution_defect}};
}

Json to_json(const ContractionReport& r) {
  return Json{{"delta_observed", r.delta_observed}, {"delta_geometric", r.delta_geometric},
              {"delta_cap", r.delta_cap},           {"mean", r.mean},
              {"new_center", r.new_center},         {"contained", r.contained},
              {"at_boundary", r.at_boundary}};
}

Json to_json(const DecayLedger& l) {
  return Json{{"levels", l.levels},
              {"ball_radii", l.ball_radii},
              {"centers", l.centers},
              {"radii", l.radii},
              {"osc", l.osc},
              {"delta_fit", l.delta_fit},
              {"alpha_fit", l.alpha_fit},
              {"slack", l.slack},
              {"containment", l.containment},
              {"shift_budget", l.shift_budget},
              {"shift_bound_holds", l.shift_bound_holds},
              {"radius_bound_flat", l.radius_bound_flat},
              {"radius_bound_geometric", l.radius_bound_geometric},
              {"finest_mean_norm", l.finest_mean_norm}};
}

Json to_json(const LimitReport& r) {
  return Json{{"s_values", r.s_values},
              {"errors", r.errors},
              {"quadrature_errors", r.quadrature_errors},
              {"fitted_rate", r.fitted_rate},
              {"limit_scale", r.limit_scale}};
}

Json to_json(const CounterexampleReport& r) {
  return Json{{"n_smooth", r.n_smooth}, {"s", r.s},   {"max_residual", r.max_residual}, {"scale", r.scale},
              {"worst_x", r.worst_x},   {"h", r.h},   {"band_clear", r.band_clear}};
}

Json to_json(const SquareIdentityReport& r) {
  return Json{{"max_residual", r.max_residual}, {"scale", r.scale}, {"relative", r.relative}};
}

Json to_json(const SignAlgebraReport& r) {
  return Json{{"phi_x", r.phi_x},
              {"phi_y", r.phi_y},
              {"lhs", r.lhs},
              {"rhs", r.rhs},
              {"literal_holds", r.literal_holds},
              {"square_form_holds", r.square_form_holds},
              {"weighted_form_holds", r.weighted_form_holds},
              {"holds", r.holds}};
}

void write_ledger_csv(const std::filesystem::path& path, const DecayLedger& l) {
  std::vector<std::string> header = {"k", "ball_radius", "M_k", "osc"};
  const std::size_t m = l.centers.empty() ? 0 : l.centers[0].size();
  for (std::size_t c = 0; c < m; ++c) header.push_back("rho_" + std::to_string(c));
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < l.levels.size(); ++k) {
    std::vector<double> row = {double(l.levels[k]), l.ball_radii[k], l.radii[k], l.osc[k]};
    row.insert(row.end(), l.centers[k].begin(), l.centers[k].end());
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_harnack_csv(const std::filesystem::path& path, const HarnackReport& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.s_values.size(); ++i) rows.push_back({r.s_values[i], r.ratios_by_s[i]});
  write_csv(path, {"s", "ratio"}, rows);
}

void write_energy_csv(const std::filesystem::path& path, const SolveReport& r) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < r.energy_trace.size(); ++i) rows.push_back({double(i), r.energy_trace[i]});
  write_csv(path, {"step", "energy"}, rows);
}

}  // namespace fracsys
