#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fracsys/grid.hpp"
#include "fracsys/nonlocal.hpp"
#include "fracsys/regularity.hpp"
#include "fracsys/solvers.hpp"
#include "fracsys/verification.hpp"
#include "json.hpp"

namespace fracsys {

using Json = nlohmann::json;

/// Sorted keys, two-space indent, floats as %.17g, non-finite numbers as null.
std::string canonical_json(const Json& value);
/// Writes canonical_json(value) plus a trailing newline.
void emit_report(const Json& value, const std::filesystem::path& path);

/// Formats a double as %.17g.
std::string format_double(double v);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Columns x[, y], u0 .. u{m-1}, one row per interior node.
void write_field_csv(const std::filesystem::path& path, const SampledField& u);
/// Columns x[, y], value, truncation_error_estimate.
void write_point_values_csv(const std::filesystem::path& path, const Lattice& lattice,
                            const std::vector<double>& values, const std::vector<double>& truncation);

/// Binary field: "FSF1", int32 n, int32 m, int32 dims[n], float64 h, then float64
/// values, little-endian. Values cover the full index box (axis 0 fastest, m
/// components per point); points outside the interior carry the exterior data.
struct FieldFile {
  int n = 1;
  int m = 1;
  std::vector<std::int32_t> dims;
  double h = 0.0;
  std::vector<double> values;
};

FieldFile field_file(const SampledField& u);
void write_fsf1(const std::filesystem::path& path, const SampledField& u);
void write_fsf1(const std::filesystem::path& path, const FieldFile& f);
FieldFile read_fsf1(const std::filesystem::path& path);
/// Interior values of a file written from the same grid; throws DomainError on a shape mismatch.
SampledField field_from_file(const FieldFile& f, const GridSpec& grid, ExteriorRule exterior);

Json to_json(const SolveReport& r);
Json to_json(const EnergyValue& e);
Json to_json(const GrowthBounds& b);
Json to_json(const StructuralAudit& a);
Json to_json(const HarnackReport& r);
Json to_json(const ContractionReport& r);
Json to_json(const DecayLedger& l);
Json to_json(const LimitReport& r);
Json to_json(const CounterexampleReport& r);
Json to_json(const SquareIdentityReport& r);
Json to_json(const SignAlgebraReport& r);

/// Rows k, ball_radius, M_k, osc, rho_0 .. rho_{m-1}.
void write_ledger_csv(const std::filesystem::path& path, const DecayLedger& l);
/// Rows s, ratio.
void write_harnack_csv(const std::filesystem::path& path, const HarnackReport& r);
/// Rows step, energy.
void write_energy_csv(const std::filesystem::path& path, const SolveReport& r);

}  // namespace fracsys
