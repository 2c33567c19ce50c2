#pragma once

// Config-driven experiment runner behind the fracsys CLI.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fracsys/io.hpp"
#include "fracsys/kernel.hpp"
#include "fracsys/regularity.hpp"

namespace fracsys {

inline constexpr int kSchemaVersion = 1;

struct KernelConfig {
  std::string kind = "fractional";  ///< fractional | anisotropic | custom
  double s = 0.5;
  std::optional<Eigen::MatrixXd> matrix;
  std::optional<double> lambda;
  std::optional<double> Lambda;
  /// Custom profiles, as multiples of c_{n,s}:
  ///   scaled: factor
  ///   bump:   low + (high - low) exp(-(r / width)^2)
  std::string profile = "scaled";
  double factor = 1.0;
  double low = 0.5;
  double high = 1.5;
  double width = 1.0;
};

struct GridConfig {
  int dim = 1;
  std::string layout = "ball";  ///< ball | periodic
  double radius = 1.0;
  int nodes_across = 256;
  double truncation_factor = 4.0;
  int nodes = 256;
  double period = 6.283185307179586;
  int periods = 0;  ///< 0 picks 16 in 1D and 2 in 2D
};

struct SolverConfig {
  int steps = 0;  ///< 0 keeps the solver default
  double step_size = 0.0;
  double tolerance = 1e-6;
  double epsilon = 1e-2;
  double rhs = 1.0;
};

struct ProbeConfig {
  std::vector<double> x0;
  int levels = 5;
  double ball_radius = 1.0;
  double mu = 1.0;
  double t = 1.0;
  std::vector<double> s_values;
  std::vector<double> l_values;
  std::string field = "harmonic";  ///< harmonic | smoothed_sign | file
  int n_smooth = 16;
  std::string file;
  std::vector<double> wavevector;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string command;
  KernelConfig kernel;
  GridConfig grid;
  std::optional<std::string> exterior;
  std::optional<GrowthBounds> bounds;
  SolverConfig solver;
  ProbeConfig probe;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  /// Directory that relative file references resolve against.
  std::filesystem::path base_dir = ".";
};

const std::vector<std::string>& known_commands();

/// Throws ConfigError with a diagnostic naming the offending field.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

KernelSpec build_kernel(const KernelConfig& k, int dim);
/// Same kernel family at another order.
KernelSpec build_kernel(const KernelConfig& k, int dim, double s);
GridSpec build_grid(const GridConfig& g);
/// "zero", "constant:[..]", "sign", "radial_projection", "twist:beta".
ExteriorRule parse_exterior(const std::string& text, int dim);

struct RunOutcome {
  int exit_code = 0;
  Json report;
};

/// Executes the configured command and writes its artifacts to output_dir.
/// Configuration problems throw ConfigError; a failed verdict gives exit_code 1.
RunOutcome run(const ExperimentConfig& cfg, std::ostream& log);

/// CLI entry: load, override, run, map errors to exit codes 0/1/2.
int run_cli(const std::string& command, const std::filesystem::path& config_path,
            const std::optional<std::filesystem::path>& out_dir, std::ostream& log, std::ostream& err);

}  // namespace fracsys
