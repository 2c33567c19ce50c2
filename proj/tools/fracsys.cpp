#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "fracsys/error.hpp"
#include "fracsys/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fracsys: fractional elliptic systems experiment runner"};
  std::string command;
  std::string config;
  std::string out;
  app.add_option("command", command, "solve-linear | solve-harmonic | solve-gl | probe-decay | probe-harnack | audit | verify | limit")
      ->required();
  app.add_option("--config", config, "experiment config (JSON)")->required();
  app.add_option("--out", out, "output directory (overrides output_dir)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const auto& known = fracsys::known_commands();
  if (std::find(known.begin(), known.end(), command) == known.end()) {
    std::cerr << "fracsys: unknown command '" << command << "'\n";
    return 2;
  }
  std::optional<std::filesystem::path> out_dir;
  if (!out.empty()) out_dir = out;
  return fracsys::run_cli(command, config, out_dir, std::cout, std::cerr);
}
