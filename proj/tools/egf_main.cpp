#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "egf/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Extrinsic geometric flow scenario runner"};
  app.require_subcommand(1);

  std::string config;
  egf::RunOptions opts;
  std::string out;
  int grid = 0;
  auto* run = app.add_subcommand("run", "Run a scenario config and write diagnostics");
  run->add_option("config", config, "Scenario config (JSON)")->required();
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--grid", grid, "Grid points per dimension (power of two >= 4)");
  run->add_flag("--no-oracle", opts.no_oracle, "Skip the finite-difference oracle comparison");
  run->add_flag("--plot", opts.plot, "Also write diagnostics.svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : egf::kExitConfigError;
  }
  if (!out.empty()) opts.out = out;
  if (grid != 0) opts.grid = grid;
  return egf::run_scenario(config, opts, std::cerr);
}
