#include "slab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Spectral analysis and transport simulation for the dissipative slab operator"};
  std::string command, config, out;
  app.add_option("command", command, "Command to run")
      ->required()
      ->check(CLI::IsMember(slab::cli::commands()));
  app.add_option("--config", config, "Experiment configuration (JSON)")->required();
  app.add_option("--out", out, "Output directory (overrides output.dir)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : slab::cli::schema_violation;
  }
  return slab::cli::run_to_dir(command, config, out, std::cerr);
}
