#include "fflmpi/app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"FFL magnetic particle imaging simulation and joint TV reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool paper_scale = false;
  int jobs = 0;
  std::string out;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key = value run configuration; omitted keys use the reference scanner");
    cmd->add_option("--seed", seed, "noise seed (overrides simulation.seed)");
    cmd->add_flag("--paper-scale", paper_scale, "use 501 / 201 simulation and reconstruction grids");
    cmd->add_option("--jobs", jobs, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_option("--out", out, "output directory (overrides output.dir)");
  };
  CLI::App* simulate = app.add_subcommand("simulate", "phantom, sinogram, coil signals and normalized terms");
  CLI::App* bounds = app.add_subcommand("bounds", "magnitudes of the rotation-induced terms and their bounds");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "joint reconstruction of concentration and sinogram");
  for (CLI::App* cmd : {simulate, bounds, reconstruct}) add_common(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    fflmpi::RunConfig config = config_path.empty() ? fflmpi::RunConfig{} : fflmpi::load_run_config(config_path);
    fflmpi::CommandOptions options;
    options.paper_scale = paper_scale;
    for (CLI::App* cmd : {simulate, bounds, reconstruct}) {
      if (!cmd->parsed()) continue;
      if (cmd->count("--seed")) options.seed = seed;
      if (cmd->count("--jobs")) options.jobs = jobs;
      if (cmd->count("--out")) options.out = out;
    }
    config = fflmpi::apply_options(config, options);

    std::string summary;
    if (simulate->parsed()) summary = fflmpi::cmd_simulate(config);
    else if (bounds->parsed()) summary = fflmpi::cmd_bounds(config);
    else summary = fflmpi::cmd_reconstruct(config);
    std::cout << summary;
    return 0;
  } catch (const fflmpi::Error& e) {
    std::cerr << "error (" << fflmpi::to_string(e.kind()) << "): " << e.what() << '\n';
    return fflmpi::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
