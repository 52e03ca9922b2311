#pragma once

#include "fflmpi/forward.hpp"
#include "fflmpi/io.hpp"
#include "fflmpi/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace fflmpi {

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;
  std::optional<int> jobs;
  std::optional<std::string> out;
};

/// Applies command-line overrides; --paper-scale selects 501 / 201 grids.
RunConfig apply_options(RunConfig config, const CommandOptions& options);

/// Phantom shapes in physical units for the configured scanner.
std::vector<Shape> phantom_shapes(const RunConfig& config);
ImageGrid phantom_image(const RunConfig& config, int n);

struct SimulationRun {
  ImageGrid phantom;
  SignalTrace clean;
  SignalTrace measured;  // clean plus noise
  double u_star = 0.0;   // max |clean|
  double noise_std = 0.0;
};

SimulationRun simulate(const RunConfig& config);

/// Exit status for a library error.
int exit_code(ErrorKind kind) noexcept;

/// Each command writes into config.output_dir and returns a short summary.
std::string cmd_simulate(const RunConfig& config);
std::string cmd_bounds(const RunConfig& config);
std::string cmd_reconstruct(const RunConfig& config);

/// Reconstruction with the groundtruth contour burnt in at the image maximum.
Matrix contour_overlay(const ImageGrid& reconstruction, const ImageGrid& groundtruth);

}  // namespace fflmpi
