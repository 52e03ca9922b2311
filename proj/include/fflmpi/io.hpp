#pragma once

#include "fflmpi/core.hpp"
#include "fflmpi/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace fflmpi {

/// Comment lines written as "# key: value" above CSV data.
using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string format_double(double x);  // %.17g

/// One CSV row per image row iy (y increasing downwards in the file).
void write_image_csv(const std::filesystem::path& path, const ImageGrid& image, const Metadata& meta = {});
/// Reads values written by write_image_csv; the grid must be square.
ImageGrid read_image_csv(const std::filesystem::path& path, double fov_half);

/// 16-bit binary PGM with the top file row at the largest y, values mapped
/// linearly from [min, max] to [0, 65535]; the range goes to <path>.txt.
void write_pgm(const std::filesystem::path& path, const Matrix& values, const Metadata& meta = {});
void write_pgm(const std::filesystem::path& path, const ImageGrid& image, const Metadata& meta = {});

struct PgmImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;  // file order
};
PgmImage read_pgm(const std::filesystem::path& path);

void write_sinogram_csv(const std::filesystem::path& path, const Sinogram& sinogram, const Metadata& meta = {});
Sinogram read_sinogram_csv(const std::filesystem::path& path);

/// time column followed by one voltage column per coil.
void write_signal_csv(const std::filesystem::path& path, const SignalTrace& trace, const Metadata& meta = {});
SignalTrace read_signal_csv(const std::filesystem::path& path, Metadata* meta = nullptr);

void write_text(const std::filesystem::path& path, const std::string& text);

struct PhantomSpec {
  /// Shapes in units of the FOV radius; empty selects the default phantom.
  std::vector<Shape> shapes;
  int supersample = 4;
};

struct SimulationSpec {
  int grid = 129;
  double noise_percent = 0.0;  // noise std in percent of u*
  std::uint64_t seed = 0;
  bool factorized = false;     // forward model used to produce the data
  int subsamples = 1;
};

struct ReconstructionSpec {
  Method method = Method::M2;
  int grid = 65;
  double alpha1 = 1e4;
  double alpha2 = 1e-4;
  bool sweep = false;
  std::vector<double> alpha1_grid;  // empty: default grid
  std::vector<double> alpha2_grid;
  SolverControls controls;
  std::string signal;  // measured signal CSV; empty simulates inline
};

struct RunConfig {
  ScanConfig scanner = ScanConfig::reference_scanner(RotationMode::simultaneous);
  TracerModel tracer;
  PhantomSpec phantom;
  SimulationSpec simulation;
  ReconstructionSpec reconstruction;
  std::string output_dir = "out";
  int jobs = 0;

  void validate() const;
  /// Canonical key = value listing of every setting.
  std::string canonical() const;
  /// FNV-1a of canonical(), hex.
  std::string hash() const;
};

/// Parses "key = value" lines with dotted keys; '#' starts a comment.
/// Unknown keys and malformed values are config errors.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

std::uint64_t fnv1a(const std::string& text);

}  // namespace fflmpi
