#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace fflmpi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec2 = Eigen::Vector2d;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorKind {
  invalid_argument,
  out_of_support,
  geometry,
  mode,
  constraint,
  degenerate_scale,
  solver,
  config,
  io,
};

const char* to_string(ErrorKind kind) noexcept;

/// All library failures are reported through this type; kind() drives the
/// CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ---------------------------------------------------------------------------
// Physical parameters
// ---------------------------------------------------------------------------

struct PhysicsConstants {
  double mu0 = 4.0e-7 * std::numbers::pi;  // T m / A
  double kB = 1.380650424e-23;             // J / K
  double temperature = 293.0;              // K

  void validate() const;
};

/// Magnetite tracer with Langevin response. Image values are normalized
/// concentrations; particle_density() converts one normalized unit into an
/// areal particle density (particles per m^2, unit depth along z).
struct TracerModel {
  PhysicsConstants constants{};
  double core_diameter = 30e-9;                                  // m
  double saturation_magnetization = 0.6 / (4.0e-7 * std::numbers::pi);  // A/m
  double concentration = 0.5;                                    // mol(Fe3O4)/m^3
  double magnetite_density = 5175.0;                             // kg/m^3
  double magnetite_molar_mass = 0.231533;                        // kg/mol

  double particle_volume() const;
  /// m = Ms * (pi/6) d^3, in A m^2.
  double particle_moment() const;
  /// beta = mu0 m / (kB T), in m/A.
  double langevin_beta() const;
  double particle_density() const;

  void validate() const;
};

enum class RotationMode { sequential, simultaneous };

const char* to_string(RotationMode mode) noexcept;

struct ScanConfig {
  double gradient = 4.0;    // T / (m mu0)
  double drive_amplitude = 15e-3;  // T / mu0
  double f_drive = 25e3;    // Hz
  double f_rot = 1e3;       // Hz
  double f_sample = 8e6;    // Hz
  std::vector<Vec2> coils = {Vec2(0.015 / 293.29, 0.0), Vec2(0.0, 0.015 / 379.71)};
  RotationMode mode = RotationMode::simultaneous;
  int n_angles = 25;        // sequential sweeps
  double total_time = 0.0;  // s; <= 0 selects the mode default
  int s_samples = 0;        // displacement intervals per column; <= 0 selects f_s / (2 f_d)
  double mu0 = 4.0e-7 * std::numbers::pi;

  /// Reference scanner parameters, either rotation mode.
  static ScanConfig reference_scanner(RotationMode mode = RotationMode::simultaneous);

  double fov_radius() const { return drive_amplitude / gradient; }
  /// Gradient and drive amplitude in field units (A/m^2 and A/m).
  double gradient_field() const { return gradient / mu0; }
  double drive_field() const { return drive_amplitude / mu0; }
  double half_period() const { return 0.5 / f_drive; }
  double measurement_time() const;
  Index n_samples() const;
  double sample_time(Index k) const { return static_cast<double>(k) / f_sample; }
  int displacement_intervals() const;
  /// Number of half drive-periods (FFL translations) in the measurement.
  int n_sweeps() const;
  Index n_coils() const { return static_cast<Index>(coils.size()); }

  void validate() const;
};

// ---------------------------------------------------------------------------
// Grids and data containers
// ---------------------------------------------------------------------------

/// Square pixel grid on [-fov_half, fov_half]^2. values(iy, ix) holds the
/// pixel at x = x_center(ix), y = y_center(iy).
struct ImageGrid {
  int n = 0;
  double fov_half = 0.0;
  Matrix values;

  double pixel_size() const { return 2.0 * fov_half / n; }
  double pixel_area() const { return pixel_size() * pixel_size(); }
  double center(int i) const { return -fov_half + (i + 0.5) * pixel_size(); }
  Vec2 position(int iy, int ix) const { return {center(ix), center(iy)}; }
  bool same_shape(const ImageGrid& other) const;
};

struct Sinogram {
  Vector angles;
  Vector s_grid;
  RowMatrix values;  // angles x s_grid
  bool uniform_s = false;

  Index n_angles() const { return angles.size(); }
  Index n_s() const { return s_grid.size(); }
  void validate() const;
};

/// Per-coil voltage samples u(k, l) at t(k) = k / f_s.
struct SignalTrace {
  Vector t;
  Matrix u;

  Index n_samples() const { return t.size(); }
  Index n_coils() const { return u.cols(); }
};

ImageGrid make_grid(int n, const ScanConfig& config);
ImageGrid make_grid(int n, double fov_half);

// ---------------------------------------------------------------------------
// Phantoms
// ---------------------------------------------------------------------------

struct Disk {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double value = 1.0;
};

struct Square {
  Vec2 center = Vec2::Zero();
  double side = 0.0;
  double value = 1.0;
};

using Shape = std::variant<Disk, Square>;

struct PhantomOptions {
  /// Subsamples per pixel axis; 1 samples the pixel center, larger values
  /// store the average shape value over the pixel cell.
  int supersample = 1;
  bool normalize = false;
};

/// Rasterizes the sum of the shapes. Throws out_of_support if any shape
/// leaves the disk of radius fov_half.
ImageGrid make_phantom(const ImageGrid& grid, std::span<const Shape> shapes,
                       const PhantomOptions& options = {});
ImageGrid make_phantom(const ImageGrid& grid, const Shape& shape,
                       const PhantomOptions& options = {});

/// Checks an externally supplied image: nonnegative and zero outside the FOV disk.
void check_support(const ImageGrid& image);

/// Square and disk used by the default runs (not radially symmetric).
std::vector<Shape> default_phantom_shapes(double fov_half);

struct ParticleCount {
  double count = 0.0;  // N_p
  double bound = 0.0;  // c_max * pi * R^2 (same units)
};

ParticleCount total_particles(const ImageGrid& image, const TracerModel& tracer);

}  // namespace fflmpi
