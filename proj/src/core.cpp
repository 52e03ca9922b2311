#include "fflmpi/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fflmpi {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid-argument";
    case ErrorKind::out_of_support: return "out-of-support";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::mode: return "mode";
    case ErrorKind::constraint: return "constraint-violation";
    case ErrorKind::degenerate_scale: return "degenerate-scale";
    case ErrorKind::solver: return "solver";
    case ErrorKind::config: return "config";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

const char* to_string(RotationMode mode) noexcept {
  return mode == RotationMode::sequential ? "sequential" : "simultaneous";
}

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorKind::invalid_argument, message);
}

}  // namespace

void PhysicsConstants::validate() const {
  require(mu0 > 0 && std::isfinite(mu0), "mu0 must be positive");
  require(kB > 0 && std::isfinite(kB), "kB must be positive");
  require(temperature > 0 && std::isfinite(temperature), "temperature must be positive");
}

double TracerModel::particle_volume() const {
  return std::numbers::pi / 6.0 * core_diameter * core_diameter * core_diameter;
}

double TracerModel::particle_moment() const { return saturation_magnetization * particle_volume(); }

double TracerModel::langevin_beta() const {
  return constants.mu0 * particle_moment() / (constants.kB * constants.temperature);
}

double TracerModel::particle_density() const {
  // moles of Fe3O4 carried by one particle core
  const double moles_per_particle = magnetite_density * particle_volume() / magnetite_molar_mass;
  return concentration / moles_per_particle;
}

void TracerModel::validate() const {
  constants.validate();
  require(core_diameter > 0, "core diameter must be positive");
  require(saturation_magnetization > 0, "saturation magnetization must be positive");
  require(concentration > 0, "tracer concentration must be positive");
  require(magnetite_density > 0 && magnetite_molar_mass > 0, "magnetite constants must be positive");
}

ScanConfig ScanConfig::reference_scanner(RotationMode mode) {
  ScanConfig config;
  config.mode = mode;
  return config;
}

double ScanConfig::measurement_time() const {
  if (total_time > 0) return total_time;
  if (mode == RotationMode::sequential) return n_angles * half_period();
  return 0.5 / f_rot;
}

Index ScanConfig::n_samples() const {
  return static_cast<Index>(std::llround(measurement_time() * f_sample));
}

int ScanConfig::displacement_intervals() const {
  if (s_samples > 0) return s_samples;
  return static_cast<int>(std::llround(f_sample * half_period()));
}

int ScanConfig::n_sweeps() const {
  if (mode == RotationMode::sequential) return n_angles;
  return static_cast<int>(std::ceil(measurement_time() / half_period() - 1e-9));
}

void ScanConfig::validate() const {
  require(gradient > 0 && drive_amplitude > 0, "gradient and drive amplitude must be positive");
  require(f_drive > 0 && f_rot > 0 && f_sample > 0, "frequencies must be positive");
  require(f_sample > 2.0 * f_drive, "sampling frequency must exceed twice the drive frequency");
  require(f_drive > f_rot, "drive frequency must exceed the rotation frequency");
  require(mu0 > 0, "mu0 must be positive");
  require(!coils.empty(), "at least one receive coil is required");
  require(n_angles >= 1, "n_angles must be at least 1");
  require(displacement_intervals() >= 2, "at least two displacement intervals are required");
  require(n_samples() >= 1, "measurement time is shorter than one sample");
  if (mode == RotationMode::sequential) {
    require(measurement_time() <= n_angles * half_period() * (1 + 1e-12),
            "sequential measurement exceeds n_angles half drive-periods");
  }
}

bool ImageGrid::same_shape(const ImageGrid& other) const {
  return n == other.n && std::abs(fov_half - other.fov_half) <= 1e-12 * fov_half;
}

void Sinogram::validate() const {
  if (values.rows() != angles.size() || values.cols() != s_grid.size()) {
    std::ostringstream os;
    os << "sinogram values are " << values.rows() << "x" << values.cols() << " but grids are "
       << angles.size() << "x" << s_grid.size();
    throw Error(ErrorKind::geometry, os.str());
  }
  for (Index j = 1; j < s_grid.size(); ++j) {
    if (!(s_grid[j] > s_grid[j - 1])) throw Error(ErrorKind::geometry, "s_grid must be strictly increasing");
  }
}

ImageGrid make_grid(int n, double fov_half) {
  require(n >= 2, "grid needs at least 2 pixels per axis");
  require(fov_half > 0, "fov half-width must be positive");
  ImageGrid grid;
  grid.n = n;
  grid.fov_half = fov_half;
  grid.values = Matrix::Zero(n, n);
  return grid;
}

ImageGrid make_grid(int n, const ScanConfig& config) { return make_grid(n, config.fov_radius()); }

namespace {

double support_radius(const Shape& shape) {
  return std::visit(
      [](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          if (s.radius <= 0) return 0.0;
          return s.center.norm() + s.radius;
        } else {
          if (s.side <= 0) return 0.0;
          const double h = 0.5 * s.side;
          return (s.center.cwiseAbs() + Vec2(h, h)).norm();
        }
      },
      shape);
}

double shape_value(const Shape& shape, const Vec2& r) {
  return std::visit(
      [&r](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          if (s.radius <= 0) return 0.0;
          return (r - s.center).norm() <= s.radius ? s.value : 0.0;
        } else {
          if (s.side <= 0) return 0.0;
          const Vec2 d = (r - s.center).cwiseAbs();
          return (d.x() <= 0.5 * s.side && d.y() <= 0.5 * s.side) ? s.value : 0.0;
        }
      },
      shape);
}

}  // namespace

ImageGrid make_phantom(const ImageGrid& grid, std::span<const Shape> shapes, const PhantomOptions& options) {
  require(options.supersample >= 1, "supersample must be at least 1");
  for (const auto& shape : shapes) {
    const bool negative = std::visit([](const auto& s) { return s.value < 0; }, shape);
    require(!negative, "shape values must be nonnegative");
    if (support_radius(shape) > grid.fov_half * (1 + 1e-12)) {
      throw Error(ErrorKind::out_of_support, "shape extends beyond the FOV disk");
    }
  }

  ImageGrid out = make_grid(grid.n, grid.fov_half);
  const int q = options.supersample;
  const double h = grid.pixel_size();
  for (int iy = 0; iy < grid.n; ++iy) {
    for (int ix = 0; ix < grid.n; ++ix) {
      const Vec2 c = grid.position(iy, ix);
      double acc = 0.0;
      for (int sy = 0; sy < q; ++sy) {
        for (int sx = 0; sx < q; ++sx) {
          const Vec2 r = c + h * Vec2((sx + 0.5) / q - 0.5, (sy + 0.5) / q - 0.5);
          for (const auto& shape : shapes) acc += shape_value(shape, r);
        }
      }
      out.values(iy, ix) = acc / (q * q);
    }
  }
  // Cells straddling the disk boundary may pick up subsamples outside B_R.
  for (int iy = 0; iy < grid.n; ++iy)
    for (int ix = 0; ix < grid.n; ++ix)
      if (grid.position(iy, ix).norm() > grid.fov_half) out.values(iy, ix) = 0.0;

  if (options.normalize) {
    const double peak = out.values.maxCoeff();
    if (peak > 0) out.values /= peak;
  }
  return out;
}

ImageGrid make_phantom(const ImageGrid& grid, const Shape& shape, const PhantomOptions& options) {
  return make_phantom(grid, std::span<const Shape>(&shape, 1), options);
}

void check_support(const ImageGrid& image) {
  if (image.values.rows() != image.n || image.values.cols() != image.n)
    throw Error(ErrorKind::geometry, "image values do not match the grid size");
  for (int iy = 0; iy < image.n; ++iy) {
    for (int ix = 0; ix < image.n; ++ix) {
      const double v = image.values(iy, ix);
      if (!std::isfinite(v) || v < 0) throw Error(ErrorKind::invalid_argument, "image values must be finite and nonnegative");
      if (v != 0 && image.position(iy, ix).norm() > image.fov_half)
        throw Error(ErrorKind::out_of_support, "image has support outside the FOV disk");
    }
  }
}

std::vector<Shape> default_phantom_shapes(double fov_half) {
  const double R = fov_half;
  return {
      Square{Vec2(-0.28 * R, -0.22 * R), 0.42 * R, 1.0},
      Disk{Vec2(0.30 * R, 0.26 * R), 0.24 * R, 0.6},
  };
}

ParticleCount total_particles(const ImageGrid& image, const TracerModel& tracer) {
  if ((image.values.array() < 0).any()) throw Error(ErrorKind::invalid_argument, "negative concentration");
  const double scale = tracer.particle_density();
  ParticleCount out;
  out.count = scale * image.values.sum() * image.pixel_area();
  const double cmax = image.values.size() ? image.values.maxCoeff() : 0.0;
  out.bound = scale * cmax * std::numbers::pi * image.fov_half * image.fov_half;
  return out;
}

}  // namespace fflmpi
