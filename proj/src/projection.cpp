#include "fflmpi/projection.hpp"

#include "fflmpi/physics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fflmpi {

const char* to_string(GeometryKind kind) noexcept {
  switch (kind) {
    case GeometryKind::sequential: return "sequential";
    case GeometryKind::simultaneous_dashed: return "simultaneous_dashed";
    case GeometryKind::per_sample: return "per_sample";
  }
  return "unknown";
}

Sinogram ProjectionGeometry::empty_sinogram() const {
  Sinogram out;
  out.angles = angles;
  out.s_grid = s_grid;
  out.values = RowMatrix::Zero(angles.size(), s_grid.size());
  out.uniform_s = false;
  return out;
}

Vector displacement_grid(const ScanConfig& config) {
  const int intervals = config.displacement_intervals();
  const double R = config.fov_radius();
  Vector s(intervals + 1);
  for (int j = 0; j <= intervals; ++j) s[j] = -R * std::cos(std::numbers::pi * j / intervals);
  s[0] = -R;
  s[intervals] = R;
  return s;
}

namespace {

ProjectionGeometry sweep_geometry(const ScanConfig& config, GeometryKind kind) {
  config.validate();
  ProjectionGeometry geom;
  geom.kind = kind;
  geom.fov_radius = config.fov_radius();
  geom.s_grid = displacement_grid(config);
  const int sweeps = config.n_sweeps();
  geom.angles.resize(sweeps);
  for (int j = 0; j < sweeps; ++j) {
    if (kind == GeometryKind::sequential) {
      geom.angles[j] = j * std::numbers::pi / config.n_angles;
    } else {
      const double midpoint = (j + 0.5) * config.half_period();
      geom.angles[j] = 2.0 * std::numbers::pi * config.f_rot * midpoint;
    }
  }
  const Index n = config.n_samples();
  geom.sample_column.resize(n);
  for (Index k = 0; k < n; ++k) geom.sample_column[k] = ffl_state(config.sample_time(k), config).sweep;
  return geom;
}

}  // namespace

ProjectionGeometry sequential_geometry(const ScanConfig& config) {
  if (config.mode != RotationMode::sequential) throw Error(ErrorKind::mode, "sequential geometry needs sequential rotation");
  return sweep_geometry(config, GeometryKind::sequential);
}

ProjectionGeometry dashed_geometry(const ScanConfig& config) {
  if (config.mode != RotationMode::simultaneous)
    throw Error(ErrorKind::mode, "dashed-line geometry needs simultaneous rotation");
  return sweep_geometry(config, GeometryKind::simultaneous_dashed);
}

ProjectionGeometry per_sample_geometry(const ScanConfig& config) {
  config.validate();
  ProjectionGeometry geom;
  geom.kind = GeometryKind::per_sample;
  geom.fov_radius = config.fov_radius();
  geom.s_grid = displacement_grid(config);
  const Index n = config.n_samples();
  geom.angles.resize(n);
  geom.sample_column.resize(n);
  for (Index k = 0; k < n; ++k) {
    geom.angles[k] = ffl_state(config.sample_time(k), config).phi;
    geom.sample_column[k] = static_cast<int>(k);
  }
  return geom;
}

ProjectionGeometry scan_geometry(const ScanConfig& config) {
  return config.mode == RotationMode::sequential ? sequential_geometry(config) : dashed_geometry(config);
}

Vector trapezoid_weights(const Vector& grid) {
  const Index n = grid.size();
  Vector w = Vector::Zero(n);
  for (Index j = 0; j + 1 < n; ++j) {
    const double half = 0.5 * (grid[j + 1] - grid[j]);
    w[j] += half;
    w[j + 1] += half;
  }
  return w;
}

namespace {

void check_geometry(const ImageGrid& grid, const ProjectionGeometry& geom) {
  if (std::abs(grid.fov_half - geom.fov_radius) > 1e-9 * geom.fov_radius)
    throw Error(ErrorKind::invalid_argument, "image FOV does not match the projection geometry");
  if (geom.s_grid.size() == 0 || geom.angles.size() == 0)
    throw Error(ErrorKind::invalid_argument, "empty projection geometry");
  const double limit = geom.fov_radius * (1 + 1e-12);
  if (geom.s_grid.cwiseAbs().maxCoeff() > limit)
    throw Error(ErrorKind::invalid_argument, "s_grid leaves [-R, R]");
}

void check_sinogram(const Sinogram& sino, const ProjectionGeometry& geom) {
  if (sino.values.rows() != geom.n_angles() || sino.values.cols() != geom.n_s())
    throw Error(ErrorKind::geometry, "sinogram dimensions do not match the geometry");
}

/// Visits the bilinear stencil of every sample on FFL(e_phi, s). The visitor
/// receives the column-major pixel index, the quadrature weight and the
/// line coordinate v. Forward and adjoint operators share this routine,
/// which makes them exact transposes of each other.
template <typename Visitor>
void visit_line(int n, double fov_half, double phi, double s, Visitor&& visit) {
  const double h = 2.0 * fov_half / n;
  const Vec2 e = normal_direction(phi);
  const Vec2 ep = perp_direction(phi);
  // r(v) = s e - v ep; bilinear interpolation is nonzero up to half a pixel past the edge centers
  const double bound = fov_half + 0.5 * h;
  double vmin = -1e300, vmax = 1e300;
  for (int d = 0; d < 2; ++d) {
    const double origin = s * e[d];
    const double slope = -ep[d];
    if (std::abs(slope) < 1e-14) {
      if (std::abs(origin) > bound) return;
      continue;
    }
    double lo = (-bound - origin) / slope;
    double hi = (bound - origin) / slope;
    if (lo > hi) std::swap(lo, hi);
    vmin = std::max(vmin, lo);
    vmax = std::min(vmax, hi);
  }
  if (vmin > vmax) return;
  const long i0 = static_cast<long>(std::ceil(vmin / h));
  const long i1 = static_cast<long>(std::floor(vmax / h));
  const double inv_h = 1.0 / h;
  for (long i = i0; i <= i1; ++i) {
    const double v = i * h;
    const double x = s * e[0] - v * ep[0];
    const double y = s * e[1] - v * ep[1];
    const double fx = (x + fov_half) * inv_h - 0.5;
    const double fy = (y + fov_half) * inv_h - 0.5;
    const double flx = std::floor(fx);
    const double fly = std::floor(fy);
    const int ix = static_cast<int>(flx);
    const int iy = static_cast<int>(fly);
    const double wx = fx - flx;
    const double wy = fy - fly;
    const double w[2][2] = {{(1 - wx) * (1 - wy), wx * (1 - wy)}, {(1 - wx) * wy, wx * wy}};
    for (int dy = 0; dy < 2; ++dy) {
      const int py = iy + dy;
      if (py < 0 || py >= n) continue;
      for (int dx = 0; dx < 2; ++dx) {
        const int px = ix + dx;
        if (px < 0 || px >= n) continue;
        const double weight = w[dy][dx] * h;
        if (weight != 0.0) visit(static_cast<Index>(px) * n + py, weight, v);
      }
    }
  }
}

template <bool Weighted>
Sinogram project(const ImageGrid& image, const ProjectionGeometry& geom) {
  check_geometry(image, geom);
  if (image.values.rows() != image.n || image.values.cols() != image.n)
    throw Error(ErrorKind::invalid_argument, "image values do not match the grid size");
  Sinogram out = geom.empty_sinogram();
  const double* c = image.values.data();
  for (Index a = 0; a < geom.n_angles(); ++a) {
    for (Index j = 0; j < geom.n_s(); ++j) {
      double acc = 0.0;
      visit_line(image.n, image.fov_half, geom.angles[a], geom.s_grid[j], [&](Index p, double w, double v) {
        if constexpr (Weighted) acc -= w * v * c[p];
        else acc += w * c[p];
      });
      out.values(a, j) = acc;
    }
  }
  return out;
}

template <bool Weighted>
ImageGrid back_project(const Sinogram& sino, const ProjectionGeometry& geom, const ImageGrid& grid_spec) {
  check_geometry(grid_spec, geom);
  check_sinogram(sino, geom);
  ImageGrid out = make_grid(grid_spec.n, grid_spec.fov_half);
  double* c = out.values.data();
  for (Index a = 0; a < geom.n_angles(); ++a) {
    for (Index j = 0; j < geom.n_s(); ++j) {
      const double value = sino.values(a, j);
      if (value == 0.0) continue;
      visit_line(grid_spec.n, grid_spec.fov_half, geom.angles[a], geom.s_grid[j], [&](Index p, double w, double v) {
        if constexpr (Weighted) c[p] -= w * v * value;
        else c[p] += w * value;
      });
    }
  }
  return out;
}

}  // namespace

Sinogram radon_apply(const ImageGrid& image, const ProjectionGeometry& geom) { return project<false>(image, geom); }

Sinogram weighted_radon_apply(const ImageGrid& image, const ProjectionGeometry& geom) {
  return project<true>(image, geom);
}

ImageGrid radon_adjoint(const Sinogram& sinogram, const ProjectionGeometry& geom, const ImageGrid& grid_spec) {
  return back_project<false>(sinogram, geom, grid_spec);
}

ImageGrid weighted_radon_adjoint(const Sinogram& sinogram, const ProjectionGeometry& geom,
                                 const ImageGrid& grid_spec) {
  return back_project<true>(sinogram, geom, grid_spec);
}


Eigen::SparseMatrix<double, Eigen::RowMajor> radon_matrix(const ImageGrid& grid_spec, const ProjectionGeometry& geom,
                                                          bool weighted) {
  check_geometry(grid_spec, geom);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index a = 0; a < geom.n_angles(); ++a) {
    for (Index j = 0; j < geom.n_s(); ++j) {
      const Index row = a * geom.n_s() + j;
      visit_line(grid_spec.n, grid_spec.fov_half, geom.angles[a], geom.s_grid[j], [&](Index p, double w, double v) {
        entries.emplace_back(row, p, weighted ? -w * v : w);
      });
    }
  }
  const Index pixels = static_cast<Index>(grid_spec.n) * grid_spec.n;
  Eigen::SparseMatrix<double, Eigen::RowMajor> m(geom.n_angles() * geom.n_s(), pixels);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

Sinogram build_sequential_sinogram(const ImageGrid& image, const ScanConfig& config, int n_angles) {
  if (config.mode != RotationMode::sequential) throw Error(ErrorKind::mode, "sequential sinogram needs sequential rotation");
  ScanConfig swept = config;
  swept.n_angles = n_angles;
  swept.total_time = 0.0;
  return radon_apply(image, sequential_geometry(swept));
}

Sinogram build_simultaneous_sinogram(const ImageGrid& image, const ScanConfig& config) {
  return radon_apply(image, dashed_geometry(config));
}

}  // namespace fflmpi
