#pragma once

#include "fflmpi/core.hpp"

#include <Eigen/SparseCore>

namespace fflmpi {

enum class GeometryKind {
  sequential,           // one column per sweep angle (j-1) pi / n
  simultaneous_dashed,  // one column per half drive-period, representative angle at its midpoint
  per_sample,           // one column per time sample at the exact angle phi_t
};

const char* to_string(GeometryKind kind) noexcept;

/// Angle/displacement sampling of a sinogram together with the column each
/// time sample of the scan reads from.
struct ProjectionGeometry {
  GeometryKind kind = GeometryKind::sequential;
  double fov_radius = 0.0;
  Vector angles;
  Vector s_grid;
  Eigen::VectorXi sample_column;

  Index n_angles() const { return angles.size(); }
  Index n_s() const { return s_grid.size(); }
  Sinogram empty_sinogram() const;
};

/// Displacements s_j = -R cos(pi j / N), j = 0..N: the distinct FFL positions
/// visited at the sampling instants of one translation.
Vector displacement_grid(const ScanConfig& config);

ProjectionGeometry sequential_geometry(const ScanConfig& config);
ProjectionGeometry dashed_geometry(const ScanConfig& config);
ProjectionGeometry per_sample_geometry(const ScanConfig& config);
/// sequential_geometry or dashed_geometry depending on config.mode.
ProjectionGeometry scan_geometry(const ScanConfig& config);

/// Line integrals along FFL(e_phi, s): the line r(v) = s e_phi - v e_perp is
/// sampled at pixel-size steps, c is bilinearly interpolated, and the samples
/// are summed with trapezoid weights.
Sinogram radon_apply(const ImageGrid& image, const ProjectionGeometry& geom);
/// Same quadrature with the weight r . e_perp = -v.
Sinogram weighted_radon_apply(const ImageGrid& image, const ProjectionGeometry& geom);

/// Exact transposes of the two discretizations above.
ImageGrid radon_adjoint(const Sinogram& sinogram, const ProjectionGeometry& geom, const ImageGrid& grid_spec);
ImageGrid weighted_radon_adjoint(const Sinogram& sinogram, const ProjectionGeometry& geom,
                                 const ImageGrid& grid_spec);

/// Matrix of radon_apply (or weighted_radon_apply). Rows follow the
/// row-major sinogram layout a * n_s + j, columns the column-major pixel index.
Eigen::SparseMatrix<double, Eigen::RowMajor> radon_matrix(const ImageGrid& grid_spec, const ProjectionGeometry& geom,
                                                          bool weighted = false);

Sinogram build_sequential_sinogram(const ImageGrid& image, const ScanConfig& config, int n_angles);
Sinogram build_simultaneous_sinogram(const ImageGrid& image, const ScanConfig& config);

/// Trapezoid weights of a (possibly non-uniform) increasing grid.
Vector trapezoid_weights(const Vector& grid);

}  // namespace fflmpi
