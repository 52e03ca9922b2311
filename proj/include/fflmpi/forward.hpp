#pragma once

#include "fflmpi/core.hpp"
#include "fflmpi/projection.hpp"

#include <cstdint>
#include <vector>

namespace fflmpi {

/// Linear map from sinogram values to per-coil time samples where every
/// sample reads one sinogram column:
///   out(k, l) = rows[l].row(k) . sinogram.row(column[k]).
/// The K_1, K_2, K_3 operators and their normalized combinations used by the
/// reconstruction are all of this form.
class SampledConvolution {
 public:
  SampledConvolution() = default;
  SampledConvolution(Eigen::VectorXi column, Index n_columns, std::vector<RowMatrix> rows);

  Matrix apply(const RowMatrix& sinogram) const;
  /// Transpose of apply().
  RowMatrix adjoint(const Matrix& samples) const;

  Index n_samples() const { return column_.size(); }
  Index n_coils() const { return static_cast<Index>(rows_.size()); }
  Index n_columns() const { return n_columns_; }
  Index n_s() const { return rows_.empty() ? 0 : rows_.front().cols(); }
  const RowMatrix& rows(Index coil) const { return rows_[static_cast<std::size_t>(coil)]; }
  const Eigen::VectorXi& column() const { return column_; }

  SampledConvolution& operator+=(const SampledConvolution& other);
  SampledConvolution& operator*=(double factor);

 private:
  Eigen::VectorXi column_;
  Index n_columns_ = 0;
  std::vector<RowMatrix> rows_;
};

SampledConvolution operator+(SampledConvolution a, const SampledConvolution& b);
SampledConvolution operator*(double factor, SampledConvolution a);

/// Discretized convolution operators of the factorized forward model.
struct KernelOperators {
  ProjectionGeometry geometry;
  Vector time;
  Vector displacement;  // s_t per sample
  Vector phi;           // exact phi_t per sample
  Vector phi_rate;
  Vector lambda_rate;
  // scalar prefactors, n_samples x n_coils
  Matrix a1;  // -mu0 A Lambda'(t) e_phi . p_l
  Matrix a2;  // +mu0 G phi'_t e_phi . p_l
  Matrix a3;  // -mu0 phi'_t e_perp . p_l
  // quadrature rows over s_grid, n_samples x n_s, including the particle density
  RowMatrix kernel_derivative;  // w_j m'(G (s_t - s_j))
  RowMatrix kernel_moment;      // w_j m(G (s_t - s_j))

  Index n_samples() const { return time.size(); }
  Index n_coils() const { return a1.cols(); }

  SampledConvolution k1() const;
  SampledConvolution k2() const;
  SampledConvolution k3() const;
};

KernelOperators build_kernel_operators(const ScanConfig& config, const TracerModel& tracer,
                                       const ProjectionGeometry& geometry);

SignalTrace k1_apply(const Sinogram& v, const KernelOperators& ops);
SignalTrace k2_apply(const Sinogram& weighted, const KernelOperators& ops);
SignalTrace k3_apply(const Sinogram& v, const KernelOperators& ops);
Vector k1_apply(const Sinogram& v, const KernelOperators& ops, Index coil);
Vector k2_apply(const Sinogram& weighted, const KernelOperators& ops, Index coil);
Vector k3_apply(const Sinogram& v, const KernelOperators& ops, Index coil);

struct DirectOptions {
  /// Midpoint subsamples per pixel axis; the pixel value is constant over its cell.
  int subsamples = 1;
  int jobs = 0;
};

/// Brute-force evaluation of the FFL signal equation by pixel quadrature,
/// with the time derivative of the mean moment expanded analytically.
SignalTrace forward_direct(const ImageGrid& image, const ScanConfig& config, const TracerModel& tracer,
                           const DirectOptions& options = {});

/// Coil-projected magnetization sum_r c(r) m(xi(r, t)) e_phi . p_l dA at one
/// instant, so that forward_direct = -mu0 d/dt of this quantity.
Vector magnetization_projection(const ImageGrid& image, double t, const ScanConfig& config,
                                const TracerModel& tracer, const DirectOptions& options = {});

/// K1 v + K2 (R~ c) + K3 v. Inputs must be nonnegative.
SignalTrace forward_factorized(const ImageGrid& image, const Sinogram& v, const KernelOperators& ops);

struct FactorizedTerms {
  SignalTrace k1;  // K1 R c
  SignalTrace k2;  // K2 R~ c
  SignalTrace k3;  // K3 R c
  Sinogram radon;
  Sinogram weighted;
};

FactorizedTerms forward_terms(const ImageGrid& image, const KernelOperators& ops);

struct NormalizedSignal {
  SignalTrace data;
  double u_star = 0.0;

  /// Noise standard deviation as a percentage of u*.
  double noise_percent(double std_dev) const { return 100.0 * std_dev / u_star; }
};

/// Divides by the global maximum absolute sample u* over all coils.
NormalizedSignal normalize(const SignalTrace& trace);

/// K_i f / max_t |K_1 f| per coil.
struct NormalizedTerms {
  SignalTrace k1, k2, k3;
  Vector k1_peak;  // per coil
};

NormalizedTerms normalize_terms(const FactorizedTerms& terms);

SignalTrace add_noise(const SignalTrace& trace, double std_dev, std::uint64_t seed);

struct CoilBounds {
  double max_k1 = 0.0;
  double max_k2 = 0.0;
  double max_k3 = 0.0;
  double k3_bound = 0.0;       // mu0 phi' |p_l| m N_p
  double k3_bound_cmax = 0.0;  // with N_p <= c_max pi R^2
  Index k3_argmax = 0;
  Index k2_bound_violations = 0;
  double k2_bound_min_margin = 0.0;  // min over samples of |K1| + slack - ratio |K2|, relative to max |K1|
};

struct BoundReport {
  double speed_ratio_envelope = 0.0;
  double particle_count = 0.0;
  double particle_bound = 0.0;
  double phi_rate = 0.0;
  Index samples_checked = 0;
  std::vector<CoilBounds> coils;
  FactorizedTerms terms;

  bool k2_bound_holds() const;
  bool k3_bound_holds() const;
};

/// Magnitudes of the rotation-induced terms and the bounds that control them,
/// evaluated on the exact per-sample angles.
BoundReport bound_report(const ImageGrid& image, const ScanConfig& config, const TracerModel& tracer);

}  // namespace fflmpi
