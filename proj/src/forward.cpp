#include "fflmpi/forward.hpp"

#include "fflmpi/parallel.hpp"
#include "fflmpi/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace fflmpi {

// ---------------------------------------------------------------------------
// SampledConvolution
// ---------------------------------------------------------------------------

SampledConvolution::SampledConvolution(Eigen::VectorXi column, Index n_columns, std::vector<RowMatrix> rows)
    : column_(std::move(column)), n_columns_(n_columns), rows_(std::move(rows)) {
  for (const auto& r : rows_) {
    if (r.rows() != column_.size() || r.cols() != rows_.front().cols())
      throw Error(ErrorKind::geometry, "inconsistent sampled convolution rows");
  }
  if (column_.size() && (column_.minCoeff() < 0 || column_.maxCoeff() >= n_columns_))
    throw Error(ErrorKind::geometry, "sample references a missing sinogram column");
}

Matrix SampledConvolution::apply(const RowMatrix& sinogram) const {
  if (sinogram.rows() != n_columns_ || sinogram.cols() != n_s())
    throw Error(ErrorKind::geometry, "sinogram does not match the operator's geometry");
  Matrix out(n_samples(), n_coils());
  for (Index l = 0; l < n_coils(); ++l) {
    const RowMatrix& r = rows_[static_cast<std::size_t>(l)];
    for (Index k = 0; k < n_samples(); ++k) out(k, l) = r.row(k).dot(sinogram.row(column_[k]));
  }
  return out;
}

RowMatrix SampledConvolution::adjoint(const Matrix& samples) const {
  if (samples.rows() != n_samples() || samples.cols() != n_coils())
    throw Error(ErrorKind::geometry, "sample matrix does not match the operator");
  RowMatrix out = RowMatrix::Zero(n_columns_, n_s());
  for (Index l = 0; l < n_coils(); ++l) {
    const RowMatrix& r = rows_[static_cast<std::size_t>(l)];
    for (Index k = 0; k < n_samples(); ++k) out.row(column_[k]) += samples(k, l) * r.row(k);
  }
  return out;
}

SampledConvolution& SampledConvolution::operator+=(const SampledConvolution& other) {
  if (other.column_ != column_ || other.n_coils() != n_coils() || other.n_s() != n_s())
    throw Error(ErrorKind::geometry, "cannot add sampled convolutions over different geometries");
  for (std::size_t l = 0; l < rows_.size(); ++l) rows_[l] += other.rows_[l];
  return *this;
}

SampledConvolution& SampledConvolution::operator*=(double factor) {
  for (auto& r : rows_) r *= factor;
  return *this;
}

SampledConvolution operator+(SampledConvolution a, const SampledConvolution& b) { return a += b; }
SampledConvolution operator*(double factor, SampledConvolution a) { return a *= factor; }

// ---------------------------------------------------------------------------
// Kernel operators
// ---------------------------------------------------------------------------

KernelOperators build_kernel_operators(const ScanConfig& config, const TracerModel& tracer,
                                       const ProjectionGeometry& geometry) {
  config.validate();
  tracer.validate();
  const Index n = config.n_samples();
  if (geometry.sample_column.size() != n)
    throw Error(ErrorKind::geometry, "geometry does not cover the scan's time samples");
  if (std::abs(geometry.fov_radius - config.fov_radius()) > 1e-9 * config.fov_radius())
    throw Error(ErrorKind::geometry, "geometry FOV differs from the scanner FOV");

  KernelOperators ops;
  ops.geometry = geometry;
  const Index L = config.n_coils();
  const Index ns = geometry.n_s();
  ops.time.resize(n);
  ops.displacement.resize(n);
  ops.phi.resize(n);
  ops.phi_rate.resize(n);
  ops.lambda_rate.resize(n);
  ops.a1.resize(n, L);
  ops.a2.resize(n, L);
  ops.a3.resize(n, L);
  ops.kernel_derivative.resize(n, ns);
  ops.kernel_moment.resize(n, ns);

  const double mu0 = config.mu0;
  const double A = config.drive_field();
  const double G = config.gradient_field();
  const double m = tracer.particle_moment();
  const double beta = tracer.langevin_beta();
  const double density = tracer.particle_density();
  const Vector w = trapezoid_weights(geometry.s_grid);

  for (Index k = 0; k < n; ++k) {
    const FflState st = ffl_state(config.sample_time(k), config);
    ops.time[k] = st.t;
    ops.displacement[k] = st.displacement;
    ops.phi[k] = st.phi;
    ops.phi_rate[k] = st.phi_rate;
    ops.lambda_rate[k] = st.lambda_rate;
    for (Index l = 0; l < L; ++l) {
      const Vec2& p = config.coils[static_cast<std::size_t>(l)];
      ops.a1(k, l) = -mu0 * A * st.lambda_rate * st.e_phi.dot(p);
      ops.a2(k, l) = mu0 * G * st.phi_rate * st.e_phi.dot(p);
      ops.a3(k, l) = -mu0 * st.phi_rate * st.e_phi_perp.dot(p);
    }
    for (Index j = 0; j < ns; ++j) {
      const double field = G * (st.displacement - geometry.s_grid[j]);
      const auto [value, slope] = langevin_with_derivative(beta * field);
      ops.kernel_derivative(k, j) = density * w[j] * m * beta * slope;
      ops.kernel_moment(k, j) = density * w[j] * m * value;
    }
  }
  return ops;
}

namespace {

SampledConvolution scaled_rows(const KernelOperators& ops, const Matrix& prefactor, const RowMatrix& kernel) {
  std::vector<RowMatrix> rows;
  rows.reserve(static_cast<std::size_t>(ops.n_coils()));
  for (Index l = 0; l < ops.n_coils(); ++l) rows.emplace_back(prefactor.col(l).asDiagonal() * kernel);
  return SampledConvolution(ops.geometry.sample_column, ops.geometry.n_angles(), std::move(rows));
}

SignalTrace as_trace(const Vector& t, Matrix u) {
  SignalTrace out;
  out.t = t;
  out.u = std::move(u);
  return out;
}

void check_columns(const Sinogram& v, const KernelOperators& ops) {
  if (v.values.rows() != ops.geometry.n_angles() || v.values.cols() != ops.geometry.n_s())
    throw Error(ErrorKind::geometry, "sinogram lacks the columns required by the scan");
}

// Each K_i only needs one scalar per sample and coil; the full row matrices
// are only materialized for the reconstruction operators.
Matrix apply_kernel(const Sinogram& v, const KernelOperators& ops, const Matrix& prefactor, const RowMatrix& kernel) {
  check_columns(v, ops);
  const auto& col = ops.geometry.sample_column;
  Matrix out(ops.n_samples(), ops.n_coils());
  for (Index k = 0; k < ops.n_samples(); ++k) {
    const double conv = kernel.row(k).dot(v.values.row(col[k]));
    out.row(k) = conv * prefactor.row(k);
  }
  return out;
}

}  // namespace

SampledConvolution KernelOperators::k1() const { return scaled_rows(*this, a1, kernel_derivative); }
SampledConvolution KernelOperators::k2() const { return scaled_rows(*this, a2, kernel_derivative); }
SampledConvolution KernelOperators::k3() const { return scaled_rows(*this, a3, kernel_moment); }

SignalTrace k1_apply(const Sinogram& v, const KernelOperators& ops) {
  return as_trace(ops.time, apply_kernel(v, ops, ops.a1, ops.kernel_derivative));
}
SignalTrace k2_apply(const Sinogram& weighted, const KernelOperators& ops) {
  return as_trace(ops.time, apply_kernel(weighted, ops, ops.a2, ops.kernel_derivative));
}
SignalTrace k3_apply(const Sinogram& v, const KernelOperators& ops) {
  return as_trace(ops.time, apply_kernel(v, ops, ops.a3, ops.kernel_moment));
}

namespace {
void check_coil(const KernelOperators& ops, Index coil) {
  if (coil < 0 || coil >= ops.n_coils()) throw Error(ErrorKind::invalid_argument, "coil index out of range");
}
}  // namespace

Vector k1_apply(const Sinogram& v, const KernelOperators& ops, Index coil) {
  check_coil(ops, coil);
  return k1_apply(v, ops).u.col(coil);
}
Vector k2_apply(const Sinogram& weighted, const KernelOperators& ops, Index coil) {
  check_coil(ops, coil);
  return k2_apply(weighted, ops).u.col(coil);
}
Vector k3_apply(const Sinogram& v, const KernelOperators& ops, Index coil) {
  check_coil(ops, coil);
  return k3_apply(v, ops).u.col(coil);
}

// ---------------------------------------------------------------------------
// Direct evaluation
// ---------------------------------------------------------------------------

namespace {

struct QuadraturePoints {
  Eigen::Matrix2Xd r;
  Vector weight;  // c(r) dA
};

QuadraturePoints quadrature_points(const ImageGrid& image, int q) {
  if (q < 1) throw Error(ErrorKind::invalid_argument, "subsamples must be at least 1");
  check_support(image);
  const double h = image.pixel_size();
  const double area = image.pixel_area() / (q * q);
  Index count = 0;
  for (Index i = 0; i < image.values.size(); ++i) count += image.values.data()[i] != 0.0;
  QuadraturePoints pts;
  pts.r.resize(2, count * q * q);
  pts.weight.resize(count * q * q);
  Index p = 0;
  for (int ix = 0; ix < image.n; ++ix) {
    for (int iy = 0; iy < image.n; ++iy) {
      const double c = image.values(iy, ix);
      if (c == 0.0) continue;
      const Vec2 center = image.position(iy, ix);
      for (int sx = 0; sx < q; ++sx) {
        for (int sy = 0; sy < q; ++sy) {
          pts.r.col(p) = center + h * Vec2((sx + 0.5) / q - 0.5, (sy + 0.5) / q - 0.5);
          pts.weight[p] = c * area;
          ++p;
        }
      }
    }
  }
  return pts;
}

}  // namespace

SignalTrace forward_direct(const ImageGrid& image, const ScanConfig& config, const TracerModel& tracer,
                           const DirectOptions& options) {
  config.validate();
  tracer.validate();
  if (std::abs(image.fov_half - config.fov_radius()) > 1e-9 * config.fov_radius())
    throw Error(ErrorKind::invalid_argument, "image FOV does not match the scanner");
  const QuadraturePoints pts = quadrature_points(image, options.subsamples);
  const Index n = config.n_samples();
  const Index L = config.n_coils();
  const double mu0 = config.mu0;
  const double A = config.drive_field();
  const double G = config.gradient_field();
  const double m = tracer.particle_moment();
  const double beta = tracer.langevin_beta();
  const double density = tracer.particle_density();

  SignalTrace out;
  out.t.resize(n);
  out.u.resize(n, L);
  parallel_for(
      n,
      [&](std::ptrdiff_t k) {
        const FflState st = ffl_state(config.sample_time(k), config);
        // integrals of c m'(xi), c m'(xi) r.e_perp and c m(xi) over the plane
        double i1 = 0.0, i2 = 0.0, i3 = 0.0;
        for (Index p = 0; p < pts.weight.size(); ++p) {
          const double rx = pts.r(0, p), ry = pts.r(1, p);
          const double along = rx * st.e_phi.x() + ry * st.e_phi.y();
          const double across = rx * st.e_phi_perp.x() + ry * st.e_phi_perp.y();
          const double xi = G * (st.displacement - along);
          const auto [value, slope] = langevin_with_derivative(beta * xi);
          const double c = pts.weight[p];
          i1 += c * slope;
          i2 += c * slope * across;
          i3 += c * value;
        }
        i1 *= density * m * beta;
        i2 *= density * m * beta;
        i3 *= density * m;
        out.t[k] = st.t;
        for (Index l = 0; l < L; ++l) {
          const Vec2& pl = config.coils[static_cast<std::size_t>(l)];
          const double ep = st.e_phi.dot(pl);
          const double epp = st.e_phi_perp.dot(pl);
          out.u(k, l) = -mu0 * (A * st.lambda_rate * ep * i1 - G * st.phi_rate * ep * i2 + st.phi_rate * epp * i3);
        }
      },
      options.jobs);
  return out;
}

Vector magnetization_projection(const ImageGrid& image, double t, const ScanConfig& config,
                                const TracerModel& tracer, const DirectOptions& options) {
  const QuadraturePoints pts = quadrature_points(image, options.subsamples);
  const double G = config.gradient_field();
  const FflState st = ffl_state(t, config);
  double total = 0.0;
  for (Index p = 0; p < pts.weight.size(); ++p) {
    const double along = pts.r.col(p).dot(st.e_phi);
    total += pts.weight[p] * mean_moment(G * (st.displacement - along), tracer);
  }
  total *= tracer.particle_density();
  Vector out(config.n_coils());
  for (Index l = 0; l < config.n_coils(); ++l) out[l] = total * st.e_phi.dot(config.coils[static_cast<std::size_t>(l)]);
  return out;
}

// ---------------------------------------------------------------------------
// Factorized evaluation
// ---------------------------------------------------------------------------

SignalTrace forward_factorized(const ImageGrid& image, const Sinogram& v, const KernelOperators& ops) {
  if ((image.values.array() < 0).any() || (v.values.array() < 0).any())
    throw Error(ErrorKind::constraint, "forward_factorized requires c >= 0 and v >= 0");
  const Sinogram weighted = weighted_radon_apply(image, ops.geometry);
  SignalTrace out = k1_apply(v, ops);
  out.u += k2_apply(weighted, ops).u;
  out.u += k3_apply(v, ops).u;
  return out;
}

FactorizedTerms forward_terms(const ImageGrid& image, const KernelOperators& ops) {
  FactorizedTerms terms;
  terms.radon = radon_apply(image, ops.geometry);
  terms.weighted = weighted_radon_apply(image, ops.geometry);
  terms.k1 = k1_apply(terms.radon, ops);
  terms.k2 = k2_apply(terms.weighted, ops);
  terms.k3 = k3_apply(terms.radon, ops);
  return terms;
}

NormalizedSignal normalize(const SignalTrace& trace) {
  const double u_star = trace.u.size() ? trace.u.cwiseAbs().maxCoeff() : 0.0;
  if (!(u_star > 0)) throw Error(ErrorKind::degenerate_scale, "cannot normalize all-zero data");
  NormalizedSignal out;
  out.u_star = u_star;
  out.data.t = trace.t;
  out.data.u = trace.u / u_star;
  return out;
}

NormalizedTerms normalize_terms(const FactorizedTerms& terms) {
  NormalizedTerms out{terms.k1, terms.k2, terms.k3, Vector(terms.k1.n_coils())};
  for (Index l = 0; l < terms.k1.n_coils(); ++l) {
    const double peak = terms.k1.u.col(l).cwiseAbs().maxCoeff();
    if (!(peak > 0)) throw Error(ErrorKind::degenerate_scale, "K1 term vanishes for a coil");
    out.k1_peak[l] = peak;
    out.k1.u.col(l) /= peak;
    out.k2.u.col(l) /= peak;
    out.k3.u.col(l) /= peak;
  }
  return out;
}

SignalTrace add_noise(const SignalTrace& trace, double std_dev, std::uint64_t seed) {
  if (!(std_dev >= 0)) throw Error(ErrorKind::invalid_argument, "noise standard deviation must be nonnegative");
  SignalTrace out = trace;
  if (std_dev == 0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std_dev);
  for (Index l = 0; l < out.u.cols(); ++l)
    for (Index k = 0; k < out.u.rows(); ++k) out.u(k, l) += noise(rng);
  return out;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

bool BoundReport::k2_bound_holds() const {
  return std::all_of(coils.begin(), coils.end(), [](const CoilBounds& c) { return c.k2_bound_violations == 0; });
}

bool BoundReport::k3_bound_holds() const {
  return std::all_of(coils.begin(), coils.end(), [](const CoilBounds& c) { return c.max_k3 <= c.k3_bound; });
}

BoundReport bound_report(const ImageGrid& image, const ScanConfig& config, const TracerModel& tracer) {
  if (config.mode != RotationMode::simultaneous)
    throw Error(ErrorKind::mode, "rotation-induced terms vanish for sequential rotation; bounds are trivial");
  check_support(image);
  const KernelOperators ops = build_kernel_operators(config, tracer, per_sample_geometry(config));

  BoundReport report;
  report.terms = forward_terms(image, ops);
  report.speed_ratio_envelope = speed_ratio_envelope(config);
  const ParticleCount np = total_particles(image, tracer);
  report.particle_count = np.count;
  report.particle_bound = np.bound;
  report.phi_rate = 2.0 * std::numbers::pi * config.f_rot;
  report.samples_checked = ops.n_samples();

  // The bilinear footprint of a pixel inside B_R reaches |r| <= R + sqrt(2) h,
  // so |R~c| <= (R + sqrt(2) h) Rc holds exactly for the discrete transforms.
  const double slack = std::sqrt(2.0) * image.pixel_size() / config.fov_radius();
  const double m = tracer.particle_moment();
  for (Index l = 0; l < config.n_coils(); ++l) {
    CoilBounds cb;
    const auto k1 = report.terms.k1.u.col(l).cwiseAbs();
    const auto k2 = report.terms.k2.u.col(l).cwiseAbs();
    const auto k3 = report.terms.k3.u.col(l).cwiseAbs();
    cb.max_k1 = k1.maxCoeff();
    cb.max_k2 = k2.maxCoeff();
    cb.max_k3 = k3.maxCoeff(&cb.k3_argmax);
    const double pnorm = config.coils[static_cast<std::size_t>(l)].norm();
    cb.k3_bound = config.mu0 * report.phi_rate * pnorm * m * np.count;
    cb.k3_bound_cmax = config.mu0 * report.phi_rate * pnorm * m * np.bound;
    double min_margin = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < ops.n_samples(); ++k) {
      const double ratio = speed_ratio(ops.time[k], config);
      const double margin = k1[k] * (1.0 + slack) - ratio * k2[k];
      if (margin < 0) ++cb.k2_bound_violations;
      min_margin = std::min(min_margin, margin);
    }
    cb.k2_bound_min_margin = cb.max_k1 > 0 ? min_margin / cb.max_k1 : min_margin;
    report.coils.push_back(cb);
  }
  return report;
}

}  // namespace fflmpi
