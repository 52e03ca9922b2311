#include "fflmpi/solver.hpp"

#include "fflmpi/metrics.hpp"
#include "fflmpi/parallel.hpp"
#include "fflmpi/tv.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace fflmpi {

const char* to_string(Method method) noexcept {
  switch (method) {
    case Method::M1: return "M1";
    case Method::M2: return "M2";
    case Method::M3: return "M3";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "M1" || name == "m1") return Method::M1;
  if (name == "M2" || name == "m2") return Method::M2;
  if (name == "M3" || name == "m3") return Method::M3;
  throw Error(ErrorKind::config, "unknown method '" + name + "'");
}

ReconProblem make_problem(Method method, const ScanConfig& config, const TracerModel& tracer,
                          const NormalizedSignal& signal, int recon_n, double alpha1, double alpha2,
                          const SolverControls& controls) {
  if (!(alpha1 > 0) || !(alpha2 >= 0)) throw Error(ErrorKind::invalid_argument, "alpha1 must be positive, alpha2 nonnegative");
  if (!(signal.u_star > 0)) throw Error(ErrorKind::degenerate_scale, "normalization constant must be positive");
  ReconProblem p;
  p.method = method;
  p.grid = make_grid(recon_n, config);
  p.alpha1 = alpha1;
  p.alpha2 = alpha2;
  p.controls = controls;
  p.u_star = signal.u_star;
  p.data = signal.data.u;

  KernelOperators ops;
  if (method == Method::M1) {
    ScanConfig seq = config;
    seq.mode = RotationMode::sequential;
    seq.n_angles = config.n_sweeps();
    seq.total_time = config.measurement_time();
    p.geometry = sequential_geometry(seq);
    ops = build_kernel_operators(seq, tracer, p.geometry);
    p.data_operator = (1.0 / signal.u_star) * ops.k1();
  } else {
    p.geometry = dashed_geometry(config);
    ops = build_kernel_operators(config, tracer, p.geometry);
    p.data_operator = (1.0 / signal.u_star) * ops.k1();
    if (method == Method::M3) p.data_operator += (1.0 / signal.u_star) * ops.k3();
  }
  if (p.data.rows() != p.data_operator.n_samples() || p.data.cols() != p.data_operator.n_coils())
    throw Error(ErrorKind::geometry, "measured samples do not match the scan configuration");
  p.radon = radon_matrix(p.grid, p.geometry);
  return p;
}

namespace {

// Primal (c, v). G = i(c >= 0) + 1/2 |B v - u|^2 is handled by its proximal
// map, which is a block-diagonal solve since every sample reads one sinogram
// column. K (c, v) = (R c - v, grad c, v) carries the coupling term, TV and
// the nonnegativity of v.
struct DualVars {
  Vector coupling;            // n_angles * n_s
  GradientField<double> tv;   // n x n each
  RowMatrix positivity;       // n_angles x n_s
};

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Operator {
  const SparseRows& radon;
  Index n, n_angles, n_s;

  Operator(const ReconProblem& problem, const SparseRows& scaled_radon)
      : radon(scaled_radon), n(problem.grid.n), n_angles(problem.geometry.n_angles()), n_s(problem.geometry.n_s()) {}

  DualVars apply(const Matrix& c, const RowMatrix& v) const {
    DualVars z;
    z.coupling = radon * Eigen::Map<const Vector>(c.data(), c.size()) - Eigen::Map<const Vector>(v.data(), v.size());
    z.tv = grad_image(c);
    z.positivity = v;
    return z;
  }

  void adjoint(const DualVars& y, Matrix& gc, RowMatrix& gv) const {
    gc.resize(n, n);
    Eigen::Map<Vector>(gc.data(), gc.size()) = radon.transpose() * y.coupling;
    gc -= div_field(y.tv);
    gv = y.positivity - Eigen::Map<const RowMatrix>(y.coupling.data(), n_angles, n_s);
  }
};

double tv_norm(const GradientField<double>& g) {
  return (g.x.array().square() + g.y.array().square()).sqrt().sum();
}

ObjectiveParts evaluate(const ReconProblem& p, const Matrix& c, const RowMatrix& v, double alpha1, double alpha2) {
  ObjectiveParts o;
  o.data = 0.5 * (p.data_operator.apply(v) - p.data).squaredNorm();
  const Vector coupling =
      p.radon * Eigen::Map<const Vector>(c.data(), c.size()) - Eigen::Map<const Vector>(v.data(), v.size());
  o.coupling = 0.5 * alpha1 * coupling.squaredNorm();
  o.tv = alpha2 * tv_norm(grad_image(c));
  return o;
}

struct Steps {
  Matrix tau_c;
  double tau_v = 0.5;
  Vector sigma_coupling;
  double sigma_tv = 0.5;
  double sigma_positivity = 1.0;
};

double safe_inverse(double x) { return x > 0 ? 1.0 / x : 1.0; }

Steps diagonal_steps(const Operator& op) {
  const Index n = op.n;
  Steps s;
  Vector col_r = Vector::Zero(n * n);
  Vector row_r = Vector::Zero(op.radon.rows());
  for (Index r = 0; r < op.radon.outerSize(); ++r) {
    for (SparseRows::InnerIterator it(op.radon, r); it; ++it) {
      col_r[it.col()] += std::abs(it.value());
      row_r[r] += std::abs(it.value());
    }
  }
  s.tau_c.resize(n, n);
  for (Index ix = 0; ix < n; ++ix) {
    for (Index iy = 0; iy < n; ++iy) {
      const double grad_count = (ix > 0) + (ix + 1 < n) + (iy > 0) + (iy + 1 < n);
      s.tau_c(iy, ix) = safe_inverse(col_r[ix * n + iy] + grad_count);
    }
  }
  s.tau_v = 0.5;
  s.sigma_coupling = (row_r.array() + 1.0).inverse().matrix();
  s.sigma_tv = 0.5;
  s.sigma_positivity = 1.0;
  return s;
}

DualVars scaled(const DualVars& z, const Steps& s) {
  DualVars out;
  out.coupling = z.coupling.cwiseProduct(s.sigma_coupling);
  out.tv.x = s.sigma_tv * z.tv.x;
  out.tv.y = s.sigma_tv * z.tv.y;
  out.positivity = s.sigma_positivity * z.positivity;
  return out;
}

/// Largest singular value of Sigma^1/2 K T^1/2 by power iteration.
double preconditioned_norm(const Operator& op, const Steps& s, int iterations) {
  const Matrix sc = s.tau_c.cwiseSqrt();
  const double sv = std::sqrt(s.tau_v);
  Matrix xc = sc;
  RowMatrix xv = RowMatrix::Constant(op.n_angles, op.n_s, sv);
  double lambda = 0.0;
  Matrix gc;
  RowMatrix gv;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    const double norm = std::sqrt(xc.squaredNorm() + xv.squaredNorm());
    if (!(norm > 0)) return 0.0;
    xc /= norm;
    xv /= norm;
    const DualVars z = op.apply(xc.cwiseProduct(sc), sv * xv);
    op.adjoint(scaled(z, s), gc, gv);
    xc = gc.cwiseProduct(sc);
    xv = sv * gv;
    lambda = std::sqrt(xc.squaredNorm() + xv.squaredNorm());
  }
  return std::sqrt(lambda);
}

/// Spectral norm of R by power iteration.
double operator_norm(const SparseRows& m, int iterations) {
  Vector x = Vector::Ones(m.cols());
  double lambda = 0.0;
  for (int it = 0; it < std::max(1, iterations); ++it) {
    const double norm = x.norm();
    if (!(norm > 0)) return 0.0;
    x /= norm;
    x = m.transpose() * (m * x);
    lambda = x.norm();
  }
  return std::sqrt(lambda);
}

/// Proximal map of tau/2 |scale B w - u|^2, one Cholesky factor per sinogram column.
class DataProx {
 public:
  DataProx(const ReconProblem& p, double tau, double scale) {
    const SampledConvolution& B = p.data_operator;
    const Index na = p.geometry.n_angles(), ns = p.geometry.n_s();
    std::vector<Matrix> normal(static_cast<std::size_t>(na), Matrix::Zero(ns, ns));
    for (Index l = 0; l < B.n_coils(); ++l) {
      const RowMatrix& rows = B.rows(l);
      for (Index k = 0; k < B.n_samples(); ++k) {
        Matrix& h = normal[static_cast<std::size_t>(B.column()[k])];
        h.selfadjointView<Eigen::Lower>().rankUpdate(rows.row(k).transpose());
      }
    }
    factors_.reserve(normal.size());
    for (Matrix& h : normal) {
      h = h.selfadjointView<Eigen::Lower>();
      h *= tau * scale * scale;
      h.diagonal().array() += 1.0;
      factors_.emplace_back(h);
    }
    rhs_ = tau * scale * B.adjoint(p.data);
  }

  void apply(RowMatrix& v) const {
    v += rhs_;
    for (std::size_t a = 0; a < factors_.size(); ++a) {
      const Index row = static_cast<Index>(a);
      v.row(row) = factors_[a].solve(v.row(row).transpose()).transpose();
    }
  }

 private:
  std::vector<Eigen::LLT<Matrix>> factors_;
  RowMatrix rhs_;
};

ReconResult solve_impl(const ReconProblem& p, double alpha1, double alpha2, const std::optional<ReconStart>& start) {
  if (!(alpha1 > 0) || !(alpha2 >= 0)) throw Error(ErrorKind::invalid_argument, "alpha1 must be positive, alpha2 nonnegative");
  const SolverControls& ctl = p.controls;
  if (ctl.max_iterations < 1 || ctl.window < 1 || !(ctl.tolerance >= 0))
    throw Error(ErrorKind::invalid_argument, "invalid solver controls");
  // solve in w = v / scale so that R / scale and the identity have comparable norms
  const double radon_norm = operator_norm(p.radon, ctl.power_iterations);
  const double scale = radon_norm > 0 ? radon_norm : 1.0;
  const SparseRows scaled_radon = p.radon / scale;
  const double coupling_weight = alpha1 * scale * scale;
  const Operator op(p, scaled_radon);
  const Index n = op.n;

  Matrix c = Matrix::Zero(n, n);
  RowMatrix v = RowMatrix::Zero(op.n_angles, op.n_s);
  if (start) {
    if (start->c.rows() != n || start->c.cols() != n || start->v.rows() != op.n_angles || start->v.cols() != op.n_s)
      throw Error(ErrorKind::invalid_argument, "initial guess does not match the problem");
    c = start->c.cwiseMax(0.0);
    v = start->v.cwiseMax(0.0) / scale;
  }

  Steps steps = diagonal_steps(op);
  const double norm = preconditioned_norm(op, steps, ctl.power_iterations);
  const double step = norm > 0 ? ctl.step_safety / norm : 1.0;
  steps.tau_c *= step * ctl.primal_weight;
  steps.tau_v *= step * ctl.primal_weight;
  steps.sigma_coupling *= step / ctl.primal_weight;
  steps.sigma_tv *= step / ctl.primal_weight;
  steps.sigma_positivity *= step / ctl.primal_weight;
  const DataProx prox(p, steps.tau_v, scale);

  DualVars y;
  y.coupling = Vector::Zero(op.n_angles * op.n_s);
  y.tv.x = Matrix::Zero(n, n);
  y.tv.y = Matrix::Zero(n, n);
  y.positivity = RowMatrix::Zero(op.n_angles, op.n_s);

  DualVars z = op.apply(c, v);
  const double j0 = evaluate(p, c, scale * v, alpha1, alpha2).total();
  double envelope = j0;

  ReconResult result;
  result.history.reserve(static_cast<std::size_t>(ctl.max_iterations));
  Matrix gc;
  RowMatrix gv;
  RowMatrix feasible_v = v;
  for (int it = 0; it < ctl.max_iterations; ++it) {
    op.adjoint(y, gc, gv);
    c = (c - steps.tau_c.cwiseProduct(gc)).cwiseMax(0.0);
    v -= steps.tau_v * gv;
    prox.apply(v);

    DualVars zn = op.apply(c, v);
    // dual step on K (2 x_new - x_old) = 2 K x_new - K x_old
    const Vector bar_coupling = 2.0 * zn.coupling - z.coupling;
    y.coupling = (y.coupling + steps.sigma_coupling.cwiseProduct(bar_coupling))
                     .cwiseQuotient((steps.sigma_coupling.array() / coupling_weight + 1.0).matrix());
    y.tv.x += steps.sigma_tv * (2.0 * zn.tv.x - z.tv.x);
    y.tv.y += steps.sigma_tv * (2.0 * zn.tv.y - z.tv.y);
    if (alpha2 > 0) {
      const Eigen::ArrayXXd mag = (y.tv.x.array().square() + y.tv.y.array().square()).sqrt();
      const Eigen::ArrayXXd shrink = (mag / alpha2).max(1.0);
      y.tv.x.array() /= shrink;
      y.tv.y.array() /= shrink;
    } else {
      y.tv.x.setZero();
      y.tv.y.setZero();
    }
    y.positivity = (y.positivity + steps.sigma_positivity * (2.0 * zn.positivity - z.positivity)).cwiseMin(0.0);
    z = std::move(zn);

    feasible_v = scale * v.cwiseMax(0.0);
    const double j = evaluate(p, c, feasible_v, alpha1, alpha2).total();
    // growth is measured against the start and the first window of iterates
    if (it < ctl.window) envelope = std::max(envelope, j);
    if (!std::isfinite(j) || (it >= ctl.window && envelope > 0 && j > ctl.divergence_factor * envelope))
      throw Error(ErrorKind::solver, "primal-dual iteration diverged; reduce the step sizes");
    result.history.push_back(j);
    result.iterations = it + 1;
    if (it >= ctl.window) {
      const double prev = result.history[static_cast<std::size_t>(it - ctl.window)];
      if (std::abs(j - prev) <= ctl.tolerance * std::abs(j)) {
        result.converged = true;
        break;
      }
    }
  }

  result.c = make_grid(static_cast<int>(n), p.grid.fov_half);
  result.c.values = c;
  result.v.angles = p.geometry.angles;
  result.v.s_grid = p.geometry.s_grid;
  result.v.values = feasible_v;
  result.final_objective = evaluate(p, c, feasible_v, alpha1, alpha2);
  return result;
}

}  // namespace

ObjectiveParts objective(const ReconProblem& problem, const Matrix& c, const RowMatrix& v) {
  const Index n = problem.grid.n, n_angles = problem.geometry.n_angles(), n_s = problem.geometry.n_s();
  if (c.rows() != n || c.cols() != n || v.rows() != n_angles || v.cols() != n_s)
    throw Error(ErrorKind::invalid_argument, "objective arguments do not match the problem");
  return evaluate(problem, c, v, problem.alpha1, problem.alpha2);
}

ReconResult solve_joint(const ReconProblem& problem, const std::optional<ReconStart>& start) {
  return solve_impl(problem, problem.alpha1, problem.alpha2, start);
}

SweepResult parameter_sweep(const ReconProblem& problem, std::span<const double> alpha1,
                            std::span<const double> alpha2, const ImageGrid& groundtruth, int jobs) {
  if (alpha1.empty() || alpha2.empty()) throw Error(ErrorKind::invalid_argument, "empty parameter grid");
  if (groundtruth.n != problem.grid.n) throw Error(ErrorKind::invalid_argument, "groundtruth grid does not match");
  SweepResult out;
  for (double a1 : alpha1)
    for (double a2 : alpha2) out.entries.push_back({a1, a2});
  std::vector<ReconResult> results(out.entries.size());
  parallel_for(
      static_cast<std::ptrdiff_t>(out.entries.size()),
      [&](std::ptrdiff_t i) {
        SweepEntry& e = out.entries[static_cast<std::size_t>(i)];
        ReconResult r = solve_impl(problem, e.alpha1, e.alpha2, std::nullopt);
        e.ssim = ssim(groundtruth, r.c);
        e.rel_l2 = rel_l2(r.c, groundtruth);
        e.iterations = r.iterations;
        e.converged = r.converged;
        results[static_cast<std::size_t>(i)] = std::move(r);
      },
      jobs);
  for (std::size_t i = 1; i < out.entries.size(); ++i) {
    const SweepEntry& a = out.entries[i];
    const SweepEntry& b = out.entries[out.best];
    const bool better = a.ssim > b.ssim ||
                        (a.ssim == b.ssim && (a.alpha2 < b.alpha2 || (a.alpha2 == b.alpha2 && a.alpha1 < b.alpha1)));
    if (better) out.best = i;
  }
  out.best_result = std::move(results[out.best]);
  return out;
}

std::vector<double> default_alpha1_grid() { return {1e4, 2e4, 4e4}; }

std::vector<double> default_alpha2_grid() {
  std::vector<double> out;
  for (int i = 0; i < 50; ++i) out.push_back(std::pow(0.1, 5.5 - 0.05 * i));
  return out;
}

}  // namespace fflmpi
