#pragma once

#include "fflmpi/core.hpp"
#include "fflmpi/forward.hpp"
#include "fflmpi/projection.hpp"

#include <Eigen/SparseCore>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fflmpi {

/// M1: K1 with the sequential Radon geometry. M2: K1 with the dashed
/// simultaneous geometry. M3: K1 + K3 with the dashed geometry.
enum class Method { M1, M2, M3 };

const char* to_string(Method method) noexcept;
Method parse_method(const std::string& name);

struct SolverControls {
  int max_iterations = 2000;
  double tolerance = 1e-6;
  /// Iterations between the objective values compared by the stopping test.
  int window = 20;
  int power_iterations = 50;
  /// Safety factor applied to the estimated operator norm.
  double step_safety = 0.95;
  /// Multiplies the primal steps and divides the dual steps.
  double primal_weight = 30.0;
  /// Objective growth that counts as divergence, relative to the largest
  /// value over the start and the first window of iterations.
  double divergence_factor = 10.0;
};

/// J(c, v) = 1/2 |B v - u|^2 + alpha1/2 |R c - v|^2 + alpha2 TV(c), minimized
/// over c >= 0, v >= 0, where B is the normalized data operator of the method.
struct ReconProblem {
  Method method = Method::M1;
  ImageGrid grid;  // shape of c; values unused
  ProjectionGeometry geometry;
  SampledConvolution data_operator;
  Eigen::SparseMatrix<double, Eigen::RowMajor> radon;
  Matrix data;  // normalized samples, n_samples x n_coils
  double u_star = 1.0;
  double alpha1 = 1e4;
  double alpha2 = 1e-4;
  SolverControls controls;
};

ReconProblem make_problem(Method method, const ScanConfig& config, const TracerModel& tracer,
                          const NormalizedSignal& signal, int recon_n, double alpha1, double alpha2,
                          const SolverControls& controls = {});

struct ReconStart {
  Matrix c;
  RowMatrix v;
};

struct ObjectiveParts {
  double data = 0.0;
  double coupling = 0.0;
  double tv = 0.0;
  double total() const { return data + coupling + tv; }
};

ObjectiveParts objective(const ReconProblem& problem, const Matrix& c, const RowMatrix& v);

struct ReconResult {
  ImageGrid c;
  Sinogram v;
  std::vector<double> history;  // objective after every iteration
  ObjectiveParts final_objective;
  int iterations = 0;
  bool converged = false;
};

/// Primal-dual hybrid gradient with diagonal preconditioning, starting from
/// zero unless a start is given.
ReconResult solve_joint(const ReconProblem& problem, const std::optional<ReconStart>& start = std::nullopt);

struct SweepEntry {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double ssim = 0.0;
  double rel_l2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::size_t best = 0;
  ReconResult best_result;

  const SweepEntry& best_entry() const { return entries.at(best); }
};

/// Solves on every (alpha1, alpha2) pair and keeps the SSIM maximizer; ties
/// go to the smaller alpha2, then the smaller alpha1.
SweepResult parameter_sweep(const ReconProblem& problem, std::span<const double> alpha1,
                            std::span<const double> alpha2, const ImageGrid& groundtruth, int jobs = 0);

/// {1, 2, 4} x 1e4.
std::vector<double> default_alpha1_grid();
/// 0.1^(5.5 - 0.05 i), i = 0..49.
std::vector<double> default_alpha2_grid();

}  // namespace fflmpi
