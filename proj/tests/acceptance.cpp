// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include "fflmpi/app.hpp"
#include "fflmpi/metrics.hpp"
#include "fflmpi/physics.hpp"
#include "fflmpi/tv.hpp"

#include "reference_solver.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace fflmpi;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ScanConfig sequential() { return ScanConfig::reference_scanner(RotationMode::sequential); }
ScanConfig simultaneous() { return ScanConfig::reference_scanner(RotationMode::simultaneous); }

ImageGrid default_phantom(int n, const ScanConfig& cfg) {
  const ImageGrid g = make_grid(n, cfg);
  return make_phantom(g, default_phantom_shapes(g.fov_half), {4, false});
}

double column_rel_error(const Matrix& a, const Matrix& ref, Index l) {
  return (a.col(l) - ref.col(l)).norm() / ref.col(l).norm();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------

Outcome factorization_equivalence() {
  const auto t0 = Clock::now();
  const ScanConfig cfg = simultaneous();
  const TracerModel tracer;
  const KernelOperators ops = build_kernel_operators(cfg, tracer, per_sample_geometry(cfg));
  std::vector<double> worst;
  std::string detail;
  for (int n : {33, 65, 129}) {
    const ImageGrid c = default_phantom(n, cfg);
    const SignalTrace fact = forward_factorized(c, radon_apply(c, ops.geometry), ops);
    const SignalTrace direct = forward_direct(c, cfg, tracer);
    double e = 0;
    for (Index l = 0; l < cfg.n_coils(); ++l) e = std::max(e, column_rel_error(fact.u, direct.u, l));
    worst.push_back(e);
    detail += fmt("n=%d %.3e; ", n, e);
  }
  const double t = seconds_since(t0);
  const bool monotone = worst[0] > worst[1] && worst[1] > worst[2];
  return {worst[1] <= 1e-2 && monotone && t <= 120.0,
          detail + fmt("monotone %s, %.1f s", monotone ? "yes" : "no", t)};
}

Outcome sequential_reduction() {
  const ScanConfig cfg = sequential();
  const TracerModel tracer;
  const ImageGrid c = default_phantom(65, cfg);
  const KernelOperators ops = build_kernel_operators(cfg, tracer, scan_geometry(cfg));
  const FactorizedTerms terms = forward_terms(c, ops);
  const double k2 = terms.k2.u.cwiseAbs().maxCoeff(), k3 = terms.k3.u.cwiseAbs().maxCoeff();
  const SignalTrace direct = forward_direct(c, cfg, tracer);
  double e = 0;
  for (Index l = 0; l < cfg.n_coils(); ++l) e = std::max(e, column_rel_error(terms.k1.u, direct.u, l));
  return {k2 == 0.0 && k3 == 0.0 && e <= 1e-2, fmt("max|K2| %g, max|K3| %g, K1 R vs direct %.3e", k2, k3, e)};
}

Outcome k2_inequality() {
  const ScanConfig cfg = simultaneous();
  const ImageGrid c = default_phantom(129, cfg);
  const BoundReport r = bound_report(c, cfg, TracerModel{});
  Index violations = 0;
  std::string detail = fmt("%lld samples; ", static_cast<long long>(r.samples_checked));
  for (std::size_t l = 0; l < r.coils.size(); ++l) {
    violations += r.coils[l].k2_bound_violations;
    detail += fmt("coil %zu violations %lld min margin %.3e; ", l + 1,
                  static_cast<long long>(r.coils[l].k2_bound_violations), r.coils[l].k2_bound_min_margin);
  }
  return {violations == 0 && r.samples_checked == 4000, detail};
}

Outcome k3_bound() {
  const ScanConfig cfg = simultaneous();
  const TracerModel tracer;
  const ImageGrid g = make_grid(65, cfg);
  const double R = g.fov_half;
  const std::vector<std::pair<std::string, std::vector<Shape>>> phantoms = {
      {"default", default_phantom_shapes(R)},
      {"centered disk", {Disk{Vec2::Zero(), 0.5 * R, 1.0}}},
      {"square", {Square{Vec2(-0.2 * R, 0.1 * R), 0.6 * R, 0.8}}},
      {"two disks", {Disk{Vec2(0.4 * R, 0.3 * R), 0.2 * R, 1.0}, Disk{Vec2(-0.5 * R, -0.1 * R), 0.3 * R, 0.4}}},
  };
  bool ok = true;
  std::string detail;
  for (const auto& [name, shapes] : phantoms) {
    const BoundReport r = bound_report(make_phantom(g, shapes, {4, false}), cfg, tracer);
    double ratio = 0;
    for (const CoilBounds& cb : r.coils) ratio = std::max(ratio, cb.max_k3 / cb.k3_bound);
    ok = ok && r.k3_bound_holds();
    detail += fmt("%s %.3f; ", name.c_str(), ratio);
  }
  const BoundReport sat =
      bound_report(make_phantom(g, Disk{Vec2(0.7 * R, 0.0), 0.1 * R, 1.0}, {4, false}), cfg, tracer);
  ok = ok && sat.k3_bound_holds();
  for (std::size_t l = 0; l < sat.coils.size(); ++l) {
    const double ratio = sat.coils[l].max_k3 / sat.coils[l].k3_bound;
    ok = ok && ratio >= 0.9;
    detail += fmt("saturated disk coil %zu %.3f; ", l + 1, ratio);
  }
  return {ok, detail + "(max|K3| / bound)"};
}

Outcome radial_symmetry() {
  const ScanConfig cfg = simultaneous();
  const ImageGrid g = make_grid(129, cfg);
  const ImageGrid c = make_phantom(g, Disk{Vec2::Zero(), 0.5 * g.fov_half, 1.0}, {4, false});
  bool ok = true;
  std::string detail;
  for (const auto& [name, geom] : {std::pair{"sequential", sequential_geometry(sequential())},
                                  std::pair{"per-sample", per_sample_geometry(cfg)}}) {
    const double w = weighted_radon_apply(c, geom).values.cwiseAbs().maxCoeff();
    const double r = radon_apply(c, geom).values.cwiseAbs().maxCoeff();
    ok = ok && w <= 1e-3 * r;
    detail += fmt("%s max|R~c| %.3e, 1e-3 max|Rc| %.3e; ", name, w, 1e-3 * r);
  }
  return {ok, detail};
}

Outcome speed_ratio_envelope_check() {
  const double e = speed_ratio_envelope(simultaneous());
  return {e == 25.0, fmt("envelope %.17g", e)};
}

// ---------------------------------------------------------------------------

struct SweepOutcome {
  double ssim = 0;
  double alpha1 = 0, alpha2 = 0;
  double max_solve_seconds = 0;
};

SweepOutcome reduced_sweep(Method method, const ScanConfig& scan, double noise_percent) {
  RunConfig config;
  config.scanner = scan;
  config.simulation.grid = 129;
  config.simulation.noise_percent = noise_percent;
  config.simulation.seed = 2024;
  const SimulationRun run = simulate(config);
  NormalizedSignal signal;
  signal.u_star = run.u_star;
  signal.data = run.measured;
  signal.data.u /= run.u_star;
  const ImageGrid truth = phantom_image(config, 65);
  const ReconProblem problem = make_problem(method, scan, config.tracer, signal, 65, 1e4, 1e-4);

  const std::vector<double> a1 = default_alpha1_grid();
  const std::vector<double> all = default_alpha2_grid();
  const std::vector<double> a2{all[10], all[20], all[30], all[40]};
  SweepOutcome out;
  double best = -2;
  for (double x : a1)
    for (double y : a2) {
      ReconProblem p = problem;
      p.alpha1 = x;
      p.alpha2 = y;
      const auto t0 = Clock::now();
      const ReconResult r = solve_joint(p);
      out.max_solve_seconds = std::max(out.max_solve_seconds, seconds_since(t0));
      const double s = ssim(truth, r.c);
      if (s > best || (s == best && y < out.alpha2)) {
        best = s;
        out.alpha1 = x;
        out.alpha2 = y;
      }
    }
  out.ssim = best;
  return out;
}

Outcome reconstruction_quality() {
  const SweepOutcome m1 = reduced_sweep(Method::M1, sequential(), 0.0);
  const SweepOutcome m2 = reduced_sweep(Method::M2, simultaneous(), 0.0);
  const SweepOutcome m3 = reduced_sweep(Method::M3, simultaneous(), 0.0);
  const SweepOutcome m2n = reduced_sweep(Method::M2, simultaneous(), 0.79);
  const SweepOutcome m3n = reduced_sweep(Method::M3, simultaneous(), 0.79);
  const double slowest = std::max({m1.max_solve_seconds, m2.max_solve_seconds, m3.max_solve_seconds,
                                   m2n.max_solve_seconds, m3n.max_solve_seconds});
  const bool a = m1.ssim >= 0.85;
  const bool b = m3.ssim >= m2.ssim - 0.01;
  const bool c = m2.ssim - m2n.ssim <= 0.15 && m3.ssim - m3n.ssim <= 0.15 && m3n.ssim >= m2n.ssim - 0.02;
  return {a && b && c && slowest <= 300.0,
          fmt("(a) M1 sequential %.4f; (b) M2 %.4f, M3 %.4f; (c) noisy M2 %.4f, M3 %.4f; slowest solve %.1f s", m1.ssim,
              m2.ssim, m3.ssim, m2n.ssim, m3n.ssim, slowest)};
}

Outcome solver_correctness() {
  const ReconProblem p = reference::small_problem(8, 4, 9, 10.0, 1e-3);
  const reference::Solution ref = reference::fista(p, 20000, 100);
  const ReconResult r = solve_joint(p);
  const double j = reference::joint_objective(p, r.c.values, r.v.values);
  const double gap = std::abs(j - ref.objective) / ref.objective;
  const bool feasible = r.c.values.minCoeff() >= 0.0 && r.v.values.minCoeff() >= 0.0;
  ReconStart start{Matrix::Constant(8, 8, 2.0), RowMatrix::Constant(4, 9, 1.0)};
  const ReconResult s = solve_joint(p, start);
  const double starts = std::abs(s.final_objective.total() - r.final_objective.total()) / r.final_objective.total();
  return {gap <= 1e-3 && feasible && starts <= 5e-3,
          fmt("objective %.8g vs reference %.8g (gap %.2e), feasible %s, two starts differ by %.2e", j, ref.objective,
              gap, feasible ? "yes" : "no", starts)};
}

Outcome operator_suite() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> U(-1, 1);
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(33, cfg);
  const ProjectionGeometry geom = sequential_geometry(cfg);
  double radon_err = 0, grad_err = 0;
  for (int trial = 0; trial < 50; ++trial) {
    ImageGrid c = g;
    c.values = Matrix::NullaryExpr(g.n, g.n, [&] { return U(rng); });
    Sinogram v = geom.empty_sinogram();
    v.values = RowMatrix::NullaryExpr(geom.n_angles(), geom.n_s(), [&] { return U(rng); });
    const double lhs = (radon_apply(c, geom).values.array() * v.values.array()).sum();
    const double rhs = (c.values.array() * radon_adjoint(v, geom, g).values.array()).sum();
    radon_err = std::max(radon_err, std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));

    GradientField<double> f{Matrix::NullaryExpr(g.n, g.n, [&] { return U(rng); }),
                            Matrix::NullaryExpr(g.n, g.n, [&] { return U(rng); })};
    const auto gc = grad_image(c.values);
    const double gl = (gc.x.array() * f.x.array()).sum() + (gc.y.array() * f.y.array()).sum();
    const double gr = -(c.values.array() * div_field(f).array()).sum();
    grad_err = std::max(grad_err, std::abs(gl - gr) / std::max(std::abs(gl), std::abs(gr)));
  }

  const ImageGrid big = make_grid(129, cfg);
  const double r0 = 0.6 * big.fov_half, h = big.pixel_size();
  const ImageGrid disk = make_phantom(big, Disk{Vec2::Zero(), r0, 1.0}, {4, false});
  const Sinogram rc = radon_apply(disk, geom);
  double chord_err = 0;
  for (Index a = 0; a < rc.n_angles(); ++a)
    for (Index j = 0; j < rc.n_s(); ++j) {
      const double s = rc.s_grid[j];
      if (std::abs(s) > r0 - 2 * h) continue;
      const double chord = 2 * std::sqrt(r0 * r0 - s * s);
      chord_err = std::max(chord_err, std::abs(rc.values(a, j) - chord) / chord);
    }

  double fd_err = 0;
  for (double x : {0.03, 0.2, 0.9, 1.7, 3.0, 7.5, 20.0}) {
    const double step = 1e-5 * std::max(1.0, x);
    const double fd = (langevin(x + step) - langevin(x - step)) / (2 * step);
    fd_err = std::max(fd_err, std::abs(fd - langevin_derivative(x)) / langevin_derivative(x));
  }
  const bool ok = radon_err <= 1e-12 && grad_err <= 1e-12 && chord_err <= 2 * h / r0 && fd_err <= 1e-6;
  return {ok, fmt("Radon adjoint %.1e, gradient adjoint %.1e, chord %.2e (limit %.2e), Langevin FD %.1e", radon_err,
                  grad_err, chord_err, 2 * h / r0, fd_err)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "fflmpi_acceptance_determinism";
  fs::remove_all(root);
  RunConfig config = parse_run_config(
      "simulation.grid = 65\nsimulation.noise_percent = 0.79\nsimulation.seed = 77\nreconstruction.grid = 33\n"
      "reconstruction.method = M3\n");
  std::vector<std::string> signal, recon_c, recon_v;
  for (const char* run : {"a", "b"}) {
    config.output_dir = (root / run).string();
    cmd_simulate(config);
    cmd_reconstruct(config);
    signal.push_back(slurp(root / run / "signal.csv"));
    recon_c.push_back(slurp(root / run / "reconstruction_c.csv"));
    recon_v.push_back(slurp(root / run / "reconstruction_v.csv"));
  }
  const bool ok = !signal[0].empty() && !recon_c[0].empty() && signal[0] == signal[1] && recon_c[0] == recon_c[1] &&
                  recon_v[0] == recon_v[1];
  return {ok, fmt("signal %s, reconstruction c %s, v %s", signal[0] == signal[1] ? "identical" : "differ",
                  recon_c[0] == recon_c[1] ? "identical" : "differ", recon_v[0] == recon_v[1] ? "identical" : "differ")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"factorized vs direct forward model", factorization_equivalence},
      {"sequential rotation reduces to K1", sequential_reduction},
      {"pointwise K2 inequality", k2_inequality},
      {"K3 magnitude bound", k3_bound},
      {"radial symmetry of the weighted transform", radial_symmetry},
      {"speed ratio envelope", speed_ratio_envelope_check},
      {"reconstruction quality", reconstruction_quality},
      {"solver correctness", solver_correctness},
      {"operator unit suite", operator_suite},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
