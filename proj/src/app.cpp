#include "fflmpi/app.hpp"

#include "fflmpi/metrics.hpp"

#include <cmath>
#include <sstream>

namespace fflmpi {

RunConfig apply_options(RunConfig config, const CommandOptions& options) {
  if (options.seed) config.simulation.seed = *options.seed;
  if (options.paper_scale) {
    config.simulation.grid = 501;
    config.reconstruction.grid = 201;
  }
  if (options.jobs) config.jobs = *options.jobs;
  if (options.out) config.output_dir = *options.out;
  config.validate();
  return config;
}

std::vector<Shape> phantom_shapes(const RunConfig& config) {
  const double R = config.scanner.fov_radius();
  if (config.phantom.shapes.empty()) return default_phantom_shapes(R);
  std::vector<Shape> out;
  for (const Shape& s : config.phantom.shapes) {
    if (const auto* d = std::get_if<Disk>(&s)) out.push_back(Disk{d->center * R, d->radius * R, d->value});
    else {
      const auto& q = std::get<Square>(s);
      out.push_back(Square{q.center * R, q.side * R, q.value});
    }
  }
  return out;
}

ImageGrid phantom_image(const RunConfig& config, int n) {
  const auto shapes = phantom_shapes(config);
  PhantomOptions opt;
  opt.supersample = config.phantom.supersample;
  return make_phantom(make_grid(n, config.scanner), shapes, opt);
}

SimulationRun simulate(const RunConfig& config) {
  SimulationRun run;
  run.phantom = phantom_image(config, config.simulation.grid);
  if (config.simulation.factorized) {
    const KernelOperators ops = build_kernel_operators(config.scanner, config.tracer, per_sample_geometry(config.scanner));
    run.clean = forward_factorized(run.phantom, radon_apply(run.phantom, ops.geometry), ops);
  } else {
    DirectOptions opt;
    opt.subsamples = config.simulation.subsamples;
    opt.jobs = config.jobs;
    run.clean = forward_direct(run.phantom, config.scanner, config.tracer, opt);
  }
  run.u_star = normalize(run.clean).u_star;
  run.noise_std = config.simulation.noise_percent / 100.0 * run.u_star;
  run.measured = run.noise_std > 0 ? add_noise(run.clean, run.noise_std, config.simulation.seed) : run.clean;
  return run;
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
      return 2;
    case ErrorKind::geometry:
    case ErrorKind::mode:
    case ErrorKind::out_of_support:
      return 3;
    case ErrorKind::solver:
    case ErrorKind::constraint:
    case ErrorKind::degenerate_scale:
      return 4;
    case ErrorKind::io:
      return 5;
  }
  return 1;
}

namespace {

Metadata base_meta(const RunConfig& config) {
  return {{"config_hash", config.hash()}, {"seed", std::to_string(config.simulation.seed)}};
}

void write_terms_csv(const std::filesystem::path& path, const NormalizedTerms& terms, const ScanConfig& scan,
                     const Metadata& meta) {
  std::ostringstream o;
  for (const auto& [k, v] : meta) o << "# " << k << ": " << v << '\n';
  o << "# columns: t,drive_period,half_sweep";
  for (Index l = 0; l < terms.k1.n_coils(); ++l) o << ",k1_" << l + 1 << ",k2_" << l + 1 << ",k3_" << l + 1;
  o << '\n';
  for (Index k = 0; k < terms.k1.n_samples(); ++k) {
    const double t = terms.k1.t[k];
    o << format_double(t) << ',' << static_cast<long>(std::floor(t * scan.f_drive + 1e-9)) << ','
      << std::min<long>(static_cast<long>(std::floor(t / scan.half_period() + 1e-9)), scan.n_sweeps() - 1);
    for (Index l = 0; l < terms.k1.n_coils(); ++l)
      o << ',' << format_double(terms.k1.u(k, l)) << ',' << format_double(terms.k2.u(k, l)) << ','
        << format_double(terms.k3.u(k, l));
    o << '\n';
  }
  write_text(path, o.str());
}

}  // namespace

std::string cmd_simulate(const RunConfig& config) {
  const std::filesystem::path out(config.output_dir);
  const SimulationRun run = simulate(config);
  Metadata meta = base_meta(config);
  meta.emplace_back("u_star", format_double(run.u_star));
  meta.emplace_back("noise_std", format_double(run.noise_std));

  write_image_csv(out / "phantom.csv", run.phantom, meta);
  write_pgm(out / "phantom.pgm", run.phantom, meta);
  const ScanConfig& scan = config.scanner;
  std::string sino_name;
  if (scan.mode == RotationMode::sequential) {
    sino_name = "sinogram_sequential.csv";
    write_sinogram_csv(out / sino_name, build_sequential_sinogram(run.phantom, scan, scan.n_angles), meta);
  } else {
    sino_name = "sinogram_simultaneous.csv";
    write_sinogram_csv(out / sino_name, build_simultaneous_sinogram(run.phantom, scan), meta);
  }
  write_signal_csv(out / "signal.csv", run.measured, meta);

  const KernelOperators ops = build_kernel_operators(scan, config.tracer, per_sample_geometry(scan));
  const NormalizedTerms terms = normalize_terms(forward_terms(run.phantom, ops));
  write_terms_csv(out / "terms.csv", terms, scan, meta);

  std::ostringstream s;
  s << "mode = " << to_string(scan.mode) << "\nsamples = " << run.measured.n_samples()
    << "\ncoils = " << run.measured.n_coils() << "\nsimulation_grid = " << config.simulation.grid
    << "\nu_star = " << format_double(run.u_star) << "\nnoise_std = " << format_double(run.noise_std)
    << "\nsinogram = " << sino_name << "\nconfig_hash = " << config.hash()
    << "\nseed = " << config.simulation.seed << '\n';
  write_text(out / "simulate_report.txt", s.str());
  return s.str();
}

std::string cmd_bounds(const RunConfig& config) {
  if (config.scanner.mode != RotationMode::simultaneous)
    throw Error(ErrorKind::mode, "bounds are trivial for sequential rotation: the K2 and K3 terms vanish identically");
  const std::filesystem::path out(config.output_dir);
  const ImageGrid c = phantom_image(config, config.simulation.grid);
  const BoundReport rep = bound_report(c, config.scanner, config.tracer);
  const double max_r = rep.terms.radon.values.cwiseAbs().maxCoeff();
  const double max_w = rep.terms.weighted.values.cwiseAbs().maxCoeff();

  std::ostringstream s;
  s << "# config_hash: " << config.hash() << '\n';
  s << "speed_ratio_envelope = " << format_double(rep.speed_ratio_envelope) << '\n';
  s << "phi_rate = " << format_double(rep.phi_rate) << '\n';
  s << "particle_count = " << format_double(rep.particle_count) << '\n';
  s << "particle_bound = " << format_double(rep.particle_bound) << '\n';
  s << "samples_checked = " << rep.samples_checked << '\n';
  s << "max_radon = " << format_double(max_r) << '\n';
  s << "max_weighted_radon = " << format_double(max_w) << '\n';
  s << "weighted_over_radius_radon = " << format_double(max_r > 0 ? max_w / (config.scanner.fov_radius() * max_r) : 0.0)
    << '\n';
  s << "k2_bound_holds = " << (rep.k2_bound_holds() ? "true" : "false") << '\n';
  s << "k3_bound_holds = " << (rep.k3_bound_holds() ? "true" : "false") << '\n';
  s << "coil,max_k1,max_k2,max_k3,k2_over_k1,k3_bound,k3_bound_cmax,k3_over_bound,k2_bound_violations,k2_bound_min_margin\n";
  for (std::size_t l = 0; l < rep.coils.size(); ++l) {
    const CoilBounds& b = rep.coils[l];
    s << l + 1 << ',' << format_double(b.max_k1) << ',' << format_double(b.max_k2) << ',' << format_double(b.max_k3)
      << ',' << format_double(b.max_k1 > 0 ? b.max_k2 / b.max_k1 : 0.0) << ',' << format_double(b.k3_bound) << ','
      << format_double(b.k3_bound_cmax) << ',' << format_double(b.k3_bound > 0 ? b.max_k3 / b.k3_bound : 0.0) << ','
      << b.k2_bound_violations << ',' << format_double(b.k2_bound_min_margin) << '\n';
  }
  write_text(out / "bounds.txt", s.str());
  return s.str();
}

Matrix contour_overlay(const ImageGrid& reconstruction, const ImageGrid& groundtruth) {
  if (!reconstruction.same_shape(groundtruth)) throw Error(ErrorKind::invalid_argument, "overlay grids differ");
  const Matrix& g = groundtruth.values;
  const double range = g.maxCoeff() - g.minCoeff();
  Matrix out = reconstruction.values;
  const double white = std::max(out.maxCoeff(), g.maxCoeff());
  if (!(range > 0)) return out;
  const Index n = g.rows();
  for (Index ix = 0; ix < n; ++ix) {
    for (Index iy = 0; iy < n; ++iy) {
      bool edge = false;
      const Index nb[4][2] = {{iy - 1, ix}, {iy + 1, ix}, {iy, ix - 1}, {iy, ix + 1}};
      for (const auto& q : nb) {
        if (q[0] < 0 || q[0] >= n || q[1] < 0 || q[1] >= n) continue;
        if (g(iy, ix) - g(q[0], q[1]) > 0.25 * range) edge = true;
      }
      if (edge) out(iy, ix) = white;
    }
  }
  return out;
}

std::string cmd_reconstruct(const RunConfig& config) {
  const std::filesystem::path out(config.output_dir);
  const ReconstructionSpec& spec = config.reconstruction;
  Metadata meta = base_meta(config);

  NormalizedSignal signal;
  if (spec.signal.empty()) {
    const SimulationRun run = simulate(config);
    signal.u_star = run.u_star;
    signal.data = run.measured;
    signal.data.u /= run.u_star;
  } else {
    Metadata file_meta;
    const SignalTrace tr = read_signal_csv(spec.signal, &file_meta);
    double u_star = 0.0;
    for (const auto& [k, v] : file_meta)
      if (k == "u_star") u_star = std::strtod(v.c_str(), nullptr);
    if (!(u_star > 0)) u_star = normalize(tr).u_star;
    signal.u_star = u_star;
    signal.data = tr;
    signal.data.u /= u_star;
  }
  meta.emplace_back("u_star", format_double(signal.u_star));

  const ImageGrid truth = phantom_image(config, spec.grid);
  ReconProblem problem =
      make_problem(spec.method, config.scanner, config.tracer, signal, spec.grid, spec.alpha1, spec.alpha2, spec.controls);

  ReconResult result;
  double alpha1 = spec.alpha1, alpha2 = spec.alpha2;
  std::size_t runs = 1;
  if (spec.sweep) {
    const std::vector<double> a1 = spec.alpha1_grid.empty() ? default_alpha1_grid() : spec.alpha1_grid;
    const std::vector<double> a2 = spec.alpha2_grid.empty() ? default_alpha2_grid() : spec.alpha2_grid;
    SweepResult sweep = parameter_sweep(problem, a1, a2, truth, config.jobs);
    std::ostringstream csv;
    for (const auto& [k, v] : meta) csv << "# " << k << ": " << v << '\n';
    csv << "# columns: alpha1,alpha2,ssim,rel_l2,iterations,converged\n";
    for (const SweepEntry& e : sweep.entries)
      csv << format_double(e.alpha1) << ',' << format_double(e.alpha2) << ',' << format_double(e.ssim) << ','
          << format_double(e.rel_l2) << ',' << e.iterations << ',' << (e.converged ? 1 : 0) << '\n';
    write_text(out / "sweep.csv", csv.str());
    alpha1 = sweep.best_entry().alpha1;
    alpha2 = sweep.best_entry().alpha2;
    runs = sweep.entries.size();
    result = std::move(sweep.best_result);
  } else {
    result = solve_joint(problem);
  }

  const MetricReport metrics = compare_images(truth, result.c);
  const bool mismatch = spec.method == Method::M1 && config.scanner.mode == RotationMode::simultaneous;

  meta.emplace_back("method", to_string(spec.method));
  meta.emplace_back("alpha1", format_double(alpha1));
  meta.emplace_back("alpha2", format_double(alpha2));
  write_image_csv(out / "reconstruction_c.csv", result.c, meta);
  write_pgm(out / "reconstruction_c.pgm", result.c, meta);
  write_sinogram_csv(out / "reconstruction_v.csv", result.v, meta);
  write_image_csv(out / "groundtruth.csv", truth, meta);
  write_pgm(out / "overlay.pgm", contour_overlay(result.c, truth), meta);

  std::ostringstream s;
  s << "method = " << to_string(spec.method) << '\n';
  s << "scan_mode = " << to_string(config.scanner.mode) << '\n';
  s << "model_data_mismatch = " << (mismatch ? "true" : "false") << '\n';
  s << "alpha1 = " << format_double(alpha1) << '\n';
  s << "alpha2 = " << format_double(alpha2) << '\n';
  s << "runs = " << runs << '\n';
  s << "ssim = " << format_double(metrics.ssim) << '\n';
  s << "rel_l2 = " << format_double(metrics.rel_l2) << '\n';
  s << "max_abs_error = " << format_double(metrics.max_abs_error) << '\n';
  s << "objective = " << format_double(result.final_objective.total()) << '\n';
  s << "objective_data = " << format_double(result.final_objective.data) << '\n';
  s << "objective_coupling = " << format_double(result.final_objective.coupling) << '\n';
  s << "objective_tv = " << format_double(result.final_objective.tv) << '\n';
  s << "iterations = " << result.iterations << '\n';
  s << "termination = " << (result.converged ? "tolerance" : "max_iterations") << '\n';
  s << "u_star = " << format_double(signal.u_star) << '\n';
  s << "config_hash = " << config.hash() << '\n';
  s << "seed = " << config.simulation.seed << '\n';
  std::string summary = s.str();
  s << "# objective history\n";
  for (double j : result.history) s << format_double(j) << '\n';
  write_text(out / "report.txt", s.str());
  return summary;
}

}  // namespace fflmpi
