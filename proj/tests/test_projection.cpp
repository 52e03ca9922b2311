#include "fflmpi/projection.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fflmpi;

namespace {

ScanConfig sequential() { return ScanConfig::reference_scanner(RotationMode::sequential); }
ScanConfig simultaneous() { return ScanConfig::reference_scanner(RotationMode::simultaneous); }

ProjectionGeometry custom_geometry(double R, Vector angles, Vector s) {
  ProjectionGeometry g;
  g.fov_radius = R;
  g.angles = std::move(angles);
  g.s_grid = std::move(s);
  g.sample_column = Eigen::VectorXi::Zero(1);
  return g;
}

double dot(const RowMatrix& a, const RowMatrix& b) { return (a.array() * b.array()).sum(); }

}  // namespace

TEST_CASE("displacement grid follows the drive excitation") {
  const ScanConfig cfg = sequential();
  const Vector s = displacement_grid(cfg);
  REQUIRE(s.size() == 161);
  CHECK(s[0] == doctest::Approx(-cfg.fov_radius()));
  CHECK(s[160] == doctest::Approx(cfg.fov_radius()));
  for (Index j = 0; j <= 160; ++j) {
    // position at sample j of the first half-sweep
    CHECK(s[j] == doctest::Approx(-cfg.fov_radius() * std::cos(2 * std::numbers::pi * cfg.f_drive * j / cfg.f_sample)));
  }
  CHECK(trapezoid_weights(s).sum() == doctest::Approx(2 * cfg.fov_radius()));
}

TEST_CASE("disk chord lengths") {
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(129, cfg);
  const double r0 = 0.6 * g.fov_half, h = g.pixel_size();
  const ImageGrid c = make_phantom(g, Disk{Vec2::Zero(), r0, 1.0}, {4, false});
  Vector angles(6);
  angles << 0.0, 0.3, 0.7854, 1.2, 2.0, 3.0;
  const ProjectionGeometry geom = custom_geometry(g.fov_half, angles, Vector::LinSpaced(81, -g.fov_half, g.fov_half));
  const Sinogram rc = radon_apply(c, geom);
  int checked = 0;
  for (Index a = 0; a < angles.size(); ++a) {
    for (Index j = 0; j < geom.n_s(); ++j) {
      const double s = geom.s_grid[j];
      if (std::abs(s) > r0 - 2 * h) continue;
      const double chord = 2 * std::sqrt(r0 * r0 - s * s);
      CHECK(std::abs(rc.values(a, j) - chord) / chord <= 2 * h / r0);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("zero image and zero sinogram") {
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(33, cfg);
  const ProjectionGeometry geom = sequential_geometry(cfg);
  CHECK(radon_apply(g, geom).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(weighted_radon_apply(g, geom).values.cwiseAbs().maxCoeff() == 0.0);
  const Sinogram zero = geom.empty_sinogram();
  CHECK(radon_adjoint(zero, geom, g).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mass preservation per angle") {
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(129, cfg);
  const ImageGrid c = make_phantom(g, default_phantom_shapes(g.fov_half), {4, false});
  const ProjectionGeometry geom = sequential_geometry(cfg);
  const Sinogram rc = radon_apply(c, geom);
  const Vector w = trapezoid_weights(geom.s_grid);
  const double mass = c.values.sum() * g.pixel_area();
  for (Index a = 0; a < geom.n_angles(); ++a) {
    CAPTURE(a);
    CHECK(std::abs(rc.values.row(a).dot(w.transpose()) - mass) <= 0.01 * mass);
  }
}

TEST_CASE("weighted transform of a radially symmetric phantom vanishes") {
  const ScanConfig cfg = simultaneous();
  const ImageGrid g = make_grid(129, cfg);
  const ImageGrid c = make_phantom(g, Disk{Vec2::Zero(), g.fov_half / 2, 1.0}, {4, false});
  for (const ProjectionGeometry& geom : {dashed_geometry(cfg), sequential_geometry(sequential())}) {
    const double max_rc = radon_apply(c, geom).values.cwiseAbs().maxCoeff();
    const double max_w = weighted_radon_apply(c, geom).values.cwiseAbs().maxCoeff();
    CHECK(max_w <= 1e-3 * max_rc);
  }
}

TEST_CASE("radial-symmetry residual shrinks with the pixel size") {
  const ScanConfig cfg = simultaneous();
  const ProjectionGeometry geom = dashed_geometry(cfg);
  double previous = 0.0;
  for (int n : {65, 129, 257}) {
    const ImageGrid g = make_grid(n, cfg);
    const ImageGrid c = make_phantom(g, Disk{Vec2::Zero(), g.fov_half / 2, 1.0}, {4, false});
    const double ratio = weighted_radon_apply(c, geom).values.cwiseAbs().maxCoeff() /
                         (g.fov_half * radon_apply(c, geom).values.cwiseAbs().maxCoeff());
    CAPTURE(n);
    CHECK(ratio <= 0.5 * g.pixel_size() / g.fov_half);
    if (previous > 0) CHECK(ratio < 0.6 * previous);
    previous = ratio;
  }
}

TEST_CASE("weighted transform is bounded by R times the transform") {
  const ScanConfig cfg = simultaneous();
  const ImageGrid g = make_grid(65, cfg);
  const ImageGrid c = make_phantom(g, default_phantom_shapes(g.fov_half), {4, false});
  const ProjectionGeometry geom = per_sample_geometry(cfg);
  const Sinogram rc = radon_apply(c, geom), wc = weighted_radon_apply(c, geom);
  const double tol = g.pixel_size();
  CHECK(((wc.values.cwiseAbs() - (g.fov_half + tol) * rc.values).array() <= 1e-18).all());
}

TEST_CASE("single pixel: weighted over plain transform is the offset along the line") {
  const ScanConfig cfg = sequential();
  ImageGrid g = make_grid(65, cfg);
  const int ix = 45, iy = 22;
  g.values(iy, ix) = 1.0;
  const Vec2 r0 = g.position(iy, ix);
  Vector angles = Vector::LinSpaced(12, 0.0, std::numbers::pi * 11 / 12);
  for (Index a = 0; a < angles.size(); ++a) {
    const Vec2 e(-std::sin(angles[a]), std::cos(angles[a]));
    const Vec2 ep(-std::cos(angles[a]), -std::sin(angles[a]));
    // line through the pixel center
    Vector s(1);
    s << r0.dot(e);
    const ProjectionGeometry geom = custom_geometry(g.fov_half, angles.segment(a, 1), s);
    const double rc = radon_apply(g, geom).values(0, 0);
    const double wc = weighted_radon_apply(g, geom).values(0, 0);
    REQUIRE(rc > 0);
    CHECK(std::abs(wc / rc - r0.dot(ep)) <= g.pixel_size());
  }
}

TEST_CASE("adjointness on random pairs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (const ScanConfig& cfg : {sequential(), simultaneous()}) {
    const ImageGrid g = make_grid(33, cfg);
    const ProjectionGeometry geom = scan_geometry(cfg);
    for (int trial = 0; trial < 50; ++trial) {
      ImageGrid c = g;
      c.values = Matrix::NullaryExpr(g.n, g.n, [&] { return U(rng); });
      Sinogram v = geom.empty_sinogram();
      v.values = RowMatrix::NullaryExpr(geom.n_angles(), geom.n_s(), [&] { return U(rng); });
      {
        const double lhs = dot(radon_apply(c, geom).values, v.values);
        const double rhs = (c.values.array() * radon_adjoint(v, geom, g).values.array()).sum();
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), std::abs(rhs)));
      }
      {
        const double lhs = dot(weighted_radon_apply(c, geom).values, v.values);
        const double rhs = (c.values.array() * weighted_radon_adjoint(v, geom, g).values.array()).sum();
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(std::abs(lhs), std::abs(rhs)));
      }
    }
  }
}

TEST_CASE("single-angle constant sinogram back-projects to a smear along the lines") {
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(33, cfg);
  Vector angle(1);
  angle << 0.0;  // e_phi = (0, 1): lines run along x
  ProjectionGeometry geom = custom_geometry(g.fov_half, angle, displacement_grid(cfg));
  Sinogram v = geom.empty_sinogram();
  v.values.setOnes();
  const Matrix b = radon_adjoint(v, geom, g).values;
  for (int iy = 0; iy < g.n; ++iy) {
    const double ref = b(iy, g.n / 2);
    for (int ix = 1; ix + 1 < g.n; ++ix) CHECK(b(iy, ix) == doctest::Approx(ref).epsilon(1e-12));
  }
  CHECK(b.maxCoeff() > 0);
}

TEST_CASE("sparse matrix form matches the matrix-free transforms") {
  const ScanConfig cfg = simultaneous();
  const ImageGrid g = make_grid(33, cfg);
  const ImageGrid c = make_phantom(g, default_phantom_shapes(g.fov_half), {2, false});
  const ProjectionGeometry geom = dashed_geometry(cfg);
  const auto R = radon_matrix(g, geom);
  const auto W = radon_matrix(g, geom, true);
  const Vector x = Eigen::Map<const Vector>(c.values.data(), c.values.size());
  const RowMatrix rc = radon_apply(c, geom).values, wc = weighted_radon_apply(c, geom).values;
  CHECK((R * x - Eigen::Map<const Vector>(rc.data(), rc.size())).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((W * x - Eigen::Map<const Vector>(wc.data(), wc.size())).cwiseAbs().maxCoeff() <= 1e-18);
}

TEST_CASE("rotating the phantom shifts the angle axis") {
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(129, cfg);
  const double R = g.fov_half;
  auto shapes = [&](double rot) {
    const Eigen::Rotation2D<double> q(rot);
    return std::vector<Shape>{Disk{q * Vec2(0.3 * R, 0.1 * R), 0.25 * R, 1.0},
                              Disk{q * Vec2(-0.35 * R, -0.2 * R), 0.15 * R, 0.6}};
  };
  const double delta = 3 * std::numbers::pi / 25;
  const ImageGrid c = make_phantom(g, shapes(0.0), {4, false});
  const ImageGrid rotated = make_phantom(g, shapes(delta), {4, false});
  const Vector angles = Vector::LinSpaced(10, 0.0, 0.9 * std::numbers::pi);
  const Vector s = Vector::LinSpaced(101, -R, R);
  const Sinogram base = radon_apply(c, custom_geometry(R, angles, s));
  const Sinogram shifted = radon_apply(rotated, custom_geometry(R, (angles.array() + delta).matrix(), s));
  CHECK((shifted.values - base.values).norm() <= 0.01 * base.values.norm());
}

TEST_CASE("sequential sinogram") {
  const ScanConfig cfg = sequential();
  const ImageGrid g = make_grid(65, cfg);
  const ImageGrid c = make_phantom(g, default_phantom_shapes(g.fov_half), {2, false});
  const Sinogram s = build_sequential_sinogram(c, cfg, 25);
  CHECK(s.n_angles() == 25);
  CHECK(s.s_grid[0] == doctest::Approx(-cfg.fov_radius()));
  CHECK(s.s_grid[s.n_s() - 1] == doctest::Approx(cfg.fov_radius()));
  for (int j = 0; j < 25; ++j) {
    CHECK(s.angles[j] == doctest::Approx(j * std::numbers::pi / 25));
    const ProjectionGeometry one = custom_geometry(g.fov_half, s.angles.segment(j, 1), s.s_grid);
    CHECK((radon_apply(c, one).values.row(0) - s.values.row(j)).cwiseAbs().maxCoeff() == 0.0);
  }
  try {
    build_sequential_sinogram(c, simultaneous(), 25);
    FAIL("expected a mode error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::mode);
  }
}

TEST_CASE("dashed simultaneous sinogram") {
  const ScanConfig cfg = simultaneous();
  const ImageGrid g = make_grid(65, cfg);
  const ImageGrid c = make_phantom(g, default_phantom_shapes(g.fov_half), {2, false});
  const Sinogram s = build_simultaneous_sinogram(c, cfg);
  REQUIRE(s.n_angles() == 25);
  CHECK(s.angles.minCoeff() >= 0.0);
  CHECK(s.angles.maxCoeff() < std::numbers::pi);
  for (int j = 1; j < 25; ++j) CHECK(s.angles[j] - s.angles[j - 1] == doctest::Approx(std::numbers::pi / 25));
  CHECK_THROWS_AS(build_simultaneous_sinogram(c, sequential()), Error);

  const ProjectionGeometry geom = dashed_geometry(cfg);
  REQUIRE(geom.sample_column.size() == 4000);
  CHECK(geom.sample_column[0] == 0);
  CHECK(geom.sample_column[159] == 0);
  CHECK(geom.sample_column[160] == 1);
  CHECK(geom.sample_column[3999] == 24);
}

TEST_CASE("frozen rotation reduces the dashed sinogram to the fixed-angle column") {
  ScanConfig cfg = simultaneous();
  cfg.f_rot = 1e-6;
  cfg.total_time = 25 * cfg.half_period();
  const ImageGrid g = make_grid(65, cfg);
  const ImageGrid c = make_phantom(g, default_phantom_shapes(g.fov_half), {2, false});
  const Sinogram dashed = build_simultaneous_sinogram(c, cfg);
  const Sinogram seq = build_sequential_sinogram(c, sequential(), 25);
  REQUIRE(dashed.n_angles() == 25);
  const double scale = seq.values.cwiseAbs().maxCoeff();
  for (int j = 0; j < 25; ++j) CHECK((dashed.values.row(j) - seq.values.row(0)).cwiseAbs().maxCoeff() <= 1e-6 * scale);
}

TEST_CASE("geometry mismatches are reported") {
  const ScanConfig cfg = sequential();
  const ProjectionGeometry geom = sequential_geometry(cfg);
  const ImageGrid wrong = make_grid(17, 2 * cfg.fov_radius());
  CHECK_THROWS_AS(radon_apply(wrong, geom), Error);
  Sinogram bad;
  bad.angles = Vector::Zero(3);
  bad.s_grid = Vector::LinSpaced(5, -1e-3, 1e-3);
  bad.values = RowMatrix::Zero(3, 5);
  try {
    radon_adjoint(bad, geom, make_grid(17, cfg));
    FAIL("expected a geometry error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::geometry);
  }
  ProjectionGeometry outside = geom;
  outside.s_grid[0] = -2 * cfg.fov_radius();
  CHECK_THROWS_AS(radon_apply(make_grid(17, cfg), outside), Error);
}
