#pragma once

#include "fflmpi/core.hpp"

#include <cmath>
#include <utility>

namespace fflmpi {

namespace detail {
// Below this magnitude the closed forms lose digits to cancellation and the
// Taylor series is used instead.
inline constexpr double langevin_series_threshold = 1e-2;

[[noreturn]] void throw_non_finite(const char* where);
}  // namespace detail

/// L(x) = coth(x) - 1/x, with L(0) = 0.
template <typename Scalar>
Scalar langevin(Scalar x) {
  using std::abs;
  using std::expm1;
  using std::exp;
  if (!std::isfinite(static_cast<double>(x))) detail::throw_non_finite("langevin");
  const Scalar a = abs(x);
  if (a < Scalar(detail::langevin_series_threshold)) {
    const Scalar x2 = x * x;
    // x/3 - x^3/45 + 2x^5/945 - x^7/4725
    return x * (Scalar(1) / 3 + x2 * (Scalar(-1) / 45 + x2 * (Scalar(2) / 945 + x2 * (Scalar(-1) / 4725))));
  }
  // coth(a) = (1 + e) / (1 - e) with e = exp(-2a)
  const Scalar e = exp(Scalar(-2) * a);
  const Scalar coth = (Scalar(1) + e) / (-expm1(Scalar(-2) * a));
  const Scalar value = coth - Scalar(1) / a;
  return x < 0 ? -value : value;
}

/// L'(x) = 1/x^2 - 1/sinh^2(x), with L'(0) = 1/3.
template <typename Scalar>
Scalar langevin_derivative(Scalar x) {
  using std::abs;
  using std::expm1;
  using std::exp;
  if (!std::isfinite(static_cast<double>(x))) detail::throw_non_finite("langevin_derivative");
  const Scalar a = abs(x);
  if (a < Scalar(detail::langevin_series_threshold)) {
    const Scalar x2 = x * x;
    // 1/3 - x^2/15 + 2x^4/189 - x^6/675
    return Scalar(1) / 3 + x2 * (Scalar(-1) / 15 + x2 * (Scalar(2) / 189 + x2 * (Scalar(-1) / 675)));
  }
  // 1/sinh^2(a) = 4e / (1 - e)^2 with e = exp(-2a)
  const Scalar e = exp(Scalar(-2) * a);
  const Scalar one_minus_e = -expm1(Scalar(-2) * a);
  return Scalar(1) / (a * a) - Scalar(4) * e / (one_minus_e * one_minus_e);
}

/// L(x) and L'(x) from one exponential; for inner loops over many fields.
template <typename Scalar>
std::pair<Scalar, Scalar> langevin_with_derivative(Scalar x) {
  using std::abs;
  using std::expm1;
  using std::exp;
  const Scalar a = abs(x);
  if (a < Scalar(detail::langevin_series_threshold)) return {langevin(x), langevin_derivative(x)};
  const Scalar em = expm1(Scalar(-2) * a);
  const Scalar e = em + Scalar(1);
  const Scalar inv_a = Scalar(1) / a;
  const Scalar value = (Scalar(1) + e) / (-em) - inv_a;
  const Scalar slope = inv_a * inv_a - Scalar(4) * e / (em * em);
  return {x < 0 ? -value : value, slope};
}

/// Modulus of the mean magnetic moment, m L(beta H).
template <typename Scalar>
Scalar mean_moment(Scalar field, const TracerModel& tracer) {
  return Scalar(tracer.particle_moment()) * langevin(Scalar(tracer.langevin_beta()) * field);
}

/// d/dH of mean_moment, m beta L'(beta H).
template <typename Scalar>
Scalar mean_moment_derivative(Scalar field, const TracerModel& tracer) {
  const Scalar beta = Scalar(tracer.langevin_beta());
  return Scalar(tracer.particle_moment()) * beta * langevin_derivative(beta * field);
}

/// Excitation Lambda(t) = -cos(2 pi f_d t) and its time derivative.
struct Excitation {
  double value = 0.0;
  double rate = 0.0;
};

inline Excitation excitation(double t, double f_drive) {
  const double w = 2.0 * std::numbers::pi * f_drive;
  return {-std::cos(w * t), w * std::sin(w * t)};
}

/// Instantaneous FFL position and orientation.
struct FflState {
  double t = 0.0;
  double phi = 0.0;
  double phi_rate = 0.0;
  double displacement = 0.0;  // s_t = (A/G) Lambda(t)
  double lambda = 0.0;
  double lambda_rate = 0.0;
  int sweep = 0;  // index of the enclosing half drive-period
  Vec2 e_phi = Vec2(0, 1);
  Vec2 e_phi_perp = Vec2(-1, 0);
};

/// Line normal e_phi = (-sin phi, cos phi).
inline Vec2 normal_direction(double phi) { return {-std::sin(phi), std::cos(phi)}; }
/// e_phi_perp = -(cos phi, sin phi), the derivative of e_phi w.r.t. phi.
inline Vec2 perp_direction(double phi) { return {-std::cos(phi), -std::sin(phi)}; }

FflState ffl_state(double t, const ScanConfig& config);

/// |Lambda'(t)| / phi'_t = (f_d / f_rot) |sin(2 pi f_d t)|. Simultaneous mode only.
double speed_ratio(double t, const ScanConfig& config);
/// Maximum of speed_ratio over t, f_d / f_rot.
double speed_ratio_envelope(const ScanConfig& config);

}  // namespace fflmpi
