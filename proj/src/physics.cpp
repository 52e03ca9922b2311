#include "fflmpi/physics.hpp"

#include <algorithm>
#include <string>

namespace fflmpi {

namespace detail {
void throw_non_finite(const char* where) {
  throw Error(ErrorKind::invalid_argument, std::string(where) + ": non-finite argument");
}
}  // namespace detail

FflState ffl_state(double t, const ScanConfig& config) {
  const double total = config.measurement_time();
  if (!(t >= 0.0) || t > total * (1 + 1e-12)) {
    throw Error(ErrorKind::invalid_argument, "time outside the measurement interval");
  }
  FflState st;
  st.t = t;
  const Excitation ex = excitation(t, config.f_drive);
  st.lambda = ex.value;
  st.lambda_rate = ex.rate;
  st.displacement = config.fov_radius() * ex.value;
  st.sweep = std::min(static_cast<int>(t / config.half_period()), config.n_sweeps() - 1);

  if (config.mode == RotationMode::sequential) {
    st.phi = st.sweep * std::numbers::pi / config.n_angles;
    st.phi_rate = 0.0;
  } else {
    st.phi_rate = 2.0 * std::numbers::pi * config.f_rot;
    st.phi = st.phi_rate * t;
  }
  st.e_phi = normal_direction(st.phi);
  st.e_phi_perp = perp_direction(st.phi);
  return st;
}

double speed_ratio(double t, const ScanConfig& config) {
  if (config.mode != RotationMode::simultaneous) {
    throw Error(ErrorKind::mode, "speed ratio is infinite for sequential rotation");
  }
  return config.f_drive / config.f_rot * std::abs(std::sin(2.0 * std::numbers::pi * config.f_drive * t));
}

double speed_ratio_envelope(const ScanConfig& config) {
  if (config.mode != RotationMode::simultaneous) {
    throw Error(ErrorKind::mode, "speed ratio is infinite for sequential rotation");
  }
  return config.f_drive / config.f_rot;
}

}  // namespace fflmpi
