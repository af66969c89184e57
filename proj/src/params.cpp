#include "qdcavity/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdc {

namespace {

void check_rate(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

}  // namespace

void SystemParams::validate() const {
  if (!(lambda_m_nm > 0.0) || !(lambda_x_nm > 0.0)) {
    throw std::invalid_argument("wavelengths must be positive");
  }
  check_rate(g_GHz, "g");
  check_rate(gamma_x_GHz, "gamma_x");
  check_rate(gamma_m_GHz, "gamma_m");
  check_rate(gamma_b_GHz, "gamma_b");
  check_rate(pump_GHz, "pump");
  check_rate(transfer_GHz, "transfer");
  check_rate(feeder_pump_GHz, "feeder_pump");
  check_rate(feeder_decay_GHz, "feeder_decay");
  if (gamma_b_GHz > gamma_x_GHz) {
    throw std::invalid_argument("gamma_b must not exceed gamma_x");
  }
  if (n_max < 1) {
    throw std::invalid_argument("n_max must be >= 1");
  }
  if (emitter_levels != 2 && emitter_levels != 3) {
    throw std::invalid_argument("emitter_levels must be 2 or 3");
  }
}

double SystemParams::cavity_frequency_GHz() const {
  return units::wavelength_to_frequency(lambda_m_nm);
}

units::Detuning SystemParams::detuning() const {
  return units::Detuning::from_nm(lambda_x_nm - lambda_m_nm, lambda_m_nm);
}

SystemParams SystemParams::with_detuning_nm(double dl_nm) const {
  SystemParams p = *this;
  p.lambda_x_nm = lambda_m_nm + dl_nm;
  return p;
}

}  // namespace qdc
