#include "qdcavity/units.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qdc::units {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double energy_to_frequency(double energy_ueV) { return energy_ueV / kPlanck; }

double frequency_to_energy(double freq_GHz) { return freq_GHz * kPlanck; }

double wavelength_to_frequency(double lambda_nm) {
  require_positive(lambda_nm, "wavelength");
  return kSpeedOfLight / lambda_nm;
}

double frequency_to_wavelength(double freq_GHz) {
  require_positive(freq_GHz, "frequency");
  return kSpeedOfLight / freq_GHz;
}

double detuning_nm_to_GHz(double dl_nm, double lambda_ref_nm) {
  require_positive(lambda_ref_nm, "reference wavelength");
  return kSpeedOfLight * dl_nm / (lambda_ref_nm * lambda_ref_nm);
}

double detuning_GHz_to_nm(double dnu_GHz, double lambda_ref_nm) {
  require_positive(lambda_ref_nm, "reference wavelength");
  return dnu_GHz * lambda_ref_nm * lambda_ref_nm / kSpeedOfLight;
}

double q_factor(double lambda_nm, double fwhm_nm) {
  require_positive(lambda_nm, "wavelength");
  require_positive(fwhm_nm, "linewidth");
  return lambda_nm / fwhm_nm;
}

double lifetime_from_fwhm(double gamma_GHz) {
  require_positive(gamma_GHz, "rate");
  return 1.0 / (kTwoPi * gamma_GHz);
}

double fwhm_from_lifetime(double tau_ns) {
  require_positive(tau_ns, "lifetime");
  return 1.0 / (kTwoPi * tau_ns);
}

Detuning Detuning::from_nm(double dl_nm, double lambda_ref_nm) {
  return {dl_nm, detuning_nm_to_GHz(dl_nm, lambda_ref_nm), lambda_ref_nm};
}

Detuning Detuning::from_GHz(double dw_GHz, double lambda_ref_nm) {
  return {detuning_GHz_to_nm(dw_GHz, lambda_ref_nm), dw_GHz, lambda_ref_nm};
}

}  // namespace qdc::units
