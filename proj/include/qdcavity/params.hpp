#pragma once

#include "qdcavity/units.hpp"

namespace qdc {

/// Physical parameters of the dot/cavity system. All rates are FWHM in GHz.
///
/// The defaults are the resonance-fit values: g = 18.4 GHz, gamma_x = 8.5 GHz,
/// gamma_m = 24.1 GHz, background emission gamma_b = 15 MHz, cavity at 942.5 nm.
struct SystemParams {
  double lambda_m_nm = 942.5;  ///< cavity wavelength
  double lambda_x_nm = 942.5;  ///< exciton wavelength
  double g_GHz = 18.4;
  double gamma_x_GHz = 8.5;    ///< total exciton FWHM, including pure dephasing
  double gamma_m_GHz = 24.1;
  double gamma_b_GHz = 0.015;  ///< radiative rate into non-cavity modes
  double pump_GHz = 0.01;      ///< incoherent exciton pump
  double transfer_GHz = 0.0;   ///< phenomenological exciton -> cavity feeding
  int n_max = 5;               ///< photon-number truncation
  int emitter_levels = 2;      ///< 3 adds a feeder level that decays into the mode
  double feeder_pump_GHz = 0.0;
  double feeder_decay_GHz = 0.0;

  /// Throws std::invalid_argument on negative rates, bad truncation or
  /// gamma_b > gamma_x.
  void validate() const;

  /// Pure dephasing rate gamma_d with gamma_x = gamma_b + 2 gamma_d.
  double dephasing_GHz() const { return 0.5 * (gamma_x_GHz - gamma_b_GHz); }

  double cavity_frequency_GHz() const;

  /// Detuning implied by lambda_x - lambda_m, referenced to the cavity.
  units::Detuning detuning() const;

  /// Copy with lambda_x moved so that lambda_x - lambda_m = dl_nm.
  SystemParams with_detuning_nm(double dl_nm) const;
};

}  // namespace qdc
