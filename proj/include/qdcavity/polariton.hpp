#pragma once

#include <span>

#include "qdcavity/params.hpp"
#include "qdcavity/spectrum.hpp"

// Closed-form theory of the coupled exciton/cavity pair: complex polariton
// eigenfrequencies, the two-Lorentzian spectral function, the detuning-dependent
// spontaneous-emission law and the strong-coupling criterion.

namespace qdc::polariton {

/// Complex eigenfrequencies Omega +- i Gamma of the damped 2x2 exciton/photon
/// problem. Omega_plus >= Omega_minus; Gamma are half widths (HWHM) in GHz.
struct PolaritonPair {
  double omega_plus_GHz = 0.0;
  double omega_minus_GHz = 0.0;
  double hwhm_plus_GHz = 0.0;
  double hwhm_minus_GHz = 0.0;
  /// Photon weight |c_m|^2 / (|c_m|^2 + |c_x|^2) of each eigenvector.
  double photon_fraction_plus = 0.0;
  double photon_fraction_minus = 0.0;
};

PolaritonPair eigenmodes(const SystemParams& p, const units::Detuning& d);

/// Same, with explicit absolute frequencies.
PolaritonPair eigenmodes(double omega_m_GHz, double omega_x_GHz, double g_GHz,
                         double gamma_x_GHz, double gamma_m_GHz);

struct RabiSplitting {
  double GHz = 0.0;
  double nm = 0.0;  ///< at the cavity wavelength
};

/// 2 sqrt(g^2 - (gamma_x - gamma_m)^2 / 16). Throws std::domain_error
/// ("no real splitting") outside strong coupling.
RabiSplitting rabi_splitting(const SystemParams& p);

/// g^2 > (gamma_x - gamma_m)^2 / 16, strictly.
bool is_strong_coupling(const SystemParams& p);

struct AmplitudeModel {
  enum class Kind { constant_pair, hopfield_weighted };
  Kind kind = Kind::hopfield_weighted;
  double a_plus = 1.0;   ///< used by constant_pair
  double a_minus = 1.0;  ///< used by constant_pair
};

/// A_+ / ((w - Omega_+)^2 + Gamma_+^2) + A_- / ((w - Omega_-)^2 + Gamma_-^2)
/// on an absolute frequency grid, normalized to unit peak.
Spectrum spectral_function(std::span<const double> grid_GHz, const SystemParams& p,
                           const units::Detuning& d, const AmplitudeModel& model = {});

/// Unnormalized variant, used when mixing spectra with physical weights.
Spectrum spectral_function_raw(std::span<const double> grid_GHz, const SystemParams& p,
                               const units::Detuning& d, const AmplitudeModel& model = {});

struct PurcellRates {
  double gamma_b_GHz = 0.0;
  double gamma_se_GHz = 0.0;
  double gamma_tot_GHz = 0.0;
  double lifetime_ns = 0.0;
};

/// gamma_se = gamma_m g^2 / (dw^2 + (gamma_m/2)^2); tau = 1 / (2 pi (gamma_b + gamma_se)).
PurcellRates purcell_lifetime(const SystemParams& p, const units::Detuning& d);

/// Same law with explicit rates, shared with the lifetime-curve fit.
double purcell_lifetime_ns(double g_GHz, double gamma_m_GHz, double gamma_b_GHz,
                           double dw_GHz);

}  // namespace qdc::polariton
