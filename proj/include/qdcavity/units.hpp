#pragma once

// Conversions between wavelength, ordinary frequency, energy and lifetime.
//
// Canonical units across the library:
//   frequencies and rates  GHz (ordinary frequency; linewidths are FWHM)
//   wavelengths            nm
//   energies               ueV
//   times                  ns
// Dynamical generators multiply rates by 2*pi to obtain angular rates in rad/ns.

namespace qdc::units {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Speed of light in nm * GHz.
inline constexpr double kSpeedOfLight = 2.99792458e8;
/// Planck constant in ueV per GHz.
inline constexpr double kPlanck = 4.135667696;

double energy_to_frequency(double energy_ueV);
double frequency_to_energy(double freq_GHz);

double wavelength_to_frequency(double lambda_nm);
double frequency_to_wavelength(double freq_GHz);

/// First-order conversion dnu = c * dl / lambda_ref^2.
double detuning_nm_to_GHz(double dl_nm, double lambda_ref_nm);
double detuning_GHz_to_nm(double dnu_GHz, double lambda_ref_nm);

double q_factor(double lambda_nm, double fwhm_nm);

/// tau = 1 / (2 pi gamma) for a FWHM rate gamma in GHz; result in ns.
double lifetime_from_fwhm(double gamma_GHz);
double fwhm_from_lifetime(double tau_ns);

/// Exciton/cavity detuning. Both fields are positive when the cavity is blue of
/// the exciton: dl = lambda_x - lambda_m, dw = omega_m - omega_x.
struct Detuning {
  double dl_nm = 0.0;
  double dw_GHz = 0.0;
  double lambda_ref_nm = 942.5;

  static Detuning from_nm(double dl_nm, double lambda_ref_nm);
  static Detuning from_GHz(double dw_GHz, double lambda_ref_nm);
};

}  // namespace qdc::units
