#pragma once

#include <cstdint>

#include "qdcavity/spectrum.hpp"
#include "qdcavity/trajectories.hpp"

// Measurement chain: spectrometer resolution, detector timing jitter and
// detection efficiency.

namespace qdc::instrument {

struct InstrumentConfig {
  double spectral_resolution_pm = 21.0;  ///< Gaussian FWHM; 0 disables
  double apd_irf_ps = 70.0;              ///< Gaussian FWHM of the timing jitter
  double efficiency = 1.0;               ///< per-click detection probability
  double rep_rate_MHz = 40.0;

  void validate() const;
};

/// Gaussian FWHM / (2 sqrt(2 ln 2)).
double fwhm_to_sigma(double fwhm);

/// Olivero-Longbothum approximation of the Voigt FWHM.
double voigt_fwhm(double lorentz_fwhm, double gauss_fwhm);
/// Inverse of voigt_fwhm in the Lorentzian width.
double lorentz_from_voigt(double voigt, double gauss_fwhm);

/// Gaussian convolution with the spectrometer resolution. On a frequency axis
/// the resolution is converted at the centre of the axis. Each input sample is
/// spread with a kernel normalized on the output grid, so the trapezoidal area
/// is preserved exactly. Throws std::invalid_argument if any grid spacing
/// exceeds a quarter of the resolution.
Spectrum convolve_spectrum(const Spectrum& s, const InstrumentConfig& cfg);

/// Keeps each click with probability `efficiency` and shifts survivors by
/// Gaussian jitter; the result is re-sorted by time. Draws are indexed by click
/// position, so the outcome of one click does not depend on the others.
trajectories::ClickStream jitter_and_thin(const trajectories::ClickStream& clicks,
                                          const InstrumentConfig& cfg, std::uint64_t seed);

}  // namespace qdc::instrument
