#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qdcavity/fitkit.hpp"
#include "qdcavity/params.hpp"
#include "qdcavity/spectrum.hpp"

// Quasi-static spectral diffusion: the exciton spends a fraction f of the time
// at its nominal detuning and the rest shifted far from the cavity. The
// time-averaged spectrum is the dwell-weighted mixture of the two spectra.

namespace qdc::specdiff {

enum class SwitchingRegime { quasi_static };

struct TelegraphConfig {
  double resonant_fraction = 0.55;
  /// Exciton frequency shift in the far state; NaN selects -20 g (red shift).
  double detuned_offset_GHz = std::numeric_limits<double>::quiet_NaN();
  SwitchingRegime regime = SwitchingRegime::quasi_static;

  double offset_GHz(double g_GHz) const;
  /// Throws std::invalid_argument unless 0 <= f <= 1 and |offset| > 5 g.
  void validate(double g_GHz) const;
};

enum class TermModel {
  analytic,  ///< hopfield-weighted two-pole spectral function
  master,    ///< master-equation cavity emission spectrum
};

struct DiffusedSpectrum {
  Spectrum total;     ///< f * resonant + (1 - f) * detuned
  Spectrum resonant;  ///< unit-area term at the nominal detuning (unweighted)
  Spectrum detuned;   ///< unit-area term at the shifted detuning (unweighted)
  /// Three-Lorentzian decomposition of total (empty if the fit was not possible).
  std::vector<fit::LorentzianComponent> components;
  std::vector<std::string> warnings;
};

/// Both terms are normalized to unit area on the grid before mixing, so each
/// configuration contributes in proportion to its dwell fraction. The grid is
/// an absolute frequency axis (GHz).
DiffusedSpectrum averaged_spectrum(const SystemParams& p, const units::Detuning& d,
                                   const TelegraphConfig& cfg, std::span<const double> grid_GHz,
                                   TermModel model = TermModel::analytic);

}  // namespace qdc::specdiff
