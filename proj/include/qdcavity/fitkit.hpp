#pragma once

#include <optional>
#include <vector>

#include "qdcavity/histogram.hpp"
#include "qdcavity/levenberg_marquardt.hpp"
#include "qdcavity/spectrum.hpp"

// Fit models for spectra, anti-crossing peak tracks, lifetime-vs-detuning
// curves and time-resolved decays, all on top of levenberg_marquardt().

namespace qdc::fit {

// ---- Lorentzian spectra -------------------------------------------------

/// (area / pi) * (w/2) / ((x - c)^2 + (w/2)^2) + (dispersion / pi) * (x - c) / ((x - c)^2 + (w/2)^2)
double lorentzian(double x, double center, double fwhm, double area, double dispersion = 0.0);

struct LorentzianOptions {
  /// Initial centers; estimated from smoothed local maxima when empty.
  std::vector<double> init_centers;
  /// Adds an antisymmetric term per peak. The resonance center is then the pole
  /// position rather than the apparent maximum.
  bool dispersive = false;
  bool fit_background = true;
  Options lm;
};

struct LorentzianComponent {
  double center = 0.0;
  double fwhm = 0.0;
  double area = 0.0;
  double dispersion = 0.0;
  double area_fraction = 0.0;  ///< area / sum of areas
};

struct LorentzianFit {
  FitResult result;  ///< parameters center_k, fwhm_k, area_k[, dispersion_k], background
  std::vector<LorentzianComponent> peaks;  ///< sorted by center
  double background = 0.0;
};

/// Sum of n_peaks (1..3) Lorentzians plus a constant. Requires at least
/// 3 n_peaks + 1 samples.
LorentzianFit fit_lorentzians(const Spectrum& data, int n_peaks,
                              const LorentzianOptions& opt = {});

// ---- Anti-crossing ------------------------------------------------------

/// One observed peak at a given detuning. branch: +1 upper polariton (shorter
/// wavelength), -1 lower, 0 unlabeled.
struct BranchPoint {
  double dl_nm = 0.0;
  double lambda_nm = 0.0;
  int branch = 0;
};

struct AnticrossingInit {
  double g_GHz = 15.0;
  double lambda_x_nm = 0.0;  ///< 0: taken from the data
  double gamma_x_GHz = 8.5;
  double gamma_m_GHz = 24.1;
  double dl_offset_nm = 0.0;
  bool fit_gammas = false;  ///< positions alone barely constrain the linewidths
  bool fit_offset = false;
};

struct AnticrossingFit {
  FitResult result;  ///< g_GHz, lambda_x_nm, gamma_x_GHz, gamma_m_GHz, dl_offset_nm
  std::vector<BranchPoint> assigned;  ///< input points with branch labels filled in
  double min_splitting_nm = 0.0;      ///< polariton splitting at zero detuning
};

/// Predicted branch wavelengths at cavity wavelength lambda_x - (dl + offset).
/// Returns {lambda_plus, lambda_minus} with lambda_plus <= lambda_minus.
std::pair<double, double> branch_wavelengths(double dl_nm, double g_GHz, double lambda_x_nm,
                                             double gamma_x_GHz, double gamma_m_GHz,
                                             double dl_offset_nm = 0.0);

/// Fits the complex-eigenvalue branch positions to the peaks. Detunings with two
/// peaks are labeled by wavelength order; single peaks take the label of the
/// nearer branch of the initial model, ties going to the ordering seen at the
/// largest |dl|. Requires >= 6 distinct detunings and both branches present.
AnticrossingFit fit_anticrossing(const std::vector<BranchPoint>& points,
                                 const AnticrossingInit& init = {});

// ---- Lifetime versus detuning -------------------------------------------

struct LifetimePoint {
  double dl_nm = 0.0;
  double tau_ns = 0.0;
};

struct LifetimeCurveOptions {
  double g_GHz = 15.0;
  double gamma_b_GHz = 0.01;
  double gamma_m_GHz = 24.1;  ///< held fixed
  double lambda_ref_nm = 942.5;
  double relative_sigma = 0.05;  ///< weight 1 / (relative_sigma * tau)
  Options lm;
};

/// Weighted fit of tau = 1 / (2 pi (gamma_b + gamma_m g^2 / (dw^2 + (gamma_m/2)^2))).
/// Parameters g_GHz, gamma_b_GHz. Needs >= 3 points at >= 2 distinct |dl|.
FitResult fit_lifetime_curve(const std::vector<LifetimePoint>& points,
                             const LifetimeCurveOptions& opt = {});

// ---- Time-resolved decays -----------------------------------------------

enum class DecayModel { mono, bi };

struct DecayOptions {
  DecayModel model = DecayModel::mono;
  /// Gaussian instrument response FWHM; 0 disables the convolution.
  double irf_fwhm_ns = 0.0;
  /// Excitation time; fitted when unset, except for tail fits.
  std::optional<double> t0_ns;
  /// Without an IRF: start the fit at the fullest bin with t0 at its left
  /// edge. When false all bins are used and t0 is fitted.
  bool tail_only = true;
  /// When false the background is held at zero. Histograms without any
  /// background put the fitted value on its zero bound, where the gradient
  /// test cannot be met.
  bool fit_background = true;
  /// Repetition period for histograms folded modulo the pulse period; decays
  /// left over from earlier pulses are then added to the model. 0: single shot.
  double period_ns = 0.0;
  Options lm;
};

struct DecayFit {
  FitResult result;  ///< counts_k, tau_k_ns (k = 1[, 2]), background (per ns), t0_ns
  double tau_ns = 0.0;  ///< tau_1 for mono; the amplitude-weighted mean for bi
};

/// Poisson maximum-likelihood fit (deviance residuals) of exponential decays,
/// optionally convolved with a Gaussian IRF, integrated over each bin.
/// Requires >= 10 non-empty bins.
DecayFit fit_decay(const Histogram& h, const DecayOptions& opt = {});

/// Expected counts in [a, b) of a unit-area exponential starting at t0 and
/// convolved with a Gaussian of standard deviation sigma (sigma = 0: none).
double exp_bin_fraction(double a, double b, double t0, double tau, double sigma);

}  // namespace qdc::fit
